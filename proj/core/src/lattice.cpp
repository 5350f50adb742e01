#include "pbcising/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pbcising/error.hpp"

namespace pbcising {

std::string_view to_string(Boundary bc) {
  return bc == Boundary::Open ? "open" : "torus";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "open" || text == "Open") return Boundary::Open;
  if (text == "torus" || text == "Torus" || text == "periodic") return Boundary::Torus;
  fail(ErrorKind::ParseError, "unknown boundary condition '" + std::string(text) + "'");
}

std::string_view to_string(Orientation orientation) {
  switch (orientation) {
    case Orientation::NormalToPlane: return "normal";
    case Orientation::XParallel: return "x";
    case Orientation::YParallel: return "y";
  }
  return "?";
}

Orientation parse_orientation(std::string_view text) {
  if (text == "normal" || text == "NormalToPlane") return Orientation::NormalToPlane;
  if (text == "x" || text == "XParallel") return Orientation::XParallel;
  if (text == "y" || text == "YParallel") return Orientation::YParallel;
  fail(ErrorKind::ParseError, "unknown orientation '" + std::string(text) + "'");
}

Lattice::Lattice(int side, Boundary bc) : side_(side), bc_(bc) {
  if (bc == Boundary::Open && side < 2) {
    fail(ErrorKind::SizeTooSmall, "open lattice needs L >= 2, got " + std::to_string(side));
  }
  if (bc == Boundary::Torus && side < 3) {
    fail(ErrorKind::SizeTooSmall,
         "torus lattice needs L >= 3 (wrap bonds duplicate at L = " + std::to_string(side) + ")");
  }

  bonds_.reserve(static_cast<std::size_t>(expected_bond_count(side, bc)));
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (x + 1 < side) {
        bonds_.push_back({site(x, y), site(x + 1, y)});
      } else if (bc == Boundary::Torus) {
        bonds_.push_back({site(x, y), site(0, y)});
      }
      if (y + 1 < side) {
        bonds_.push_back({site(x, y), site(x, y + 1)});
      } else if (bc == Boundary::Torus) {
        bonds_.push_back({site(x, y), site(x, 0)});
      }
    }
  }

  std::vector<int> degree(static_cast<std::size_t>(sites()), 0);
  for (const auto& b : bonds_) {
    ++degree[b.a];
    ++degree[b.b];
  }
  offsets_.assign(static_cast<std::size_t>(sites()) + 1, 0);
  for (int i = 0; i < sites(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& b : bonds_) {
    adjacency_[fill[b.a]++] = b.b;
    adjacency_[fill[b.b]++] = b.a;
  }
}

Lattice build_lattice(int side, Boundary bc) { return Lattice(side, bc); }

SpinConfig::SpinConfig(int side, std::vector<std::int8_t> spins)
    : side_(side), spins_(std::move(spins)) {
  if (side < 1) fail(ErrorKind::SizeTooSmall, "spin configuration needs L >= 1");
  if (spins_.size() != static_cast<std::size_t>(side) * side) {
    fail(ErrorKind::ShapeMismatch, "expected " + std::to_string(side * side) + " spins, got " +
                                       std::to_string(spins_.size()));
  }
  for (auto s : spins_) {
    if (s != 1 && s != -1) fail(ErrorKind::InvalidArgument, "spin values must be +1 or -1");
  }
}

SpinConfig SpinConfig::uniform(int side, int value) {
  return SpinConfig(side, std::vector<std::int8_t>(static_cast<std::size_t>(side) * side,
                                                   static_cast<std::int8_t>(value)));
}

SpinConfig SpinConfig::checkerboard(int side) {
  std::vector<std::int8_t> spins(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) spins[x + side * y] = ((x + y) % 2 == 0) ? 1 : -1;
  return SpinConfig(side, std::move(spins));
}

SpinConfig SpinConfig::from_bits(int side, std::uint64_t bits) {
  const int n = side * side;
  if (n > 64) fail(ErrorKind::TooLarge, "from_bits supports at most 64 sites");
  std::vector<std::int8_t> spins(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) spins[i] = ((bits >> i) & 1U) ? -1 : 1;
  return SpinConfig(side, std::move(spins));
}

void SpinConfig::set(int site, int value) {
  if (value != 1 && value != -1) fail(ErrorKind::InvalidArgument, "spin values must be +1 or -1");
  spins_[site] = static_cast<std::int8_t>(value);
}

SpinConfig SpinConfig::flipped() const {
  SpinConfig out = *this;
  for (auto& s : out.spins_) s = static_cast<std::int8_t>(-s);
  return out;
}

std::uint64_t SpinConfig::to_bits() const {
  if (sites() > 64) fail(ErrorKind::TooLarge, "to_bits supports at most 64 sites");
  std::uint64_t bits = 0;
  for (int i = 0; i < sites(); ++i)
    if (spins_[i] < 0) bits |= std::uint64_t{1} << i;
  return bits;
}

CouplingParams::CouplingParams(double J, double T, double kB) : J_(J), T_(T), kB_(kB) {
  if (!(J > 0.0) || !std::isfinite(J)) {
    fail(ErrorKind::InvalidArgument, "coupling J must be positive (ferromagnetic)");
  }
  if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorKind::InvalidArgument, "temperature must be positive");
  if (!(kB > 0.0) || !std::isfinite(kB)) fail(ErrorKind::InvalidArgument, "k_B must be positive");
}

namespace {

void require_shape(const Lattice& lattice, const SpinConfig& config) {
  if (config.side() != lattice.side()) {
    fail(ErrorKind::ShapeMismatch, "configuration side " + std::to_string(config.side()) +
                                       " does not match lattice side " +
                                       std::to_string(lattice.side()));
  }
}

}  // namespace

int bond_sum(const Lattice& lattice, const SpinConfig& config) {
  require_shape(lattice, config);
  int sum = 0;
  for (const auto& b : lattice.bonds()) sum += config[b.a] * config[b.b];
  return sum;
}

double energy(const Lattice& lattice, const SpinConfig& config, double J) {
  return -J * static_cast<double>(bond_sum(lattice, config));
}

Magnetization magnetization(const SpinConfig& config) {
  long total = 0;
  for (auto s : config.spins()) total += s;
  return {total, static_cast<double>(total) / config.sites()};
}

bool boundary_matched(const SpinConfig& config, int side) {
  if (config.side() != side) {
    fail(ErrorKind::ShapeMismatch, "configuration is not " + std::to_string(side) + "x" +
                                       std::to_string(side));
  }
  const int last = side - 1;
  for (int i = 0; i < side; ++i) {
    if (config.at(0, i) != config.at(last, i)) return false;
    if (config.at(i, 0) != config.at(i, last)) return false;
  }
  return true;
}

LabeledConfig read_spin_config(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::istringstream header(line);
  int side = 0;
  std::string bc_text;
  if (!(header >> side >> bc_text)) fail(ErrorKind::ParseError, "expected header line 'L bc'");
  if (side < 1) fail(ErrorKind::ParseError, "side length must be positive");
  const Boundary bc = parse_boundary(bc_text);

  std::vector<std::int8_t> spins;
  spins.reserve(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    if (!std::getline(in, line)) fail(ErrorKind::ParseError, "missing row " + std::to_string(y));
    int count = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c == '+') {
        spins.push_back(1);
      } else if (c == '-') {
        spins.push_back(-1);
      } else if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < line.size() &&
                 static_cast<unsigned char>(line[i + 1]) == 0x88 &&
                 static_cast<unsigned char>(line[i + 2]) == 0x92) {
        spins.push_back(-1);  // U+2212 MINUS SIGN
        i += 2;
      } else if (c == '\r' || c == ' ' || c == '\t') {
        continue;
      } else {
        fail(ErrorKind::ParseError, "unexpected character in row " + std::to_string(y));
      }
      ++count;
    }
    if (count != side) {
      fail(ErrorKind::ShapeMismatch, "row " + std::to_string(y) + " has " +
                                         std::to_string(count) + " spins, expected " +
                                         std::to_string(side));
    }
  }
  return {SpinConfig(side, std::move(spins)), bc};
}

void write_spin_config(std::ostream& out, const SpinConfig& config, Boundary bc) {
  out << config.side() << ' ' << to_string(bc) << '\n';
  for (int y = 0; y < config.side(); ++y) {
    for (int x = 0; x < config.side(); ++x) out << (config.at(x, y) > 0 ? '+' : '-');
    out << '\n';
  }
}

}  // namespace pbcising
