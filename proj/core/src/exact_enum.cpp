#include "pbcising/exact_enum.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "pbcising/error.hpp"
#include "pbcising/log_space.hpp"
#include "pbcising/parallel.hpp"

namespace pbcising {

DensityOfStates::DensityOfStates(int side, Boundary bc, bool restricted,
                                 std::map<int, std::uint64_t> counts)
    : side_(side), bc_(bc), restricted_(restricted), counts_(std::move(counts)) {}

std::uint64_t DensityOfStates::total() const {
  std::uint64_t sum = 0;
  for (const auto& [b, c] : counts_) sum += c;
  return sum;
}

double DensityOfStates::log_partition(double K) const {
  std::vector<double> terms;
  terms.reserve(counts_.size());
  for (const auto& [b, c] : counts_) {
    terms.push_back(std::log(static_cast<double>(c)) + K * static_cast<double>(b));
  }
  return log_sum_exp(terms);
}

JointDensity::JointDensity(int side, Boundary bc, bool restricted,
                           std::map<std::pair<int, int>, std::uint64_t> counts)
    : side_(side), bc_(bc), restricted_(restricted), counts_(std::move(counts)) {}

DensityOfStates JointDensity::marginal() const {
  std::map<int, std::uint64_t> counts;
  for (const auto& [key, c] : counts_) counts[key.first] += c;
  return DensityOfStates(side_, bc_, restricted_, std::move(counts));
}

namespace {

// Spins that flip together. Unrestricted: one site per group. Restricted:
// a free site of the (L-1)x(L-1) block plus its copies on the last
// column/row, so every state visited is boundary matched.
struct FlipGroups {
  std::vector<std::vector<int>> members;
  // Bonds with exactly one endpoint in the group, stored (inside, outside).
  std::vector<std::vector<std::pair<int, int>>> cut;
};

FlipGroups make_groups(const Lattice& lattice, bool restricted) {
  const int L = lattice.side();
  FlipGroups groups;
  if (!restricted) {
    for (int i = 0; i < lattice.sites(); ++i) groups.members.push_back({i});
  } else {
    for (int y = 0; y < L - 1; ++y) {
      for (int x = 0; x < L - 1; ++x) {
        std::vector<int> m{lattice.site(x, y)};
        if (x == 0) m.push_back(lattice.site(L - 1, y));
        if (y == 0) m.push_back(lattice.site(x, L - 1));
        if (x == 0 && y == 0) m.push_back(lattice.site(L - 1, L - 1));
        groups.members.push_back(std::move(m));
      }
    }
  }
  std::vector<int> owner(static_cast<std::size_t>(lattice.sites()), -1);
  for (std::size_t g = 0; g < groups.members.size(); ++g)
    for (int s : groups.members[g]) owner[s] = static_cast<int>(g);
  groups.cut.resize(groups.members.size());
  for (const auto& b : lattice.bonds()) {
    const int ga = owner[b.a];
    const int gb = owner[b.b];
    if (ga == gb) continue;
    groups.cut[ga].emplace_back(b.a, b.b);
    groups.cut[gb].emplace_back(b.b, b.a);
  }
  return groups;
}

void check_guard(int bits, const EnumerationOptions& options) {
  const int limit = std::min(options.max_bits, EnumerationOptions::kHardMaxBits);
  if (bits > limit) {
    fail(ErrorKind::TooLarge, "enumeration over 2^" + std::to_string(bits) +
                                  " states exceeds guard 2^" + std::to_string(limit));
  }
  if (bits > EnumerationOptions::kDefaultMaxBits) {
    std::clog << "warning: enumerating 2^" << bits
              << " states; expect a long runtime\n";
  }
}

JointDensity enumerate(int side, Boundary bc, bool restricted, const EnumerationOptions& options) {
  const Lattice lattice(side, bc);
  const FlipGroups groups = make_groups(lattice, restricted);
  const int bits = static_cast<int>(groups.members.size());
  check_guard(bits, options);

  const int n = lattice.sites();
  const int nb = static_cast<int>(lattice.bonds().size());
  const int s_span = 2 * n + 1;
  const std::size_t table_size = static_cast<std::size_t>(2 * nb + 1) * s_span;

  const int chunk_bits = std::min(bits, 16);
  const std::uint64_t chunk_len = std::uint64_t{1} << chunk_bits;
  const std::uint64_t chunks = std::uint64_t{1} << (bits - chunk_bits);

  std::vector<std::uint64_t> table(table_size, 0);
  std::mutex merge_mutex;

  parallel_for(chunks, options.threads, [&](std::size_t chunk) {
    std::vector<std::uint64_t> local(table_size, 0);
    std::vector<std::int8_t> spins(static_cast<std::size_t>(n), 1);
    const std::uint64_t start = chunk * chunk_len;
    const std::uint64_t gray = start ^ (start >> 1);
    for (int g = 0; g < bits; ++g) {
      if ((gray >> g) & 1U)
        for (int s : groups.members[g]) spins[s] = -1;
    }
    int b_sum = 0;
    for (const auto& b : lattice.bonds()) b_sum += spins[b.a] * spins[b.b];
    int s_sum = 0;
    for (auto s : spins) s_sum += s;

    ++local[static_cast<std::size_t>(b_sum + nb) * s_span + (s_sum + n)];
    for (std::uint64_t k = start + 1; k < start + chunk_len; ++k) {
      const int g = std::countr_zero(k);
      int delta_b = 0;
      for (const auto& [in, out] : groups.cut[g]) delta_b -= 2 * spins[in] * spins[out];
      for (int s : groups.members[g]) {
        s_sum -= 2 * spins[s];
        spins[s] = static_cast<std::int8_t>(-spins[s]);
      }
      b_sum += delta_b;
      ++local[static_cast<std::size_t>(b_sum + nb) * s_span + (s_sum + n)];
    }

    std::lock_guard lock(merge_mutex);
    for (std::size_t i = 0; i < table_size; ++i) table[i] += local[i];
  });

  std::map<std::pair<int, int>, std::uint64_t> counts;
  for (std::size_t i = 0; i < table_size; ++i) {
    if (table[i] == 0) continue;
    const int b = static_cast<int>(i / s_span) - nb;
    const int s = static_cast<int>(i % s_span) - n;
    counts[{b, s}] = table[i];
  }
  return JointDensity(side, bc, restricted, std::move(counts));
}

}  // namespace

DensityOfStates density_of_states(int side, Boundary bc, bool restricted,
                                  const EnumerationOptions& options) {
  return enumerate(side, bc, restricted, options).marginal();
}

JointDensity joint_density(int side, Boundary bc, bool restricted,
                           const EnumerationOptions& options) {
  return enumerate(side, bc, restricted, options);
}

std::string_view to_string(HamiltonianMode mode) {
  return mode == HamiltonianMode::OpenH ? "open" : "torus";
}

HamiltonianMode parse_hamiltonian_mode(std::string_view text) {
  if (text == "open" || text == "OpenH") return HamiltonianMode::OpenH;
  if (text == "torus" || text == "TorusH") return HamiltonianMode::TorusH;
  fail(ErrorKind::ParseError, "unknown hamiltonian mode '" + std::string(text) + "'");
}

PartitionSplit partition_split(int side, double K, HamiltonianMode mode,
                               const EnumerationOptions& options) {
  const Boundary bc = bond_set(mode);
  return partition_split(density_of_states(side, bc, false, options),
                         density_of_states(side, bc, true, options), K);
}

PartitionSplit partition_split(const DensityOfStates& full, const DensityOfStates& restricted,
                               double K) {
  if (full.restricted() || !restricted.restricted()) {
    fail(ErrorKind::InvalidArgument, "partition_split needs a full and a restricted density");
  }
  if (full.side() != restricted.side() || full.boundary() != restricted.boundary()) {
    fail(ErrorKind::ShapeMismatch, "densities describe different lattices");
  }
  if (!std::isfinite(K)) fail(ErrorKind::InvalidArgument, "coupling K must be finite");

  PartitionSplit split{};
  split.K = K;
  split.side = full.side();
  split.mode = full.boundary() == Boundary::Open ? HamiltonianMode::OpenH : HamiltonianMode::TorusH;
  split.logQ = full.log_partition(K);
  split.logQ1 = restricted.log_partition(K);
  split.logQ2 = log_diff_exp(split.logQ, split.logQ1);
  split.q2_representable = std::isfinite(split.logQ2);
  if (!std::isfinite(split.logQ) || !std::isfinite(split.logQ1)) {
    fail(ErrorKind::NumericalUnderflow, "log partition function is not finite");
  }
  return split;
}

FreeEnergies free_energies(const PartitionSplit& split, double T, double kB) {
  if (!(T > 0.0) || !(kB > 0.0)) fail(ErrorKind::InvalidArgument, "T and k_B must be positive");
  if (!std::isfinite(split.logQ) || !std::isfinite(split.logQ1)) {
    fail(ErrorKind::InvariantViolation, "Q and Q1 must be positive and finite");
  }
  FreeEnergies out{};
  out.T = T;
  out.F = -kB * T * split.logQ;
  out.F1 = -kB * T * split.logQ1;
  out.deltaF = kB * T * (split.logQ - split.logQ1);
  if (!(split.logQ > split.logQ1) || !(out.deltaF > 0.0)) {
    fail(ErrorKind::InvariantViolation,
         "expected Q > Q1 and deltaF > 0, got log Q - log Q1 = " +
             std::to_string(split.logQ - split.logQ1));
  }
  return out;
}

ExactAverages boltzmann_averages(const JointDensity& density, double K) {
  const double n = static_cast<double>(density.side()) * density.side();
  std::vector<double> log_w;
  log_w.reserve(density.counts().size());
  for (const auto& [key, c] : density.counts())
    log_w.push_back(std::log(static_cast<double>(c)) + K * key.first);
  const double log_z = log_sum_exp(log_w);

  ExactAverages avg{};
  std::size_t i = 0;
  for (const auto& [key, c] : density.counts()) {
    const double p = std::exp(log_w[i++] - log_z);
    const double e = -static_cast<double>(key.first);
    const double m = key.second / n;
    avg.energy_per_site += p * e / n;
    avg.energy2 += p * e * e;
    avg.abs_m += p * std::abs(m);
    avg.m2 += p * m * m;
    avg.m4 += p * m * m * m * m;
  }
  return avg;
}

void write_density(std::ostream& out, const DensityOfStates& density) {
  out << density.side() << ' ' << to_string(density.boundary()) << ' '
      << (density.restricted() ? 1 : 0) << '\n';
  for (const auto& [b, c] : density.counts()) out << b << ' ' << c << '\n';
}

DensityOfStates read_density(std::istream& in) {
  int side = 0;
  std::string bc_text;
  int restricted = 0;
  if (!(in >> side >> bc_text >> restricted)) {
    fail(ErrorKind::ParseError, "density cache: expected header 'L bc restricted'");
  }
  std::map<int, std::uint64_t> counts;
  int b = 0;
  std::uint64_t c = 0;
  while (in >> b >> c) counts[b] += c;
  if (!in.eof()) fail(ErrorKind::ParseError, "density cache: malformed 'B count' line");
  return DensityOfStates(side, parse_boundary(bc_text), restricted != 0, std::move(counts));
}

DensityOfStates cached_density_of_states(int side, Boundary bc, bool restricted,
                                         const std::filesystem::path& cache_dir,
                                         const EnumerationOptions& options) {
  std::ostringstream name;
  name << "dos_L" << side << '_' << to_string(bc) << (restricted ? "_restricted" : "_full")
       << ".txt";
  const auto path = cache_dir / name.str();
  if (std::ifstream in(path); in) {
    auto cached = read_density(in);
    if (cached.side() == side && cached.boundary() == bc && cached.restricted() == restricted) {
      return cached;
    }
  }
  auto density = density_of_states(side, bc, restricted, options);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (std::ofstream out(path); out) write_density(out, density);
  return density;
}

}  // namespace pbcising
