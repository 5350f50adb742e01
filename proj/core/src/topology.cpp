#include "pbcising/topology.hpp"

#include <cmath>

#include "pbcising/error.hpp"

namespace pbcising::topology {

std::vector<Step> parse_steps(std::string_view text) {
  std::vector<Step> steps;
  steps.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'R': steps.push_back(Step::PlusX); break;
      case 'L': steps.push_back(Step::MinusX); break;
      case 'U': steps.push_back(Step::PlusY); break;
      case 'D': steps.push_back(Step::MinusY); break;
      default:
        fail(ErrorKind::ParseError, std::string("unknown loop step '") + c + "' (use R/L/U/D)");
    }
  }
  return steps;
}

std::string format_steps(const std::vector<Step>& steps) {
  std::string out;
  out.reserve(steps.size());
  for (auto s : steps) out.push_back("RLUD"[static_cast<int>(s)]);
  return out;
}

namespace {

std::pair<long, long> displacement(const std::vector<Step>& steps) {
  long dx = 0;
  long dy = 0;
  for (auto s : steps) {
    switch (s) {
      case Step::PlusX: ++dx; break;
      case Step::MinusX: --dx; break;
      case Step::PlusY: ++dy; break;
      case Step::MinusY: --dy; break;
    }
  }
  return {dx, dy};
}

long wrap(long v, int side) { return ((v % side) + side) % side; }

}  // namespace

WindingPair loop_class(const LatticeLoop& loop, int side) {
  if (side < 1) fail(ErrorKind::InvalidArgument, "torus side must be positive");
  const auto [dx, dy] = displacement(loop.steps);
  if (dx % side != 0 || dy % side != 0) {
    fail(ErrorKind::NotClosed, "loop displacement (" + std::to_string(dx) + ", " +
                                   std::to_string(dy) + ") is not a multiple of L = " +
                                   std::to_string(side));
  }
  return {dx / side, dy / side};
}

LatticeLoop compose_loops(const LatticeLoop& a, const LatticeLoop& b, int side) {
  loop_class(a, side);
  loop_class(b, side);
  if (wrap(a.x, side) != wrap(b.x, side) || wrap(a.y, side) != wrap(b.y, side)) {
    fail(ErrorKind::BasePointMismatch, "loops do not share a base point");
  }
  LatticeLoop out = a;
  out.steps.insert(out.steps.end(), b.steps.begin(), b.steps.end());
  return out;
}

LatticeLoop reverse(const LatticeLoop& loop) {
  LatticeLoop out;
  out.x = loop.x;
  out.y = loop.y;
  out.steps.reserve(loop.steps.size());
  for (auto it = loop.steps.rbegin(); it != loop.steps.rend(); ++it) {
    switch (*it) {
      case Step::PlusX: out.steps.push_back(Step::MinusX); break;
      case Step::MinusX: out.steps.push_back(Step::PlusX); break;
      case Step::PlusY: out.steps.push_back(Step::MinusY); break;
      case Step::MinusY: out.steps.push_back(Step::PlusY); break;
    }
  }
  return out;
}

TorusEmbedding::TorusEmbedding(int side, double R, double r) : side_(side), R_(R), r_(r) {
  if (side < 1) fail(ErrorKind::InvalidArgument, "embedding side must be positive");
  if (!(r > 0.0) || !(R > r)) fail(ErrorKind::InvalidArgument, "embedding needs R > r > 0");
}

Vec3 TorusEmbedding::point(int x, int y) const {
  const double phi = 2.0 * M_PI * x / side_;
  const double theta = 2.0 * M_PI * y / side_;
  const double ring = R_ + r_ * std::cos(theta);
  return {ring * std::cos(phi), ring * std::sin(phi), r_ * std::sin(theta)};
}

Vec3 TorusEmbedding::normal(int x, int y) const {
  const double phi = 2.0 * M_PI * x / side_;
  const double theta = 2.0 * M_PI * y / side_;
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), std::sin(theta)};
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

SpinField build_spin_field(const SpinConfig& config, Orientation orientation,
                           const TorusEmbedding& embedding) {
  if (config.side() != embedding.side()) {
    fail(ErrorKind::ShapeMismatch, "configuration and embedding sizes differ");
  }
  const int L = config.side();
  SpinField field{L, orientation, std::vector<Vec3>(static_cast<std::size_t>(L) * L)};
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const double s = config.at(x, y);
      Vec3 v{};
      switch (orientation) {
        case Orientation::XParallel: v = {s, 0.0, 0.0}; break;
        case Orientation::YParallel: v = {0.0, s, 0.0}; break;
        case Orientation::NormalToPlane: {
          const auto n = embedding.normal(x, y);
          v = {s * n[0], s * n[1], s * n[2]};
          break;
        }
      }
      field.vectors[x + L * y] = v;
    }
  }
  return field;
}

SpinDirection total_spin_direction(const SpinField& field, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "threshold must lie in (0, 1]");
  }
  Vec3 sum{};
  for (const auto& v : field.vectors)
    for (int k = 0; k < 3; ++k) sum[k] += v[k];
  const double length = norm(sum);
  SpinDirection out{length / static_cast<double>(field.vectors.size()), std::nullopt};
  if (out.ratio >= threshold) out.direction = Vec3{sum[0] / length, sum[1] / length, sum[2] / length};
  return out;
}

PlaneField in_plane(const SpinField& field) {
  PlaneField out;
  out.reserve(field.vectors.size());
  for (const auto& v : field.vectors) out.push_back({v[0], v[1]});
  return out;
}

int field_winding(const PlaneField& field, int side, Cycle cycle) {
  if (field.size() != static_cast<std::size_t>(side) * side) {
    fail(ErrorKind::ShapeMismatch, "field does not match lattice side");
  }
  if (cycle.index < 0 || cycle.index >= side) fail(ErrorKind::InvalidArgument, "cycle index out of range");
  const auto site = [&](int k) {
    return cycle.kind == CycleKind::XCycle ? k + side * cycle.index : cycle.index + side * k;
  };
  double total = 0.0;
  for (int k = 0; k < side; ++k) {
    const auto& a = field[site(k)];
    const auto& b = field[site((k + 1) % side)];
    if ((a[0] == 0.0 && a[1] == 0.0) || (b[0] == 0.0 && b[1] == 0.0)) {
      fail(ErrorKind::ZeroVectorOnCycle, "field vanishes on the cycle");
    }
    const double cross = a[0] * b[1] - a[1] * b[0];
    const double dot = a[0] * b[0] + a[1] * b[1];
    if (cross == 0.0 && dot < 0.0) {
      fail(ErrorKind::ZeroVectorOnCycle,
           "antiparallel neighbours on the cycle; the turning direction is ambiguous");
    }
    total += std::atan2(cross, dot);
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

int field_winding(const SpinField& field, Cycle cycle) {
  return field_winding(in_plane(field), field.side, cycle);
}

Vec3 normals_sum(const TorusEmbedding& embedding) {
  Vec3 sum{};
  for (int y = 0; y < embedding.side(); ++y) {
    for (int x = 0; x < embedding.side(); ++x) {
      const auto n = embedding.normal(x, y);
      for (int k = 0; k < 3; ++k) sum[k] += n[k];
    }
  }
  return sum;
}

}  // namespace pbcising::topology
