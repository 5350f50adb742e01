#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbcising/lattice.hpp"

namespace pbcising::topology {

enum class Step { PlusX, MinusX, PlusY, MinusY };

// Closed walk of unit steps on the L x L torus, starting at (x, y).
struct LatticeLoop {
  int x = 0;
  int y = 0;
  std::vector<Step> steps;
};

// Step string: R = +x, L = -x, U = +y, D = -y.
std::vector<Step> parse_steps(std::string_view text);
std::string format_steps(const std::vector<Step>& steps);

// Homotopy class of a closed loop: the number of times it wraps in x and y.
struct WindingPair {
  long m = 0;
  long n = 0;

  friend bool operator==(const WindingPair&, const WindingPair&) = default;
  WindingPair operator+(const WindingPair& o) const { return {m + o.m, n + o.n}; }
};

// Throws NotClosed unless the net displacement is a multiple of L in both
// directions.
WindingPair loop_class(const LatticeLoop& loop, int side);

inline bool contractible(const WindingPair& w) { return w.m == 0 && w.n == 0; }

// Concatenation at a shared base point (equal modulo L). Throws
// BasePointMismatch otherwise.
LatticeLoop compose_loops(const LatticeLoop& a, const LatticeLoop& b, int side);

// The same path walked backwards.
LatticeLoop reverse(const LatticeLoop& loop);

using Vec3 = std::array<double, 3>;

// Standard torus with major radius R and minor radius r; site (x, y) sits at
// angles (2 pi x / L, 2 pi y / L) around the major and minor circles.
class TorusEmbedding {
 public:
  TorusEmbedding(int side, double R = 2.0, double r = 1.0);

  int side() const noexcept { return side_; }
  double major_radius() const noexcept { return R_; }
  double minor_radius() const noexcept { return r_; }

  Vec3 point(int x, int y) const;
  // Outward unit normal.
  Vec3 normal(int x, int y) const;

 private:
  int side_;
  double R_;
  double r_;
};

struct SpinField {
  int side;
  Orientation orientation;
  std::vector<Vec3> vectors;  // row-major, x + L*y

  const Vec3& at(int x, int y) const { return vectors[x + side * y]; }
};

// XParallel: s_i (1,0,0); YParallel: s_i (0,1,0); NormalToPlane: s_i times
// the local torus normal.
SpinField build_spin_field(const SpinConfig& config, Orientation orientation,
                           const TorusEmbedding& embedding);

inline constexpr double kDefaultDirectionThreshold = 0.5;

struct SpinDirection {
  double ratio;                    // |sum of vectors| / N
  std::optional<Vec3> direction;   // unset when ratio < threshold
};

SpinDirection total_spin_direction(const SpinField& field,
                                   double threshold = kDefaultDirectionThreshold);

enum class CycleKind { XCycle, YCycle };

struct Cycle {
  CycleKind kind;
  int index;  // row y for XCycle, column x for YCycle
};

// In-plane field as (x, y) components, one per site, row-major.
using PlaneField = std::vector<std::array<double, 2>>;

PlaneField in_plane(const SpinField& field);

// Net turns of the field around the cycle: the sum of signed angle steps in
// (-pi, pi] divided by 2 pi. Throws ZeroVectorOnCycle if a vector on the
// cycle vanishes or two consecutive vectors are exactly antiparallel.
int field_winding(const PlaneField& field, int side, Cycle cycle);
int field_winding(const SpinField& field, Cycle cycle);

Vec3 normals_sum(const TorusEmbedding& embedding);

double norm(const Vec3& v);

}  // namespace pbcising::topology
