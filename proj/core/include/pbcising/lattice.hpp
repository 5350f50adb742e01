#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace pbcising {

enum class Boundary { Open, Torus };

std::string_view to_string(Boundary bc);
Boundary parse_boundary(std::string_view text);

// Axis onto which the +/-1 spins are drawn when they are given a direction.
enum class Orientation { NormalToPlane, XParallel, YParallel };

std::string_view to_string(Orientation orientation);
Orientation parse_orientation(std::string_view text);

struct Bond {
  int a;
  int b;
};

// L x L square lattice. Sites are addressed row-major, site = x + L*y.
// Each site owns the bond to its +x and +y neighbour; under Open those are
// skipped on the far edge, under Torus they wrap modulo L.
class Lattice {
 public:
  Lattice(int side, Boundary bc);

  int side() const noexcept { return side_; }
  Boundary boundary() const noexcept { return bc_; }
  int sites() const noexcept { return side_ * side_; }
  int site(int x, int y) const noexcept { return x + side_ * y; }

  std::span<const Bond> bonds() const noexcept { return bonds_; }

  // Neighbours of a site, one entry per bond touching it.
  std::span<const int> neighbors(int site) const noexcept {
    return {adjacency_.data() + offsets_[site],
            adjacency_.data() + offsets_[site + 1]};
  }

 private:
  int side_;
  Boundary bc_;
  std::vector<Bond> bonds_;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
};

Lattice build_lattice(int side, Boundary bc);

// Closed forms for the bond multiset size: 2L(L-1) open, 2L^2 torus.
constexpr int expected_bond_count(int side, Boundary bc) {
  return bc == Boundary::Open ? 2 * side * (side - 1) : 2 * side * side;
}

// One assignment of +1 (up) / -1 (down) to every site of an L x L lattice.
class SpinConfig {
 public:
  SpinConfig(int side, std::vector<std::int8_t> spins);

  static SpinConfig uniform(int side, int value);
  static SpinConfig all_up(int side) { return uniform(side, +1); }
  static SpinConfig all_down(int side) { return uniform(side, -1); }
  static SpinConfig checkerboard(int side);
  // Bit i set means site i is down.
  static SpinConfig from_bits(int side, std::uint64_t bits);

  int side() const noexcept { return side_; }
  int sites() const noexcept { return side_ * side_; }

  int operator[](int site) const noexcept { return spins_[site]; }
  int at(int x, int y) const noexcept { return spins_[x + side_ * y]; }
  std::span<const std::int8_t> spins() const noexcept { return spins_; }

  void flip(int site) noexcept { spins_[site] = static_cast<std::int8_t>(-spins_[site]); }
  void set(int site, int value);
  SpinConfig flipped() const;

  std::uint64_t to_bits() const;

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  int side_;
  std::vector<std::int8_t> spins_;
};

// Coupling J, temperature T and Boltzmann constant k_B; K = J / (k_B T).
class CouplingParams {
 public:
  CouplingParams(double J, double T, double kB = 1.0);

  static CouplingParams reduced(double T) { return CouplingParams(1.0, T); }

  double J() const noexcept { return J_; }
  double T() const noexcept { return T_; }
  double kB() const noexcept { return kB_; }
  double K() const noexcept { return J_ / (kB_ * T_); }

 private:
  double J_;
  double T_;
  double kB_;
};

// Sum over bonds of s_i s_j.
int bond_sum(const Lattice& lattice, const SpinConfig& config);

// H = -J * sum_bonds s_i s_j.
double energy(const Lattice& lattice, const SpinConfig& config, double J = 1.0);

struct Magnetization {
  long total;      // S
  double average;  // s = S / N
};

Magnetization magnetization(const SpinConfig& config);

// True iff the first and last column agree site by site and so do the first
// and last row, i.e. the configuration is compatible with identifying
// opposite edges.
bool boundary_matched(const SpinConfig& config, int side);

struct LabeledConfig {
  SpinConfig config;
  Boundary bc;
};

// Text fixture format: a header line "L bc" followed by L rows of L
// characters, '+' for up and '-' (or U+2212) for down. Row y of the file is
// lattice row y.
LabeledConfig read_spin_config(std::istream& in);
void write_spin_config(std::ostream& out, const SpinConfig& config, Boundary bc);

}  // namespace pbcising
