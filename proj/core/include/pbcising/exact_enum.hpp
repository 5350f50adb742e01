#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string_view>
#include <utility>

#include "pbcising/lattice.hpp"

namespace pbcising {

struct EnumerationOptions {
  static constexpr int kDefaultMaxBits = 25;
  static constexpr int kHardMaxBits = 36;

  // Largest number of free spins scanned (2^bits states). Values above the
  // default up to kHardMaxBits are accepted with a runtime warning.
  int max_bits = kDefaultMaxBits;
  unsigned threads = 0;
};

// Number of configurations per bond sum B = sum_bonds s_i s_j. When
// `restricted` is set only boundary-matched configurations are counted.
class DensityOfStates {
 public:
  DensityOfStates(int side, Boundary bc, bool restricted, std::map<int, std::uint64_t> counts);

  int side() const noexcept { return side_; }
  Boundary boundary() const noexcept { return bc_; }
  bool restricted() const noexcept { return restricted_; }
  const std::map<int, std::uint64_t>& counts() const noexcept { return counts_; }

  std::uint64_t total() const;
  // log sum_B g(B) exp(K B)
  double log_partition(double K) const;

  friend bool operator==(const DensityOfStates&, const DensityOfStates&) = default;

 private:
  int side_;
  Boundary bc_;
  bool restricted_;
  std::map<int, std::uint64_t> counts_;
};

// Joint counts keyed by (bond sum B, total spin S).
class JointDensity {
 public:
  JointDensity(int side, Boundary bc, bool restricted,
               std::map<std::pair<int, int>, std::uint64_t> counts);

  int side() const noexcept { return side_; }
  Boundary boundary() const noexcept { return bc_; }
  bool restricted() const noexcept { return restricted_; }
  const std::map<std::pair<int, int>, std::uint64_t>& counts() const noexcept { return counts_; }

  DensityOfStates marginal() const;

 private:
  int side_;
  Boundary bc_;
  bool restricted_;
  std::map<std::pair<int, int>, std::uint64_t> counts_;
};

DensityOfStates density_of_states(int side, Boundary bc, bool restricted,
                                  const EnumerationOptions& options = {});
JointDensity joint_density(int side, Boundary bc, bool restricted,
                           const EnumerationOptions& options = {});

// Which bond set supplies the Boltzmann weights of the split.
enum class HamiltonianMode { OpenH, TorusH };

std::string_view to_string(HamiltonianMode mode);
HamiltonianMode parse_hamiltonian_mode(std::string_view text);
inline Boundary bond_set(HamiltonianMode mode) {
  return mode == HamiltonianMode::OpenH ? Boundary::Open : Boundary::Torus;
}

// Q = Q1 + Q2 in log space. Q1 sums over boundary-matched configurations,
// Q2 over the rest; all three use the same Hamiltonian.
struct PartitionSplit {
  double logQ;
  double logQ1;
  double logQ2;
  // False when Q2 underflows relative to Q; logQ2 is then -inf.
  bool q2_representable;
  double K;
  int side;
  HamiltonianMode mode;
};

PartitionSplit partition_split(int side, double K, HamiltonianMode mode,
                               const EnumerationOptions& options = {});
PartitionSplit partition_split(const DensityOfStates& full, const DensityOfStates& restricted,
                               double K);

struct FreeEnergies {
  double F;
  double F1;
  double deltaF;
  double T;
};

// F = -k_B T log Q, F1 = -k_B T log Q1, deltaF = F1 - F. Throws
// InvariantViolation unless Q > Q1 > 0 and deltaF > 0.
FreeEnergies free_energies(const PartitionSplit& split, double T, double kB = 1.0);

// Boltzmann averages at coupling K from a joint density.
struct ExactAverages {
  double energy_per_site;  // <E>/N in units of J
  double abs_m;            // <|S|/N>
  double m2;               // <(S/N)^2>
  double m4;               // <(S/N)^4>
  double energy2;          // <E^2> in units of J^2
};

ExactAverages boltzmann_averages(const JointDensity& density, double K);

// Density-of-states cache: header "L bc restricted", then "B count" lines.
void write_density(std::ostream& out, const DensityOfStates& density);
DensityOfStates read_density(std::istream& in);

// Loads (side, bc, restricted) from `cache_dir` if present, otherwise
// enumerates and stores it there.
DensityOfStates cached_density_of_states(int side, Boundary bc, bool restricted,
                                         const std::filesystem::path& cache_dir,
                                         const EnumerationOptions& options = {});

}  // namespace pbcising
