#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pbcising/lattice.hpp"
#include "pbcising/rng.hpp"

namespace pbcising {

enum class Algorithm { Metropolis, Wolff };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct ChainParams {
  int side = 8;
  Boundary bc = Boundary::Torus;
  double K = 0.0;
  Algorithm algorithm = Algorithm::Wolff;
  long sweeps = 1000;  // measurement sweeps after burn-in
  long burn_in = 100;
  long thin = 1;  // sweeps between retained samples
  std::uint64_t seed = 0;

  // Throws InvalidArgument on sweeps <= 0, burn_in < 0, thin < 1 or K < 0.
  void validate() const;
};

// Burn-in defaults to 10% of the measurement sweeps.
inline long default_burn_in(long sweeps) { return sweeps / 10; }

struct Sample {
  double energy;       // H / J
  long magnetization;  // S
};

struct ObservableSeries {
  ChainParams params;
  std::vector<Sample> samples;
  double mean_cluster_size = 0.0;  // Wolff only
};

// Metropolis acceptance probability for a flip that changes the bond sum by
// delta_bond_sum, min(1, exp(K * delta_bond_sum)).
double metropolis_acceptance(double K, int delta_bond_sum);

// One pass of single-spin Metropolis proposals over every site in raster
// order, starting from a uniformly drawn site.
void metropolis_sweep(SpinConfig& config, const Lattice& lattice, double K, SplitMix64& rng);

// Grows one Wolff cluster from a uniform seed site, adding aligned
// neighbours with probability 1 - exp(-2K), flips it and returns its size.
int wolff_step(SpinConfig& config, const Lattice& lattice, double K, SplitMix64& rng);

// Cold (all-up) start above Kc, uniform random start at or below.
SpinConfig initial_config(int side, double K, SplitMix64& rng);

inline constexpr long kMinWolffCalibration = 10;

// Metropolis: one sweep is N proposals. Wolff: burn-in sweeps (at least
// kMinWolffCalibration of them) flip clusters until N sites have turned and
// measure the mean cluster size; each measurement sweep then flips a random,
// configuration-independent number of clusters averaging N / mean size.
ObservableSeries run_chain(const ChainParams& params);

// Same chain, but keeps the retained configurations instead of observables.
std::vector<SpinConfig> run_chain_snapshots(const ChainParams& params);

// `chains` independent chains; chain i uses the stream (seed, i) and its
// series carries that derived seed. Results are ordered by chain index.
std::vector<ObservableSeries> run_chains(const ChainParams& params, int chains,
                                         unsigned threads = 0);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct EstimateReport {
  Estimate energy_per_site;
  Estimate specific_heat;  // K^2 (<E^2> - <E>^2) / N
  Estimate abs_magnetization;
  Estimate susceptibility;  // K (<M^2> - <|M|>^2) / N
  Estimate binder;          // 1 - <m^4> / (3 <m^2>^2)
  double signed_magnetization = 0.0;
  double tau_energy = 0.5;  // integrated autocorrelation times, in samples
  double tau_abs_magnetization = 0.5;
  long samples = 0;
};

inline constexpr int kJackknifeBlocks = 20;
inline constexpr long kMinSeriesLength = 100;

// Errors from a jackknife over 20 contiguous blocks. Throws SeriesTooShort
// below 100 samples. The Binder cumulant is NaN when <m^2> = 0.
EstimateReport estimate(const ObservableSeries& series);
EstimateReport estimate(std::span<const Sample> samples, int sites, double K);

struct BinderCurve {
  int side;
  std::vector<double> K;  // ascending
  std::vector<double> U4;
};

struct BinderCrossing {
  double Kc_hat;
  double uncertainty;  // max - min of the pairwise crossings
  std::vector<double> pair_crossings;
};

// Pairwise crossings of piecewise-linear U4 curves on their common K range.
// A pair with several sign changes contributes the mean of its roots.
// Throws NoCrossing if any pair has no crossing in range.
BinderCrossing binder_tc_estimate(std::span<const BinderCurve> curves);

}  // namespace pbcising
