#pragma once

namespace pbcising::onsager {

struct CriticalPoint {
  double Kc;         // ln(1 + sqrt 2) / 2
  double Tc_over_J;  // k_B T_c / J = 1 / Kc
};

CriticalPoint critical_coupling();

// Within this distance of Kc the looser default tolerance applies.
inline constexpr double kNearCriticalBand = 0.02;

struct QuadratureSpec {
  int initial_grid = 32;
  int max_grid = 8192;
  // <= 0 selects the default: 1e-8 away from Kc, 1e-6 near it.
  double tolerance = 0.0;
};

struct QuadratureResult {
  double value;
  double error_estimate;  // difference of the last two estimates
  int grid;               // points per axis on [0, pi]
};

// beta*f per site of the infinite lattice,
//   -ln 2 - 1/(8 pi^2) \int\int ln[cosh^2(2K) - sinh(2K)(cos t1 + cos t2)] dt1 dt2
// over [0, 2pi)^2, by the midpoint rule with grid doubling until successive
// estimates agree to the tolerance; within the near-critical band the
// estimates are Richardson-extrapolated. Throws QuadratureNotConverged.
QuadratureResult free_energy_quadrature(double K, const QuadratureSpec& spec = {});
double free_energy_density(double K, const QuadratureSpec& spec = {});

// Midpoint rule at a fixed grid of n points per axis on [0, pi].
double free_energy_on_grid(double K, int n);

// 0 for K <= Kc, (1 - sinh(2K)^-4)^(1/8) above.
double spontaneous_magnetization(double K);

// Half-width of the excluded band around Kc for the finite-difference energy.
inline constexpr double kSingularBand = 1e-3;

// u = d(beta f)/dK per site in units of J, by a Richardson-extrapolated
// central difference of the quadrature (step 1e-4 by default). Returns
// exactly -sqrt(2) at Kc and throws TooCloseToSingularity elsewhere inside
// the excluded band.
double internal_energy_density(double K, double step = 1e-4);

}  // namespace pbcising::onsager
