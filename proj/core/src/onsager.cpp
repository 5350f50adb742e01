#include "pbcising/onsager.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pbcising/error.hpp"
#include "pbcising/parallel.hpp"

namespace pbcising::onsager {

CriticalPoint critical_coupling() {
  const double kc = std::log1p(std::sqrt(2.0)) / 2.0;
  return {kc, 1.0 / kc};
}

double free_energy_on_grid(double K, int n) {
  const double h = M_PI / n;
  std::vector<double> cosines(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cosines[i] = std::cos((i + 0.5) * h);
  const double c2 = std::cosh(2.0 * K);
  const double a = c2 * c2;
  const double b = std::sinh(2.0 * K);

  // The integrand is symmetric in (t1, t2): sum the diagonal once and the
  // strict upper triangle twice. Row sums are reduced in index order.
  std::vector<double> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), 0, [&](std::size_t i) {
    const double ci = cosines[i];
    double row = std::log(a - 2.0 * b * ci);
    double upper = 0.0;
    for (std::size_t j = i + 1; j < cosines.size(); ++j) upper += std::log(a - b * (ci + cosines[j]));
    rows[i] = row + 2.0 * upper;
  });
  const double mean = std::accumulate(rows.begin(), rows.end(), 0.0) /
                      (static_cast<double>(n) * static_cast<double>(n));
  return -M_LN2 - 0.5 * mean;
}

QuadratureResult free_energy_quadrature(double K, const QuadratureSpec& spec) {
  if (!(K >= 0.0) || !std::isfinite(K)) {
    fail(ErrorKind::InvalidArgument, "free energy density needs finite K >= 0");
  }
  const double kc = critical_coupling().Kc;
  double tol = spec.tolerance;
  if (tol <= 0.0) tol = std::abs(K - kc) < kNearCriticalBand ? 1e-6 : 1e-8;

  // Near Kc the integrand develops a logarithmic corner at the origin and
  // the midpoint rule converges only algebraically; extrapolate there.
  const bool extrapolate = std::abs(K - kc) < kNearCriticalBand;
  int n = std::max(2, spec.initial_grid);
  double raw = free_energy_on_grid(K, n);
  double previous = raw;
  double err = std::numeric_limits<double>::infinity();
  bool have_previous = !extrapolate;
  while (n < spec.max_grid) {
    n *= 2;
    const double next = free_energy_on_grid(K, n);
    const double current = extrapolate ? next + (next - raw) / 3.0 : next;
    raw = next;
    if (have_previous) {
      err = std::abs(current - previous);
      if (err < tol) return {current, err, n};
    }
    previous = current;
    have_previous = true;
  }
  fail(ErrorKind::QuadratureNotConverged,
       "free energy quadrature at K = " + std::to_string(K) + " reached grid " +
           std::to_string(n) + " with error estimate " + std::to_string(err));
}

double free_energy_density(double K, const QuadratureSpec& spec) {
  return free_energy_quadrature(K, spec).value;
}

double spontaneous_magnetization(double K) {
  if (!(K >= 0.0)) fail(ErrorKind::InvalidArgument, "spontaneous magnetization needs K >= 0");
  if (K <= critical_coupling().Kc) return 0.0;
  if (std::isinf(K)) return 1.0;
  const double s = std::sinh(2.0 * K);
  return std::pow(1.0 - 1.0 / (s * s * s * s), 0.125);
}

double internal_energy_density(double K, double step) {
  if (!(K > 0.0) || !std::isfinite(K)) {
    fail(ErrorKind::InvalidArgument, "internal energy density needs finite K > 0");
  }
  const double kc = critical_coupling().Kc;
  if (std::abs(K - kc) <= 1e-12) return -std::sqrt(2.0);
  if (std::abs(K - kc) < kSingularBand) {
    fail(ErrorKind::TooCloseToSingularity,
         "K = " + std::to_string(K) + " is inside the excluded band around Kc");
  }

  // One grid for the whole stencil so the difference quotient sees a smooth
  // function of K.
  int n = 32;
  double previous = free_energy_on_grid(K, n);
  while (n < 8192) {
    const double current = free_energy_on_grid(K, 2 * n);
    n *= 2;
    if (std::abs(current - previous) < 1e-13) break;
    previous = current;
  }
  const auto central = [&](double h) {
    return (free_energy_on_grid(K + h, n) - free_energy_on_grid(K - h, n)) / (2.0 * h);
  };
  const double coarse = central(step);
  const double fine = central(step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace pbcising::onsager
