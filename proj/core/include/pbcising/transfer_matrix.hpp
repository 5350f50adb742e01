#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbcising/exact_enum.hpp"
#include "pbcising/lattice.hpp"

namespace pbcising {

struct TransferOptions {
  static constexpr int kDefaultMaxWidth = 14;

  int max_width = kDefaultMaxWidth;
  // With rescaling off, raw Boltzmann weights are multiplied directly; only
  // useful for checking the scaled path on small, representable cases.
  bool rescale = true;
  unsigned threads = 0;
};

// Vector over column states (bit y set = spin at row y is down) carrying a
// scaling ledger: the represented vector is values * exp(log_scale).
struct ScaledVector {
  std::vector<double> values;
  double log_scale = 0.0;

  // Rescales by a power of two so the largest entry lies in [1/2, 1).
  void renormalize();
  double log_at(std::size_t state) const;
};

// Column-to-column transfer operator of width L. D holds the intra-column
// (vertical bond) weights, W the inter-column (horizontal bond) weights;
// both are applied matrix-free.
class TransferOperator {
 public:
  TransferOperator(int width, double K, bool vertical_wrap, bool rescale = true);

  int width() const noexcept { return width_; }
  double K() const noexcept { return K_; }
  std::size_t states() const noexcept { return std::size_t{1} << width_; }

  // v <- D v
  void apply_diagonal(ScaledVector& v) const;
  // v <- W v, one butterfly pass per row.
  void apply_horizontal(ScaledVector& v) const;

  // log D(c) and log W(c, c') for individual entries.
  double log_diagonal(std::uint32_t state) const;
  double log_horizontal(std::uint32_t from, std::uint32_t to) const;

 private:
  int width_;
  double K_;
  bool rescale_;
  std::vector<double> diagonal_;
  double diagonal_log_offset_;
  double same_;
  double differ_;
  double horizontal_log_offset_;
};

// log Z on the full L x L lattice under bc.
double log_Z(int side, Boundary bc, double K, const TransferOptions& options = {});

// log of the restricted sum over boundary-matched configurations (first row
// equals last row, first column equals last column), weighted by the bond
// set of `mode`.
double log_Q1(int side, double K, HamiltonianMode mode = HamiltonianMode::OpenH,
              const TransferOptions& options = {});

// beta * f per site, -log Z / L^2.
double per_site_free_energy(int side, Boundary bc, double K, const TransferOptions& options = {});

struct DeltaFScanRow {
  int side;
  double K;
  double logQ;
  double logQ1;
  double deltaF_total;     // log Q - log Q1, in units of k_B T
  double deltaF_per_site;  // deltaF_total / L^2
};

// Open-Hamiltonian split at each size; rows sorted by L.
std::vector<DeltaFScanRow> deltaF_scan(std::span<const int> sizes, double K,
                                       const TransferOptions& options = {});

struct PowerLawFit {
  double exponent;   // deltaF_per_site ~ L^-exponent
  double amplitude;  // log-space intercept
  double residual;   // RMS residual of the log-log fit
  int points;
};

// Least squares on log(deltaF_per_site) versus log L over rows with L >= min_side.
PowerLawFit fit_decay_exponent(std::span<const DeltaFScanRow> rows, int min_side = 0);

}  // namespace pbcising
