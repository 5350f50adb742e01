#include "pbcising/transfer_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "pbcising/error.hpp"
#include "pbcising/log_space.hpp"
#include "pbcising/parallel.hpp"

namespace pbcising {

void ScaledVector::renormalize() {
  const double top = *std::max_element(values.begin(), values.end());
  if (!(top > 0.0)) return;
  int exponent = 0;
  std::frexp(top, &exponent);
  if (exponent == 0) return;
  for (double& v : values) v = std::ldexp(v, -exponent);
  log_scale += exponent * M_LN2;
}

double ScaledVector::log_at(std::size_t state) const {
  return std::log(values[state]) + log_scale;
}

TransferOperator::TransferOperator(int width, double K, bool vertical_wrap, bool rescale)
    : width_(width), K_(K), rescale_(rescale) {
  const std::size_t n = std::size_t{1} << width;
  const int vertical_bonds = vertical_wrap ? width : width - 1;
  diagonal_.resize(n);
  diagonal_log_offset_ = rescale ? K * vertical_bonds : 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    int aligned = 0;
    for (int y = 0; y + 1 < width; ++y) aligned += ((c >> y) & 1U) == ((c >> (y + 1)) & 1U) ? 1 : -1;
    if (vertical_wrap) aligned += ((c >> (width - 1)) & 1U) == (c & 1U) ? 1 : -1;
    diagonal_[c] = std::exp(K * (aligned - (rescale ? vertical_bonds : 0)));
  }
  if (rescale) {
    same_ = 1.0;
    differ_ = std::exp(-2.0 * K);
    horizontal_log_offset_ = K * width;
  } else {
    same_ = std::exp(K);
    differ_ = std::exp(-K);
    horizontal_log_offset_ = 0.0;
  }
}

void TransferOperator::apply_diagonal(ScaledVector& v) const {
  for (std::size_t c = 0; c < diagonal_.size(); ++c) v.values[c] *= diagonal_[c];
  v.log_scale += diagonal_log_offset_;
  if (rescale_) v.renormalize();
}

void TransferOperator::apply_horizontal(ScaledVector& v) const {
  auto& a = v.values;
  const std::size_t n = a.size();
  for (int y = 0; y < width_; ++y) {
    const std::size_t bit = std::size_t{1} << y;
    for (std::size_t hi = 0; hi < n; hi += 2 * bit) {
      for (std::size_t c = hi; c < hi + bit; ++c) {
        const double up = a[c];
        const double down = a[c | bit];
        a[c] = same_ * up + differ_ * down;
        a[c | bit] = differ_ * up + same_ * down;
      }
    }
  }
  v.log_scale += horizontal_log_offset_;
  if (rescale_) v.renormalize();
}

double TransferOperator::log_diagonal(std::uint32_t state) const {
  return std::log(diagonal_[state]) + diagonal_log_offset_;
}

double TransferOperator::log_horizontal(std::uint32_t from, std::uint32_t to) const {
  const int differing = std::popcount(from ^ to);
  return (width_ - differing) * std::log(same_) + differing * std::log(differ_) +
         horizontal_log_offset_;
}

namespace {

void check_width(int side, Boundary bc, double K, const TransferOptions& options) {
  if (!std::isfinite(K) || K < 0.0) {
    fail(ErrorKind::InvalidArgument, "coupling K must be finite and non-negative");
  }
  if (side < 2 || (bc == Boundary::Torus && side < 3)) {
    fail(ErrorKind::SizeTooSmall, "transfer matrix width " + std::to_string(side) +
                                      " too small for " + std::string(to_string(bc)));
  }
  const int limit = std::min(options.max_width, 24);
  if (side > limit) {
    fail(ErrorKind::TooWide, "transfer matrix width " + std::to_string(side) +
                                 " exceeds guard " + std::to_string(limit));
  }
}

std::uint32_t rotate(std::uint32_t c, int width) {
  const std::uint32_t mask = (std::uint32_t{1} << width) - 1;
  return ((c << 1) | (c >> (width - 1))) & mask;
}

std::uint32_t reflect(std::uint32_t c, int width) {
  std::uint32_t out = 0;
  for (int y = 0; y < width; ++y)
    if ((c >> y) & 1U) out |= std::uint32_t{1} << (width - 1 - y);
  return out;
}

struct Orbit {
  std::uint32_t representative;
  int size;
};

// Orbits of column states under the symmetry group generated by `images`.
// Each state is listed once, through its smallest member.
template <typename Images>
std::vector<Orbit> orbits(int width, bool (*admissible)(std::uint32_t, int), Images images) {
  std::vector<Orbit> out;
  const std::uint32_t n = std::uint32_t{1} << width;
  std::vector<std::uint32_t> members;
  for (std::uint32_t c = 0; c < n; ++c) {
    if (!admissible(c, width)) continue;
    members = images(c);
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.front() == c) out.push_back({c, static_cast<int>(members.size())});
  }
  return out;
}

bool any_state(std::uint32_t, int) { return true; }

bool row_matched(std::uint32_t c, int width) {
  return (c & 1U) == ((c >> (width - 1)) & 1U);
}

double reduce_ordered(std::span<const double> terms) { return log_sum_exp(terms); }

double log_Z_open(int side, double K, const TransferOptions& options) {
  const TransferOperator op(side, K, false, options.rescale);
  ScaledVector v{std::vector<double>(op.states(), 1.0), 0.0};
  op.apply_diagonal(v);
  for (int x = 1; x < side; ++x) {
    op.apply_horizontal(v);
    op.apply_diagonal(v);
  }
  const double sum = std::accumulate(v.values.begin(), v.values.end(), 0.0);
  return std::log(sum) + v.log_scale;
}

double log_Z_torus(int side, double K, const TransferOptions& options) {
  const TransferOperator op(side, K, true, options.rescale);
  const std::uint32_t mask = (std::uint32_t{1} << side) - 1;
  const auto reps = orbits(side, any_state, [&](std::uint32_t c) {
    std::vector<std::uint32_t> imgs;
    std::uint32_t r = c;
    for (int k = 0; k < side; ++k) {
      imgs.push_back(r);
      imgs.push_back(r ^ mask);
      r = rotate(r, side);
    }
    return imgs;
  });

  std::vector<double> terms(reps.size());
  parallel_for(reps.size(), options.threads, [&](std::size_t i) {
    const auto c = reps[i].representative;
    ScaledVector v{std::vector<double>(op.states(), 0.0), 0.0};
    v.values[c] = 1.0;
    for (int x = 0; x < side; ++x) {
      op.apply_horizontal(v);
      op.apply_diagonal(v);
    }
    terms[i] = std::log(static_cast<double>(reps[i].size)) + v.log_at(c);
  });
  return reduce_ordered(terms);
}

}  // namespace

double log_Z(int side, Boundary bc, double K, const TransferOptions& options) {
  check_width(side, bc, K, options);
  return bc == Boundary::Open ? log_Z_open(side, K, options) : log_Z_torus(side, K, options);
}

double log_Q1(int side, double K, HamiltonianMode mode, const TransferOptions& options) {
  const Boundary bc = bond_set(mode);
  check_width(side, bc, K, options);
  const bool wrap = bc == Boundary::Torus;
  const TransferOperator op(side, K, wrap, options.rescale);
  const std::uint32_t mask = (std::uint32_t{1} << side) - 1;
  const auto reps = orbits(side, row_matched, [&](std::uint32_t c) {
    const auto r = reflect(c, side);
    return std::vector<std::uint32_t>{c, c ^ mask, r, r ^ mask};
  });

  std::vector<double> terms(reps.size());
  parallel_for(reps.size(), options.threads, [&](std::size_t i) {
    const auto c = reps[i].representative;
    ScaledVector v{std::vector<double>(op.states(), 0.0), 0.0};
    v.values[c] = 1.0;
    op.apply_diagonal(v);
    for (int x = 1; x < side; ++x) {
      op.apply_horizontal(v);
      for (std::uint32_t s = 0; s <= mask; ++s)
        if (!row_matched(s, side)) v.values[s] = 0.0;
      op.apply_diagonal(v);
    }
    double term = std::log(static_cast<double>(reps[i].size)) + v.log_at(c);
    // Last column equals the first, so the wrap bonds are all satisfied.
    if (wrap) term += op.log_horizontal(c, c);
    terms[i] = term;
  });
  return reduce_ordered(terms);
}

double per_site_free_energy(int side, Boundary bc, double K, const TransferOptions& options) {
  return -log_Z(side, bc, K, options) / (static_cast<double>(side) * side);
}

std::vector<DeltaFScanRow> deltaF_scan(std::span<const int> sizes, double K,
                                       const TransferOptions& options) {
  std::vector<int> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<DeltaFScanRow> rows;
  rows.reserve(sorted.size());
  for (int side : sorted) {
    DeltaFScanRow row{};
    row.side = side;
    row.K = K;
    row.logQ = log_Z(side, Boundary::Open, K, options);
    row.logQ1 = log_Q1(side, K, HamiltonianMode::OpenH, options);
    row.deltaF_total = row.logQ - row.logQ1;
    row.deltaF_per_site = row.deltaF_total / (static_cast<double>(side) * side);
    if (!(row.deltaF_per_site > 0.0)) {
      fail(ErrorKind::InvariantViolation,
           "deltaF per site not positive at L = " + std::to_string(side));
    }
    rows.push_back(row);
  }
  return rows;
}

PowerLawFit fit_decay_exponent(std::span<const DeltaFScanRow> rows, int min_side) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (r.side < min_side) continue;
    xs.push_back(std::log(static_cast<double>(r.side)));
    ys.push_back(std::log(r.deltaF_per_site));
  }
  if (xs.size() < 2) fail(ErrorKind::InvalidArgument, "power-law fit needs at least two sizes");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss += r * r;
  }
  return {-slope, intercept, std::sqrt(ss / n), static_cast<int>(xs.size())};
}

}  // namespace pbcising
