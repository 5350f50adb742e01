#include "pbcising/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pbcising/error.hpp"
#include "pbcising/onsager.hpp"
#include "pbcising/parallel.hpp"

namespace pbcising {

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::Metropolis ? "metropolis" : "wolff";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "metropolis" || text == "Metropolis") return Algorithm::Metropolis;
  if (text == "wolff" || text == "Wolff") return Algorithm::Wolff;
  fail(ErrorKind::ParseError, "unknown algorithm '" + std::string(text) + "'");
}

void ChainParams::validate() const {
  if (sweeps <= 0) fail(ErrorKind::InvalidArgument, "sweeps must be positive");
  if (burn_in < 0) fail(ErrorKind::InvalidArgument, "burn-in must be non-negative");
  if (thin < 1) fail(ErrorKind::InvalidArgument, "thin must be at least 1");
  if (!(K >= 0.0) || !std::isfinite(K)) {
    fail(ErrorKind::InvalidArgument, "coupling K must be finite and non-negative");
  }
}

double metropolis_acceptance(double K, int delta_bond_sum) {
  return delta_bond_sum >= 0 ? 1.0 : std::exp(K * delta_bond_sum);
}

void metropolis_sweep(SpinConfig& config, const Lattice& lattice, double K, SplitMix64& rng) {
  // delta bond sum = -2 s_i h_i with |h_i| <= 4 on the square lattice.
  std::array<double, 9> table{};
  for (int k = 0; k < 9; ++k) table[k] = metropolis_acceptance(K, 2 * (k - 4));

  // Raster order from a random starting site. A fixed start makes the sweep
  // operator reducible on small tori (e.g. 3x3), because moves that do not
  // lower the weight are taken with certainty.
  const int n = lattice.sites();
  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  for (int k = 0; k < n; ++k) {
    const int i = start + k < n ? start + k : start + k - n;
    int h = 0;
    for (int j : lattice.neighbors(i)) h += config[j];
    const int delta = -2 * config[i] * h;
    if (delta >= 0 || rng.uniform() < table[delta / 2 + 4]) config.flip(i);
  }
}

namespace {

class ClusterBuilder {
 public:
  explicit ClusterBuilder(int sites) : in_cluster_(static_cast<std::size_t>(sites), 0) {
    stack_.reserve(static_cast<std::size_t>(sites));
  }

  int step(SpinConfig& config, const Lattice& lattice, double add_probability, SplitMix64& rng) {
    const int seed = static_cast<int>(rng.below(static_cast<std::uint64_t>(lattice.sites())));
    const int orientation = config[seed];
    members_.clear();
    stack_.clear();
    stack_.push_back(seed);
    in_cluster_[seed] = 1;
    while (!stack_.empty()) {
      const int site = stack_.back();
      stack_.pop_back();
      members_.push_back(site);
      for (int j : lattice.neighbors(site)) {
        if (in_cluster_[j] || config[j] != orientation) continue;
        if (rng.uniform() < add_probability) {
          in_cluster_[j] = 1;
          stack_.push_back(j);
        }
      }
    }
    for (int site : members_) {
      config.flip(site);
      in_cluster_[site] = 0;
    }
    return static_cast<int>(members_.size());
  }

 private:
  std::vector<char> in_cluster_;
  std::vector<int> stack_;
  std::vector<int> members_;
};

double wolff_add_probability(double K) { return -std::expm1(-2.0 * K); }

// Drives one chain and hands each retained configuration to `record`.
template <typename Record>
double drive_chain(const ChainParams& params, Record&& record) {
  params.validate();
  const Lattice lattice(params.side, params.bc);
  SplitMix64 rng(params.seed);
  SpinConfig config = initial_config(params.side, params.K, rng);
  ClusterBuilder clusters(lattice.sites());
  const double p_add = wolff_add_probability(params.K);
  long cluster_steps = 0;
  long cluster_sites = 0;

  // Wolff: during burn-in a sweep flips clusters until N sites have turned.
  // That stopping rule depends on the path, so measurement sweeps instead
  // use a fixed number of clusters calibrated on the burn-in.
  double clusters_per_sweep = 0.0;
  const auto sweep = [&] {
    if (params.algorithm == Algorithm::Metropolis) {
      metropolis_sweep(config, lattice, params.K, rng);
      return;
    }
    if (clusters_per_sweep > 0.0) {
      // The count is drawn independently of the configuration with mean
      // clusters_per_sweep; the +-1 jitter keeps single-site clusters (K = 0)
      // from locking the parity of the down-spin count.
      const double whole = std::floor(clusters_per_sweep);
      long count = static_cast<long>(whole) + (rng.uniform() < clusters_per_sweep - whole);
      count += (rng() >> 63) ? 1 : 0;
      count -= (rng() >> 63) ? 1 : 0;
      count = std::max(1L, count);
      for (long c = 0; c < count; ++c) {
        cluster_sites += clusters.step(config, lattice, p_add, rng);
        ++cluster_steps;
      }
      return;
    }
    int flipped = 0;
    while (flipped < lattice.sites()) {
      const int size = clusters.step(config, lattice, p_add, rng);
      flipped += size;
      ++cluster_steps;
      cluster_sites += size;
    }
  };

  const long warmup = params.algorithm == Algorithm::Wolff ? std::max(params.burn_in, kMinWolffCalibration)
                                                           : params.burn_in;
  for (long s = 0; s < warmup; ++s) sweep();
  if (params.algorithm == Algorithm::Wolff) {
    const double mean = static_cast<double>(cluster_sites) / static_cast<double>(cluster_steps);
    clusters_per_sweep = std::max(1.0, lattice.sites() / mean);
  }
  cluster_steps = 0;
  cluster_sites = 0;
  for (long s = 1; s <= params.sweeps; ++s) {
    sweep();
    if (s % params.thin == 0) record(lattice, config);
  }
  return cluster_steps > 0 ? static_cast<double>(cluster_sites) / cluster_steps : 0.0;
}

}  // namespace

int wolff_step(SpinConfig& config, const Lattice& lattice, double K, SplitMix64& rng) {
  ClusterBuilder builder(lattice.sites());
  return builder.step(config, lattice, wolff_add_probability(K), rng);
}

SpinConfig initial_config(int side, double K, SplitMix64& rng) {
  if (K > onsager::critical_coupling().Kc) return SpinConfig::all_up(side);
  std::vector<std::int8_t> spins(static_cast<std::size_t>(side) * side);
  for (auto& s : spins) s = (rng() >> 63) ? -1 : 1;
  return SpinConfig(side, std::move(spins));
}

ObservableSeries run_chain(const ChainParams& params) {
  params.validate();
  ObservableSeries series;
  series.params = params;
  series.samples.reserve(static_cast<std::size_t>(std::max(0L, params.sweeps / params.thin)));
  series.mean_cluster_size = drive_chain(params, [&](const Lattice& lattice, const SpinConfig& c) {
    series.samples.push_back({-static_cast<double>(bond_sum(lattice, c)), magnetization(c).total});
  });
  return series;
}

std::vector<SpinConfig> run_chain_snapshots(const ChainParams& params) {
  std::vector<SpinConfig> out;
  drive_chain(params, [&](const Lattice&, const SpinConfig& c) { out.push_back(c); });
  return out;
}

std::vector<ObservableSeries> run_chains(const ChainParams& params, int chains, unsigned threads) {
  if (chains < 1) fail(ErrorKind::InvalidArgument, "need at least one chain");
  std::vector<ObservableSeries> out(static_cast<std::size_t>(chains));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    ChainParams p = params;
    p.seed = SplitMix64::derive_seed(params.seed, i);
    out[i] = run_chain(p);
  });
  return out;
}

namespace {

struct Moments {
  double e = 0, e2 = 0, a = 0, a2 = 0, m2 = 0, m4 = 0, m = 0;
  double count = 0;

  void add(double de, double da, double mm) {
    e += de;
    e2 += de * de;
    a += da;
    a2 += da * da;
    m2 += mm * mm;
    m4 += mm * mm * mm * mm;
    m += mm;
    count += 1;
  }
  Moments& operator+=(const Moments& o) {
    e += o.e, e2 += o.e2, a += o.a, a2 += o.a2, m2 += o.m2, m4 += o.m4, m += o.m;
    count += o.count;
    return *this;
  }
  Moments operator-(const Moments& o) const {
    Moments r = *this;
    r.e -= o.e, r.e2 -= o.e2, r.a -= o.a, r.a2 -= o.a2, r.m2 -= o.m2, r.m4 -= o.m4, r.m -= o.m;
    r.count -= o.count;
    return r;
  }
};

struct Derived {
  double energy, heat, abs_m, chi, binder;
};

// e and a are shifted by their series means, which leaves the variances
// unchanged and keeps constant series exact.
Derived derive(const Moments& mo, double e_shift, double a_shift, int sites, double K) {
  const double n = mo.count;
  const double e = mo.e / n;
  const double a = mo.a / n;
  const double var_e = std::max(0.0, mo.e2 / n - e * e);
  const double var_a = std::max(0.0, mo.a2 / n - a * a);
  const double m2 = mo.m2 / n;
  const double m4 = mo.m4 / n;
  Derived d{};
  d.energy = (e + e_shift) / sites;
  d.heat = K * K * var_e / sites;
  d.abs_m = (a + a_shift) / sites;
  // <M^2> - <|M|>^2 = Var(|M|)
  d.chi = K * var_a / sites;
  d.binder = m2 > 0.0 ? 1.0 - m4 / (3.0 * m2 * m2) : std::numeric_limits<double>::quiet_NaN();
  return d;
}

double integrated_autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (!(c0 > 0.0)) return 0.5;
  double tau = 0.5;
  // Self-consistent window W >= 6 tau.
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) ct += (x[i] - mean) * (x[i + t] - mean);
    tau += ct / (n - t) / c0;
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

}  // namespace

EstimateReport estimate(const ObservableSeries& series) {
  return estimate(series.samples, series.params.side * series.params.side, series.params.K);
}

EstimateReport estimate(std::span<const Sample> samples, int sites, double K) {
  const long n = static_cast<long>(samples.size());
  if (n < kMinSeriesLength) {
    fail(ErrorKind::SeriesTooShort, "estimate needs at least " +
                                        std::to_string(kMinSeriesLength) + " samples, got " +
                                        std::to_string(n));
  }
  std::vector<double> e(samples.size());
  std::vector<double> a(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    e[i] = samples[i].energy;
    a[i] = std::abs(static_cast<double>(samples[i].magnetization));
  }
  const double e_shift = std::accumulate(e.begin(), e.end(), 0.0) / n;
  const double a_shift = std::accumulate(a.begin(), a.end(), 0.0) / n;

  const long block = n / kJackknifeBlocks;
  std::vector<Moments> blocks(kJackknifeBlocks);
  Moments total;
  for (long i = 0; i < n; ++i) {
    Moments one;
    one.add(e[i] - e_shift, a[i] - a_shift, static_cast<double>(samples[i].magnetization));
    total += one;
    if (i < block * kJackknifeBlocks) blocks[i / block] += one;
  }
  Moments used;
  for (const auto& b : blocks) used += b;

  const Derived full = derive(total, e_shift, a_shift, sites, K);
  std::array<std::vector<double>, 5> leave_out;
  for (const auto& b : blocks) {
    const Derived d = derive(used - b, e_shift, a_shift, sites, K);
    leave_out[0].push_back(d.energy);
    leave_out[1].push_back(d.heat);
    leave_out[2].push_back(d.abs_m);
    leave_out[3].push_back(d.chi);
    leave_out[4].push_back(d.binder);
  }
  const auto jackknife_error = [](const std::vector<double>& values) {
    const double nb = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / nb;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt((nb - 1.0) / nb * ss);
  };

  EstimateReport r;
  r.samples = n;
  r.energy_per_site = {full.energy, jackknife_error(leave_out[0])};
  r.specific_heat = {full.heat, jackknife_error(leave_out[1])};
  r.abs_magnetization = {full.abs_m, jackknife_error(leave_out[2])};
  r.susceptibility = {full.chi, jackknife_error(leave_out[3])};
  r.binder = {full.binder, jackknife_error(leave_out[4])};
  r.signed_magnetization = total.m / n / sites;
  r.tau_energy = integrated_autocorrelation(e);
  r.tau_abs_magnetization = integrated_autocorrelation(a);
  return r;
}

namespace {

double interpolate(const BinderCurve& c, double k) {
  auto it = std::lower_bound(c.K.begin(), c.K.end(), k);
  if (it == c.K.end()) return c.U4.back();
  const auto hi = static_cast<std::size_t>(it - c.K.begin());
  if (c.K[hi] == k || hi == 0) return c.U4[hi];
  const std::size_t lo = hi - 1;
  const double t = (k - c.K[lo]) / (c.K[hi] - c.K[lo]);
  return c.U4[lo] + t * (c.U4[hi] - c.U4[lo]);
}

void check_curve(const BinderCurve& c) {
  if (c.K.size() != c.U4.size() || c.K.size() < 2) {
    fail(ErrorKind::InvalidArgument, "Binder curve needs matching K/U4 columns of length >= 2");
  }
  if (!std::is_sorted(c.K.begin(), c.K.end()) ||
      std::adjacent_find(c.K.begin(), c.K.end()) != c.K.end()) {
    fail(ErrorKind::InvalidArgument, "Binder curve K values must be strictly ascending");
  }
}

}  // namespace

BinderCrossing binder_tc_estimate(std::span<const BinderCurve> curves) {
  if (curves.size() < 2) fail(ErrorKind::InvalidArgument, "need at least two sizes");
  for (const auto& c : curves) check_curve(c);

  BinderCrossing out{};
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const auto& a = curves[i];
      const auto& b = curves[j];
      const double lo = std::max(a.K.front(), b.K.front());
      const double hi = std::min(a.K.back(), b.K.back());
      std::vector<double> grid;
      for (double k : a.K)
        if (k >= lo && k <= hi) grid.push_back(k);
      for (double k : b.K)
        if (k >= lo && k <= hi) grid.push_back(k);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

      std::vector<double> roots;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const double d0 = interpolate(a, grid[g]) - interpolate(b, grid[g]);
        if (d0 == 0.0) {
          roots.push_back(grid[g]);
          continue;
        }
        if (g + 1 == grid.size()) break;
        const double d1 = interpolate(a, grid[g + 1]) - interpolate(b, grid[g + 1]);
        if (d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) {
          roots.push_back(grid[g] + (grid[g + 1] - grid[g]) * d0 / (d0 - d1));
        }
      }
      if (roots.empty()) {
        fail(ErrorKind::NoCrossing, "Binder curves for L = " + std::to_string(a.side) + " and " +
                                        std::to_string(b.side) + " do not cross in range");
      }
      out.pair_crossings.push_back(std::accumulate(roots.begin(), roots.end(), 0.0) /
                                   static_cast<double>(roots.size()));
    }
  }
  const auto [mn, mx] = std::minmax_element(out.pair_crossings.begin(), out.pair_crossings.end());
  out.Kc_hat = std::accumulate(out.pair_crossings.begin(), out.pair_crossings.end(), 0.0) /
               static_cast<double>(out.pair_crossings.size());
  out.uncertainty = *mx - *mn;
  return out;
}

}  // namespace pbcising
