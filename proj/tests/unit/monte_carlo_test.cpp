#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "pbcising/error.hpp"
#include "pbcising/exact_enum.hpp"
#include "pbcising/monte_carlo.hpp"

using namespace pbcising;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvariantViolation;
}

bool same_series(const ObservableSeries& a, const ObservableSeries& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].energy != b.samples[i].energy ||
        a.samples[i].magnetization != b.samples[i].magnetization) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("splitmix64 streams") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(SplitMix64::derive_seed(42, i));
  CHECK(seeds.size() == 1000);
  SplitMix64 r(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  std::vector<int> hist(7);
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("metropolis acceptance") {
  CHECK(metropolis_acceptance(0.44, -8) == doctest::Approx(std::exp(-8 * 0.44)).epsilon(1e-15));
  CHECK(metropolis_acceptance(0.44, -8) == doctest::Approx(0.0296).epsilon(2e-3));
  for (int d : {-8, -4, 0, 4, 8}) CHECK(metropolis_acceptance(0.0, d) == 1.0);
  CHECK(metropolis_acceptance(1.0, 4) == 1.0);
  CHECK(metropolis_acceptance(1.0, 8) == 1.0);
}

TEST_CASE("metropolis at K = 0 accepts every proposal") {
  const Lattice lat(4, Boundary::Torus);
  auto c = SpinConfig::all_up(4);
  SplitMix64 rng(1);
  metropolis_sweep(c, lat, 0.0, rng);
  CHECK(c == SpinConfig::all_down(4));
}

TEST_CASE("wolff limits") {
  const Lattice lat(6, Boundary::Torus);
  SplitMix64 rng(5);
  auto c = SpinConfig::all_up(6);
  for (int i = 0; i < 50; ++i) CHECK(wolff_step(c, lat, 0.0, rng) == 1);
  auto up = SpinConfig::all_up(6);
  CHECK(wolff_step(up, lat, 50.0, rng) == 36);
  CHECK(up == SpinConfig::all_down(6));
  // Open boundaries: the cluster never crosses the missing seam bonds, but
  // the lattice is still connected.
  const Lattice open(5, Boundary::Open);
  auto o = SpinConfig::all_up(5);
  CHECK(wolff_step(o, open, 50.0, rng) == 25);
}

TEST_CASE("chain invariants and determinism") {
  ChainParams p;
  p.side = 6;
  p.K = 0.4;
  p.sweeps = 503;
  p.thin = 5;
  p.burn_in = 20;
  p.seed = 99;
  for (auto algo : {Algorithm::Metropolis, Algorithm::Wolff}) {
    p.algorithm = algo;
    const auto s = run_chain(p);
    CHECK(s.samples.size() == 100);
    for (const auto& x : s.samples) {
      CHECK(std::abs(x.magnetization) <= 36);
      CHECK(std::abs(x.energy) <= 72.0);
    }
    CHECK(same_series(s, run_chain(p)));
    p.seed = 100;
    CHECK_FALSE(same_series(s, run_chain(p)));
    p.seed = 99;
  }

  const auto one = run_chains(p, 4, 1);
  const auto many = run_chains(p, 4, 4);
  REQUIRE(one.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(same_series(one[i], many[i]));
    CHECK(one[i].params.seed == SplitMix64::derive_seed(99, i));
  }
  CHECK_FALSE(same_series(one[0], one[1]));
}

TEST_CASE("parameter validation") {
  ChainParams p;
  p.sweeps = 0;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidArgument);
  p.sweeps = 10;
  p.thin = 0;
  CHECK(kind_of([&] { run_chain(p); }) == ErrorKind::InvalidArgument);
  p.thin = 1;
  p.burn_in = -1;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidArgument);
  CHECK(default_burn_in(1000) == 100);
  CHECK(parse_algorithm("wolff") == Algorithm::Wolff);
  CHECK(kind_of([] { parse_algorithm("heatbath"); }) == ErrorKind::ParseError);
}

TEST_CASE("estimator edge cases") {
  std::vector<Sample> constant(400, Sample{-32.0, 16});
  const auto r = estimate(constant, 16, 0.5);
  CHECK(r.specific_heat.value == 0.0);
  CHECK(r.susceptibility.value == 0.0);
  CHECK(r.energy_per_site.error == 0.0);
  CHECK(r.binder.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  std::vector<Sample> two_point;
  for (int i = 0; i < 1000; ++i) two_point.push_back({0.0, i % 3 ? 16L : -16L});
  CHECK(estimate(two_point, 16, 0.5).binder.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  std::vector<Sample> zero(200, Sample{0.0, 0});
  CHECK(std::isnan(estimate(zero, 16, 0.5).binder.value));

  CHECK(kind_of([] {
          std::vector<Sample> few(99, Sample{0.0, 0});
          estimate(few, 4, 0.1);
        }) == ErrorKind::SeriesTooShort);
}

TEST_CASE("Gaussian magnetization gives a vanishing Binder cumulant") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal(0.0, 300.0);
  std::vector<Sample> s(1'000'000);
  for (auto& x : s) x = {0.0, std::lround(normal(gen))};
  const auto r = estimate(s, 1'000'000, 0.1);
  CHECK(std::abs(r.binder.value) < 0.01);
  CHECK(r.specific_heat.value >= 0.0);
  CHECK(r.susceptibility.value >= 0.0);
}

TEST_CASE("K = 0 chains reproduce the free-spin averages") {
  // Metropolis accepts every proposal at K = 0 and just alternates between a
  // configuration and its flip; single-site Wolff clusters are ergodic.
  const auto exact = boltzmann_averages(joint_density(4, Boundary::Torus, false), 0.0);
  ChainParams p;
  p.side = 4;
  p.K = 0.0;
  p.algorithm = Algorithm::Wolff;
  p.sweeps = 20000;
  p.seed = 17;
  const auto r = estimate(run_chain(p));
  CHECK(std::abs(r.energy_per_site.value) < 4 * r.energy_per_site.error + 1e-12);
  CHECK(std::abs(r.abs_magnetization.value - exact.abs_m) < 4 * r.abs_magnetization.error);
}

TEST_CASE("Wolff matches exact averages at L = 3") {
  for (double K : {0.3, 0.6, 1.0}) {
    const auto exact = boltzmann_averages(joint_density(3, Boundary::Torus, false), K);
    ChainParams p;
    p.side = 3;
    p.K = K;
    p.algorithm = Algorithm::Wolff;
    p.sweeps = 40000;
    p.seed = 5;
    const auto r = estimate(run_chain(p));
    CHECK(std::abs(r.energy_per_site.value - exact.energy_per_site) < 4 * r.energy_per_site.error);
    CHECK(std::abs(r.abs_magnetization.value - exact.abs_m) < 4 * r.abs_magnetization.error);
  }
}

TEST_CASE("Binder crossings") {
  std::vector<BinderCurve> curves;
  const std::vector<double> ks{0.40, 0.42, 0.44, 0.46, 0.48};
  for (int L : {8, 16, 32}) {
    BinderCurve c{L, ks, {}};
    for (double K : ks) c.U4.push_back(0.6 + 0.1 * L * (K - 0.44));
    curves.push_back(c);
  }
  const auto x = binder_tc_estimate(curves);
  CHECK(x.Kc_hat == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(x.uncertainty < 1e-12);
  CHECK(x.pair_crossings.size() == 3);

  curves[1].U4.assign(ks.size(), 0.0);
  CHECK(kind_of([&] { binder_tc_estimate(curves); }) == ErrorKind::NoCrossing);
}

TEST_CASE("Wolff and Metropolis agree at L = 16, K = 0.42") {
  ChainParams p;
  p.side = 16;
  p.K = 0.42;
  p.sweeps = 20000;
  p.seed = 4242;
  p.algorithm = Algorithm::Metropolis;
  const auto m = estimate(run_chain(p));
  p.algorithm = Algorithm::Wolff;
  const auto w = estimate(run_chain(p));
  const auto agree = [](const Estimate& a, const Estimate& b) {
    return std::abs(a.value - b.value) <= 3 * std::hypot(a.error, b.error);
  };
  CHECK(agree(m.abs_magnetization, w.abs_magnetization));
  CHECK(agree(m.energy_per_site, w.energy_per_site));
}
