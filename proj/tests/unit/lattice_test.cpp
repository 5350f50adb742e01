#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "pbcising/error.hpp"
#include "pbcising/lattice.hpp"
#include "pbcising/rng.hpp"

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

SpinConfig random_config(int L, SplitMix64& rng) {
  std::vector<std::int8_t> s(static_cast<std::size_t>(L) * L);
  for (auto& v : s) v = rng.below(2) ? 1 : -1;
  return SpinConfig(L, std::move(s));
}

}  // namespace

TEST_CASE("bond counts") {
  CHECK(build_lattice(2, Boundary::Open).bonds().size() == 4);
  CHECK(build_lattice(3, Boundary::Torus).bonds().size() == 18);
  CHECK(kind_of([] { build_lattice(2, Boundary::Torus); }) == ErrorKind::SizeTooSmall);
  CHECK(kind_of([] { build_lattice(1, Boundary::Open); }) == ErrorKind::SizeTooSmall);

  for (int L = 2; L <= 32; ++L) {
    CHECK(build_lattice(L, Boundary::Open).bonds().size() ==
          static_cast<std::size_t>(expected_bond_count(L, Boundary::Open)));
    if (L >= 3) {
      const Lattice t(L, Boundary::Torus);
      CHECK(t.bonds().size() == static_cast<std::size_t>(expected_bond_count(L, Boundary::Torus)));
      for (int i = 0; i < t.sites(); ++i) CHECK(t.neighbors(i).size() == 4);
    }
  }
}

TEST_CASE("energy examples") {
  const Lattice t3(3, Boundary::Torus);
  const Lattice o2(2, Boundary::Open);
  CHECK(energy(t3, SpinConfig::all_up(3)) == -18.0);
  CHECK(energy(o2, SpinConfig::all_up(2)) == -4.0);
  auto one = SpinConfig::all_up(2);
  one.flip(0);
  CHECK(energy(o2, one) == 0.0);
  CHECK(energy(o2, SpinConfig::all_up(2), 2.5) == -10.0);
  CHECK(kind_of([&] { energy(t3, SpinConfig::all_up(4)); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("magnetization examples") {
  CHECK(magnetization(SpinConfig::all_up(3)).total == 9);
  CHECK(magnetization(SpinConfig::all_up(3)).average == 1.0);
  CHECK(magnetization(SpinConfig::checkerboard(4)).total == 0);
  CHECK(magnetization(SpinConfig::all_down(2)).total == -4);
  CHECK(magnetization(SpinConfig::all_down(2)).average == -1.0);
}

TEST_CASE("boundary matching") {
  for (int L = 2; L <= 6; ++L) CHECK(boundary_matched(SpinConfig::all_up(L), L));
  auto c = SpinConfig::all_up(3);
  c.flip(0);
  CHECK_FALSE(boundary_matched(c, 3));

  int matches = 0;
  for (std::uint64_t b = 0; b < 16; ++b) matches += boundary_matched(SpinConfig::from_bits(2, b), 2);
  CHECK(matches == 2);

  // Agreement with the independent predicate on every L = 3, 4 state.
  for (int L : {3, 4}) {
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << (L * L)); ++b) {
      if (boundary_matched(SpinConfig::from_bits(L, b), L) != oracle::matched(b, L)) {
        FAIL("predicate disagrees at L=" << L << " bits=" << b);
      }
    }
  }
}

TEST_CASE("Z2 symmetry and energy bounds on random configurations") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = 3 + static_cast<int>(rng.below(10));
    const Boundary bc = rng.below(2) ? Boundary::Open : Boundary::Torus;
    const Lattice lat(L, bc);
    const auto c = random_config(L, rng);
    const double e = energy(lat, c);
    CHECK(e == energy(lat, c.flipped()));
    CHECK(boundary_matched(c, L) == boundary_matched(c.flipped(), L));
    CHECK(std::abs(e) <= static_cast<double>(lat.bonds().size()));
    CHECK(magnetization(c).total == -magnetization(c.flipped()).total);
    if (L <= 5) CHECK(bond_sum(lat, c) == oracle::bond_sum(c.to_bits(), L, bc == Boundary::Torus));
  }
}

TEST_CASE("spin configuration validation") {
  CHECK(kind_of([] { SpinConfig(2, {1, 1, 1}); }) == ErrorKind::ShapeMismatch);
  CHECK(kind_of([] { SpinConfig(2, {1, 1, 0, 1}); }) == ErrorKind::InvalidArgument);
  CHECK(SpinConfig::from_bits(3, 0b101).to_bits() == 0b101u);
  CHECK(SpinConfig::from_bits(3, 1)[0] == -1);
}

TEST_CASE("coupling parameters") {
  CHECK(CouplingParams(1.0, 2.0).K() == 0.5);
  CHECK(CouplingParams(2.0, 4.0, 0.5).K() == 1.0);
  CHECK(kind_of([] { CouplingParams(-1.0, 1.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { CouplingParams(1.0, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("configuration text format round-trips") {
  SplitMix64 rng(11);
  const auto c = random_config(5, rng);
  std::stringstream io;
  write_spin_config(io, c, Boundary::Torus);
  const auto back = read_spin_config(io);
  CHECK(back.config == c);
  CHECK(back.bc == Boundary::Torus);

  std::istringstream unicode("2 open\n+−\n-+\n");
  const auto u = read_spin_config(unicode);
  CHECK(u.config.at(1, 0) == -1);
  CHECK(u.config.at(0, 1) == -1);
  CHECK(u.bc == Boundary::Open);

  std::istringstream bad("2 torus\n++\n+x\n");
  CHECK(kind_of([&] { read_spin_config(bad); }) == ErrorKind::ParseError);
  std::istringstream short_row("3 torus\n+++\n++\n+++\n");
  CHECK(kind_of([&] { read_spin_config(short_row); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("fixtures parse") {
  std::ifstream up(PBCISING_FIXTURE_DIR "/all_up_3_torus.txt");
  REQUIRE(up);
  const auto a = read_spin_config(up);
  CHECK(a.config == SpinConfig::all_up(3));

  std::ifstream checker(PBCISING_FIXTURE_DIR "/checkerboard_9_torus.txt");
  REQUIRE(checker);
  CHECK(read_spin_config(checker).config == SpinConfig::checkerboard(9));
}
