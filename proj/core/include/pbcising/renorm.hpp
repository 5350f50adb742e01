#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pbcising/lattice.hpp"

namespace pbcising::renorm {

enum class TieRule { PlusWins, MinusWins, Random };

// Majority rule on b x b blocks. The tie rule only matters for even b.
struct BlockRule {
  int b = 3;
  std::optional<TieRule> tie;
  std::uint64_t tie_seed = 0;  // used by TieRule::Random
};

// Each b x b block becomes the sign of its spin sum. Throws NotDivisible if
// b does not divide L, TieWithoutRule on a tied block with no tie rule.
SpinConfig block_spin(const SpinConfig& config, const BlockRule& rule);

struct RgFlow {
  std::vector<SpinConfig> levels;   // sides L, L/b, ..., 1
  std::vector<double> average_spin; // s at each level
  Boundary bc = Boundary::Torus;    // of the source configuration

  int steps() const { return static_cast<int>(levels.size()) - 1; }
};

// Blocks repeatedly down to a single site. Throws NotPowerOfB unless L = b^k.
RgFlow rg_flow(const SpinConfig& config, const BlockRule& rule, Boundary bc = Boundary::Torus);

struct LevelStats {
  int level;
  int side;
  double mean_abs_s;  // mean over configurations of |s|
  double abs_mean_s;  // |mean over configurations of s|
};

// Per-level order statistics of the flows of an ensemble of configurations.
std::vector<LevelStats> order_amplification_report(std::span<const SpinConfig> configs,
                                                   const BlockRule& rule);

}  // namespace pbcising::renorm
