#include "pbcising/renorm.hpp"

#include <cmath>
#include <string>

#include "pbcising/error.hpp"
#include "pbcising/rng.hpp"

namespace pbcising::renorm {

namespace {

void check_rule(const BlockRule& rule) {
  if (rule.b < 2) fail(ErrorKind::InvalidArgument, "block side b must be at least 2");
}

int resolve_tie(const BlockRule& rule, std::uint64_t block_index) {
  if (!rule.tie) fail(ErrorKind::TieWithoutRule, "tied block with even b and no tie rule");
  switch (*rule.tie) {
    case TieRule::PlusWins: return 1;
    case TieRule::MinusWins: return -1;
    case TieRule::Random:
      return (SplitMix64::derive_seed(rule.tie_seed, block_index) >> 63) ? 1 : -1;
  }
  return 1;
}

}  // namespace

SpinConfig block_spin(const SpinConfig& config, const BlockRule& rule) {
  check_rule(rule);
  const int L = config.side();
  if (L % rule.b != 0) {
    fail(ErrorKind::NotDivisible, "block side " + std::to_string(rule.b) +
                                      " does not divide L = " + std::to_string(L));
  }
  const int coarse = L / rule.b;
  std::vector<std::int8_t> out(static_cast<std::size_t>(coarse) * coarse);
  for (int by = 0; by < coarse; ++by) {
    for (int bx = 0; bx < coarse; ++bx) {
      int sum = 0;
      for (int dy = 0; dy < rule.b; ++dy)
        for (int dx = 0; dx < rule.b; ++dx) sum += config.at(bx * rule.b + dx, by * rule.b + dy);
      const int index = bx + coarse * by;
      const int sign = sum > 0 ? 1 : sum < 0 ? -1 : resolve_tie(rule, static_cast<std::uint64_t>(index));
      out[index] = static_cast<std::int8_t>(sign);
    }
  }
  return SpinConfig(coarse, std::move(out));
}

RgFlow rg_flow(const SpinConfig& config, const BlockRule& rule, Boundary bc) {
  check_rule(rule);
  int side = config.side();
  while (side > 1 && side % rule.b == 0) side /= rule.b;
  if (side != 1) {
    fail(ErrorKind::NotPowerOfB, "L = " + std::to_string(config.side()) + " is not a power of b = " +
                                     std::to_string(rule.b));
  }
  RgFlow flow;
  flow.bc = bc;
  flow.levels.push_back(config);
  flow.average_spin.push_back(magnetization(config).average);
  BlockRule level_rule = rule;
  while (flow.levels.back().side() > 1) {
    level_rule.tie_seed = SplitMix64::derive_seed(rule.tie_seed, flow.levels.size());
    flow.levels.push_back(block_spin(flow.levels.back(), level_rule));
    flow.average_spin.push_back(magnetization(flow.levels.back()).average);
  }
  return flow;
}

std::vector<LevelStats> order_amplification_report(std::span<const SpinConfig> configs,
                                                   const BlockRule& rule) {
  if (configs.empty()) fail(ErrorKind::InvalidArgument, "need at least one configuration");
  std::vector<LevelStats> stats;
  for (const auto& config : configs) {
    if (config.side() != configs.front().side()) {
      fail(ErrorKind::ShapeMismatch, "configurations differ in size");
    }
    const RgFlow flow = rg_flow(config, rule);
    if (stats.empty()) {
      for (std::size_t k = 0; k < flow.levels.size(); ++k)
        stats.push_back({static_cast<int>(k), flow.levels[k].side(), 0.0, 0.0});
    }
    for (std::size_t k = 0; k < flow.levels.size(); ++k) {
      stats[k].mean_abs_s += std::abs(flow.average_spin[k]);
      stats[k].abs_mean_s += flow.average_spin[k];
    }
  }
  const double n = static_cast<double>(configs.size());
  for (auto& s : stats) {
    s.mean_abs_s /= n;
    s.abs_mean_s = std::abs(s.abs_mean_s / n);
  }
  return stats;
}

}  // namespace pbcising::renorm
