#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dbrules/rule.hpp"

namespace dbrules {

// How a single period is assigned to a rule when its attractor depends on the
// initial window.
struct InitPolicy {
  enum class Kind { fixed, max_over_inits, min_over_inits, random };

  Kind kind = Kind::random;
  std::uint32_t state = 0;  // fixed
  std::uint64_t seed = 1;   // random

  static InitPolicy fixed(std::uint32_t state) { return {Kind::fixed, state, 0}; }
  static InitPolicy max_over_inits() { return {Kind::max_over_inits, 0, 0}; }
  static InitPolicy min_over_inits() { return {Kind::min_over_inits, 0, 0}; }
  // One uniformly drawn initial window per rule. The draw for a rule depends
  // only on (seed, rule), so partitioned scans agree with serial ones.
  static InitPolicy random(std::uint64_t seed) { return {Kind::random, 0, seed}; }

  // "fixed:<n>", "max", "min", "random:<seed>".
  static InitPolicy parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const InitPolicy&) const = default;
};

// Default policy. None of the deterministic policies reproduces the published
// mu = 4 period table; a random initial window per rule does, up to sampling
// noise. See README for the per-period comparison.
inline constexpr std::uint64_t kDefaultPolicySeed = 1;
inline InitPolicy default_init_policy() { return InitPolicy::random(kDefaultPolicySeed); }

struct PeriodHistogram {
  MemoryLength mu;
  InitPolicy policy;
  // One key per period 1..2^mu, zero counts included.
  std::map<std::uint32_t, std::uint64_t> counts;

  std::uint64_t total() const;
  std::string to_csv() const;
  // Horizontal text bar chart, bars scaled to `width` characters.
  std::string render_bars(std::size_t width = 60) const;
};

inline constexpr int kCensusGuardMu = 4;

struct CensusOptions {
  bool allow_large = false;  // lifts the mu <= 4 guard (mu = 5 is 2^32 rules)
  unsigned workers = 1;
};

// Throws CapacityError above the guard.
PeriodHistogram period_histogram(MemoryLength mu, InitPolicy policy, CensusOptions options = {});

// Period of one rule under a policy.
std::uint32_t rule_period(const RuleTable& rule, const InitPolicy& policy);

struct ReductionRow {
  MemoryLength mu;
  BigNat total;
  BigNat feasible;
  BigNat debruijn;
  std::string feasible_over_total;
  std::string debruijn_over_total;
  std::string debruijn_over_feasible;
};

// Exact counts and ratios, the ratios rendered as d.dddde[+-]XX.
std::vector<ReductionRow> reduction_table(const std::vector<MemoryLength>& mus);

// Ratio of two naturals in scientific notation with `significant` digits.
std::string format_ratio(const BigNat& numerator, const BigNat& denominator, int significant = 5);
// Exact below 10^15, scientific above.
std::string format_count(const BigNat& n, int significant = 5);

std::string reduction_table_csv(const std::vector<ReductionRow>& rows);
std::string reduction_table_text(const std::vector<ReductionRow>& rows);

}  // namespace dbrules
