#pragma once

// Structural filters that every de Bruijn rule satisfies, and enumeration or
// sampling of the rules that pass all of them (the feasible set).
//
// A rule passing the boundary and complement-symmetry filters is fixed by its
// first half, which is 0, then 2^(mu-1) - 2 free interior bits, then 0. The
// remaining filters act on those interior bits only:
//   * evil parity: with h the first-half value, h + 1 must be an evil odd
//     number, i.e. the interior has an odd number of ones;
//   * constrained pair: two first-half positions may not both hold the
//     forbidden value (1 for even mu, 0 for odd mu).
// mu = 1 and mu = 2 are tabulated special cases.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dbrules/rule.hpp"

namespace dbrules {

struct ConstraintPair {
  MemoryLength mu;
  std::uint32_t first;   // 1-based position within the first half
  std::uint32_t second;  // first < second <= 2^(mu-1)
  Symbol forbidden_value;
  // Positions for mu = 2 (mod 4), mu >= 6 continue the recursion by analogy
  // rather than by a proven pattern. The mu = 6 pair is confirmed by sampling
  // in the test suite.
  bool conjectured = false;
};

struct Factorization {
  BigNat evil_factor;
  BigNat phi;
};

struct FeasibilityProfile {
  RuleTable rule;
  bool boundary_ok = false;
  bool symmetry_ok = false;
  // nullopt when the pair constraint is undefined (mu = 1).
  std::optional<bool> pair_ok;
  // Present iff the rule is boundary/symmetry valid and its factor is evil odd.
  std::optional<BigNat> evil_factor;
  // nullopt for mu = 1, where no factorization applies.
  std::optional<BigNat> phi;

  bool feasible() const;
};

bool boundary_ok(const RuleTable& rule);
bool symmetry_ok(const RuleTable& rule);

// 2^(2^(mu-1)) - 1 for mu >= 3, 1 for mu = 2. Throws RangeError for mu = 1.
BigNat phi(MemoryLength mu);

bool is_evil_odd(const BigNat& n);

// (h + 1, phi) when h + 1 is evil odd, where h is the first-half value. For
// mu = 2 the only structured rule (3) factors as 3 x 1. Throws StructureError
// unless boundary_ok and symmetry_ok hold.
std::optional<Factorization> factorize_rule(const RuleTable& rule);

// nullopt for mu = 1.
std::optional<ConstraintPair> constrained_pair(MemoryLength mu);

// False iff both constrained positions hold the forbidden value.
bool pair_ok(const RuleTable& rule);

// Reverses the interior of the first half and rebuilds the second half as its
// complement. Throws StructureError unless boundary_ok and symmetry_ok hold.
RuleTable mirror_rule(const RuleTable& rule);

FeasibilityProfile is_feasible(const RuleTable& rule);

// Closed-form size of the feasible set: 3 * 2^(2^(mu-1) - 5) for mu >= 4,
// tabulated below.
BigNat count_feasible(MemoryLength mu);

// Number of free interior bits, 2^(mu-1) - 2 (0 for mu <= 2).
std::uint32_t interior_bit_count(MemoryLength mu);

// Builds the boundary/symmetry-valid rule whose interior bits are `interior`
// (position 2 is the most significant). Requires interior_bit_count(mu) <= 64.
RuleTable rule_from_interior(MemoryLength mu, std::uint64_t interior);

struct EnumerationOptions {
  // Lifts the default mu <= 5 guard. Memories above 7 are never enumerable
  // because the interior index no longer fits in 64 bits.
  bool allow_large = false;
  // Half-open range of interior indices to scan; defaults to the whole space.
  std::uint64_t start = 0;
  std::optional<std::uint64_t> end;
};

inline constexpr int kEnumerationGuardMu = 5;

// Streams feasible rules in increasing decimal order. Disjoint index ranges
// concatenate to the full ordered stream.
class FeasibleEnumerator {
 public:
  // Throws CapacityError when mu exceeds the guard without allow_large.
  explicit FeasibleEnumerator(MemoryLength mu, EnumerationOptions options = {});

  std::optional<RuleTable> next();

  // Size of the interior index space, 2^interior_bit_count(mu).
  std::uint64_t index_end() const { return space_end_; }
  std::uint64_t position() const { return cursor_; }

 private:
  MemoryLength mu_;
  std::uint64_t cursor_;
  std::uint64_t stop_;
  std::uint64_t space_end_;
};

std::vector<RuleTable> enumerate_feasible(MemoryLength mu, EnumerationOptions options = {});

struct SamplerOptions {
  // When false, rules are drawn from the boundary+symmetry+evil set, i.e. the
  // feasible set before the pair constraint.
  bool apply_pair = true;
};

// Uniform draws from the feasible set by rejection on the interior bits.
// Deterministic for a given seed.
class FeasibleSampler {
 public:
  FeasibleSampler(MemoryLength mu, std::uint64_t seed, SamplerOptions options = {});

  RuleTable next();

 private:
  MemoryLength mu_;
  std::mt19937_64 rng_;
  SamplerOptions options_;
};

std::vector<RuleTable> sample_feasible(MemoryLength mu, std::uint64_t seed, std::size_t n);

}  // namespace dbrules
