#include "dbrules/feasibility.hpp"

#include <algorithm>
#include <bit>
#include <iterator>

#include "dbrules/errors.hpp"

namespace dbrules {

namespace {

std::uint64_t low_mask(std::uint32_t bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

void require_structure(const RuleTable& rule, const char* op) {
  if (!boundary_ok(rule) || !symmetry_ok(rule)) {
    throw StructureError(std::string(op) + " requires a boundary and complement-symmetric rule, got " +
                         rule.to_binary());
  }
}

SymbolSequence first_half(const RuleTable& rule) {
  const std::uint32_t h = rule.mu().half_size();
  SymbolSequence half(h);
  for (std::uint32_t p = 1; p <= h; ++p) half[p - 1] = rule.at(p) ? 1 : 0;
  return half;
}

int popcount(const BigNat& n) {
  std::vector<std::uint64_t> limbs;
  boost::multiprecision::export_bits(n, std::back_inserter(limbs), 64, false);
  int ones = 0;
  for (std::uint64_t w : limbs) ones += std::popcount(w);
  return ones;
}

// Position p of the first half maps to interior bit (h - 1 - p).
bool interior_pair_ok(MemoryLength mu, const ConstraintPair& pair, std::uint64_t interior) {
  const std::uint32_t h = mu.half_size();
  auto bit_at = [&](std::uint32_t p) -> Symbol {
    if (p == 1 || p == h) return 0;
    return (interior >> (h - 1 - p)) & 1u;
  };
  return !(bit_at(pair.first) == pair.forbidden_value && bit_at(pair.second) == pair.forbidden_value);
}

}  // namespace

bool FeasibilityProfile::feasible() const {
  const bool factor_ok = rule.mu().value() == 1 || evil_factor.has_value();
  return boundary_ok && symmetry_ok && factor_ok && pair_ok.value_or(true);
}

bool boundary_ok(const RuleTable& rule) {
  return !rule.output(rule.size() - 1) && rule.output(0);
}

bool symmetry_ok(const RuleTable& rule) {
  const std::uint32_t h = rule.mu().half_size();
  const auto words = rule.words();
  if (h < 64) {
    const std::uint64_t w = words.front();
    return ((w ^ (w >> h)) & low_mask(h)) == low_mask(h);
  }
  const std::size_t half_words = words.size() / 2;
  for (std::size_t i = 0; i < half_words; ++i) {
    if ((words[i] ^ words[i + half_words]) != ~std::uint64_t{0}) return false;
  }
  return true;
}

BigNat phi(MemoryLength mu) {
  if (mu.value() < 2) throw RangeError("phi is defined for memory >= 2");
  if (mu.value() == 2) return 1;
  return (BigNat(1) << mu.half_size()) - 1;
}

bool is_evil_odd(const BigNat& n) {
  if (n <= 0 || !boost::multiprecision::bit_test(n, 0)) return false;
  return popcount(n) % 2 == 0;
}

std::optional<Factorization> factorize_rule(const RuleTable& rule) {
  require_structure(rule, "factorize_rule");
  const MemoryLength mu = rule.mu();
  if (mu.value() == 1) return std::nullopt;
  if (mu.value() == 2) return Factorization{rule.decimal(), phi(mu)};
  BigNat factor = rule.first_half_value() + 1;
  if (!is_evil_odd(factor)) return std::nullopt;
  return Factorization{std::move(factor), phi(mu)};
}

std::optional<ConstraintPair> constrained_pair(MemoryLength mu) {
  if (mu.value() < 2) return std::nullopt;
  std::uint32_t first = 1;
  std::uint32_t second = 2;
  bool conjectured = false;
  for (int m = 3; m <= mu.value(); ++m) {
    first = second;
    if (m % 2 == 1) {
      second = 2 * first - 1;
    } else {
      second = 2 * first;
      conjectured = conjectured || (m % 4 == 2);
    }
  }
  const Symbol forbidden = mu.value() % 2 == 0 ? 1 : 0;
  return ConstraintPair{mu, first, second, forbidden, conjectured};
}

bool pair_ok(const RuleTable& rule) {
  const auto pair = constrained_pair(rule.mu());
  if (!pair) return true;
  const bool v = pair->forbidden_value != 0;
  return !(rule.at(pair->first) == v && rule.at(pair->second) == v);
}

RuleTable mirror_rule(const RuleTable& rule) {
  require_structure(rule, "mirror_rule");
  SymbolSequence half = first_half(rule);
  if (half.size() > 2) std::reverse(half.begin() + 1, half.end() - 1);
  return RuleTable::from_first_half(rule.mu(), half);
}

FeasibilityProfile is_feasible(const RuleTable& rule) {
  FeasibilityProfile profile{rule, false, false, std::nullopt, std::nullopt, std::nullopt};
  profile.boundary_ok = boundary_ok(rule);
  profile.symmetry_ok = symmetry_ok(rule);
  if (rule.mu().value() >= 2) {
    profile.phi = phi(rule.mu());
    profile.pair_ok = pair_ok(rule);
  }
  if (profile.boundary_ok && profile.symmetry_ok) {
    if (auto f = factorize_rule(rule)) profile.evil_factor = std::move(f->evil_factor);
  }
  return profile;
}

BigNat count_feasible(MemoryLength mu) {
  switch (mu.value()) {
    case 1:
    case 2:
      return 1;
    case 3:
      // The pair and parity filters overlap here, so the closed form does not apply.
      return 2;
    default:
      return BigNat(3) << (mu.half_size() - 5);
  }
}

std::uint32_t interior_bit_count(MemoryLength mu) {
  return mu.half_size() >= 2 ? mu.half_size() - 2 : 0;
}

RuleTable rule_from_interior(MemoryLength mu, std::uint64_t interior) {
  const std::uint32_t free_bits = interior_bit_count(mu);
  if (free_bits > 62) throw CapacityError("interior of memory " + std::to_string(mu.value()) + " exceeds 64 bits");
  if ((interior & ~low_mask(free_bits)) != 0) throw RangeError("interior index out of range");
  const std::uint32_t h = mu.half_size();
  const std::uint64_t upper = mu.value() >= 2 ? interior << 1 : 0;
  if (h < 64) {
    const std::uint64_t word = (upper << h) | (~upper & low_mask(h));
    return RuleTable::from_word(mu, word);
  }
  // mu = 7: one word per half.
  SymbolSequence half(h, 0);
  for (std::uint32_t p = 2; p < h; ++p) half[p - 1] = (interior >> (h - 1 - p)) & 1u;
  return RuleTable::from_first_half(mu, half);
}

FeasibleEnumerator::FeasibleEnumerator(MemoryLength mu, EnumerationOptions options) : mu_(mu) {
  if (mu.value() > kEnumerationGuardMu && !options.allow_large) {
    throw CapacityError("enumerating the feasible set for memory " + std::to_string(mu.value()) +
                        " needs an explicit override (limit " + std::to_string(kEnumerationGuardMu) + ")");
  }
  const std::uint32_t free_bits = interior_bit_count(mu);
  if (free_bits > 62) {
    throw CapacityError("feasible set for memory " + std::to_string(mu.value()) + " cannot be enumerated");
  }
  space_end_ = std::uint64_t{1} << free_bits;
  cursor_ = options.start;
  stop_ = options.end.value_or(space_end_);
  if (cursor_ > stop_ || stop_ > space_end_) {
    throw RangeError("enumeration range [" + std::to_string(cursor_) + ", " + std::to_string(stop_) +
                     ") outside [0, " + std::to_string(space_end_) + ")");
  }
}

std::optional<RuleTable> FeasibleEnumerator::next() {
  const auto pair = constrained_pair(mu_);
  while (cursor_ < stop_) {
    const std::uint64_t interior = cursor_++;
    if (mu_.value() <= 2) {
      RuleTable rule = rule_from_interior(mu_, interior);
      if (is_feasible(rule).feasible()) return rule;
      continue;
    }
    if (std::popcount(interior) % 2 == 0) continue;
    if (!interior_pair_ok(mu_, *pair, interior)) continue;
    return rule_from_interior(mu_, interior);
  }
  return std::nullopt;
}

std::vector<RuleTable> enumerate_feasible(MemoryLength mu, EnumerationOptions options) {
  FeasibleEnumerator it(mu, options);
  std::vector<RuleTable> out;
  while (auto rule = it.next()) out.push_back(std::move(*rule));
  return out;
}

FeasibleSampler::FeasibleSampler(MemoryLength mu, std::uint64_t seed, SamplerOptions options)
    : mu_(mu), rng_(seed), options_(options) {}

RuleTable FeasibleSampler::next() {
  if (mu_.value() <= 2) return enumerate_feasible(mu_).front();
  const std::uint32_t free_bits = interior_bit_count(mu_);
  if (free_bits <= 62) {
    const auto pair = constrained_pair(mu_);
    for (;;) {
      const std::uint64_t interior = rng_() & low_mask(free_bits);
      if (std::popcount(interior) % 2 == 0) continue;
      if (options_.apply_pair && !interior_pair_ok(mu_, *pair, interior)) continue;
      return rule_from_interior(mu_, interior);
    }
  }
  const std::uint32_t h = mu_.half_size();
  SymbolSequence half(h, 0);
  for (;;) {
    int ones = 0;
    std::uint64_t word = 0;
    for (std::uint32_t i = 0; i < free_bits; ++i) {
      if (i % 64 == 0) word = rng_();
      const Symbol b = (word >> (i % 64)) & 1u;
      half[1 + i] = b;
      ones += b;
    }
    if (ones % 2 == 0) continue;
    RuleTable rule = RuleTable::from_first_half(mu_, half);
    if (options_.apply_pair && !pair_ok(rule)) continue;
    return rule;
  }
}

std::vector<RuleTable> sample_feasible(MemoryLength mu, std::uint64_t seed, std::size_t n) {
  FeasibleSampler sampler(mu, seed);
  std::vector<RuleTable> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

}  // namespace dbrules
