#include <doctest.h>

#include <random>
#include <set>

#include "dbrules/debruijn.hpp"
#include "dbrules/errors.hpp"
#include "dbrules/feasibility.hpp"
#include "oracles.hpp"

using namespace dbrules;

namespace {

RuleTable rule(int mu, unsigned long long n) { return RuleTable::from_decimal(MemoryLength(mu), n); }

RuleTable from_half(int mu, const char* half) { return RuleTable::from_first_half(MemoryLength(mu), parse_symbols(half)); }

// Random boundary/symmetry-valid table as a string, built without the library.
std::string random_structured(std::mt19937_64& rng, int mu) {
  const std::size_t h = std::size_t{1} << (mu - 1);
  std::string half(h, '0');
  for (std::size_t i = 1; i + 1 < h; ++i) half[i] = (rng() & 1) ? '1' : '0';
  std::string table = half;
  for (char c : half) table += c == '0' ? '1' : '0';
  return table;
}

std::set<std::string> as_strings(const std::vector<RuleTable>& rules) {
  std::set<std::string> out;
  for (const auto& r : rules) out.insert(r.to_binary());
  return out;
}

}  // namespace

TEST_CASE("boundary_ok and symmetry_ok") {
  CHECK(boundary_ok(rule(3, 45)));
  CHECK_FALSE(boundary_ok(rule(3, 150)));
  CHECK_FALSE(boundary_ok(rule(2, 0)));
  CHECK(symmetry_ok(rule(3, 45)));
  CHECK(symmetry_ok(rule(4, 765)));
  CHECK_FALSE(symmetry_ok(RuleTable::from_binary("00110011")));
}

TEST_CASE("symmetry_ok on multi-word tables") {
  std::mt19937_64 rng(5);
  for (int mu = 7; mu <= 9; ++mu) {
    std::string table = random_structured(rng, mu);
    CHECK(symmetry_ok(RuleTable::from_binary(table)));
    CHECK(boundary_ok(RuleTable::from_binary(table)));
    table[table.size() / 2 + 3] ^= 1;
    CHECK_FALSE(symmetry_ok(RuleTable::from_binary(table)));
  }
}

TEST_CASE("phi") {
  CHECK(phi(MemoryLength(3)) == 15);
  CHECK(phi(MemoryLength(4)) == 255);
  CHECK(phi(MemoryLength(5)) == 65535);
  CHECK(phi(MemoryLength(2)) == 1);
  CHECK_THROWS_AS(phi(MemoryLength(1)), RangeError);
}

TEST_CASE("is_evil_odd") {
  CHECK(is_evil_odd(3));
  CHECK(is_evil_odd(5));
  CHECK_FALSE(is_evil_odd(7));
  CHECK_FALSE(is_evil_odd(1));
  CHECK_FALSE(is_evil_odd(6));
  CHECK_FALSE(is_evil_odd(0));
  CHECK(is_evil_odd((BigNat(1) << 200) + 1));
}

TEST_CASE("factorize_rule") {
  auto f45 = factorize_rule(rule(3, 45));
  REQUIRE(f45);
  CHECK(f45->evil_factor == 3);
  CHECK(f45->phi == 15);
  auto f75 = factorize_rule(rule(3, 75));
  REQUIRE(f75);
  CHECK(f75->evil_factor == 5);
  auto f3825 = factorize_rule(rule(4, 3825));
  REQUIRE(f3825);
  CHECK(f3825->evil_factor == 15);
  CHECK(f3825->phi == 255);
  auto f3 = factorize_rule(rule(2, 3));
  REQUIRE(f3);
  CHECK(f3->evil_factor == 3);
  CHECK(f3->phi == 1);
  CHECK_FALSE(factorize_rule(from_half(3, "0110")));  // h + 1 = 7
  CHECK_THROWS_AS(factorize_rule(rule(3, 150)), StructureError);
}

TEST_CASE("factorization identity on random structured rules") {
  std::mt19937_64 rng(17);
  for (int mu = 3; mu <= 8; ++mu) {
    const BigNat full = (BigNat(1) << (1u << (mu - 1))) - 1;
    for (int i = 0; i < 10000; ++i) {
      const std::string table = random_structured(rng, mu);
      const RuleTable r = RuleTable::from_binary(table);
      const BigNat h = oracle::binary_to_decimal(table.substr(0, table.size() / 2));
      REQUIRE(r.decimal() == (h + 1) * full);
      const auto f = factorize_rule(r);
      REQUIRE(f.has_value() == is_evil_odd(h + 1));
      if (f) REQUIRE(f->evil_factor * f->phi == r.decimal());
    }
  }
}

TEST_CASE("constrained_pair") {
  const auto expect = oracle::pair_positions();
  for (const auto& [mu, positions] : expect) {
    const auto pair = constrained_pair(MemoryLength(mu));
    REQUIRE(pair);
    CHECK(pair->first == positions.first);
    CHECK(pair->second == positions.second);
    CHECK(pair->forbidden_value == (mu % 2 == 0 ? 1 : 0));
  }
  CHECK_FALSE(constrained_pair(MemoryLength(1)));
  CHECK(constrained_pair(MemoryLength(6))->conjectured);
  CHECK_FALSE(constrained_pair(MemoryLength(5))->conjectured);
  CHECK_FALSE(constrained_pair(MemoryLength(4))->conjectured);
}

TEST_CASE("pair_ok") {
  CHECK(pair_ok(rule(4, 10965)));
  CHECK(is_debruijn_rule(rule(4, 10965)));
  CHECK_FALSE(pair_ok(from_half(4, "00100110")));
  CHECK_FALSE(pair_ok(from_half(3, "0000")));
  CHECK(pair_ok(rule(1, 1)));
}

TEST_CASE("no mu = 3 de Bruijn rule has positions 2 and 3 both 0") {
  for (unsigned w = 0; w < 256; ++w) {
    const RuleTable r = RuleTable::from_word(MemoryLength(3), w);
    if (is_debruijn_rule(r)) CHECK((r.at(2) || r.at(3)));
  }
}

TEST_CASE("mirror_rule") {
  CHECK(mirror_rule(rule(3, 45)).decimal() == 75);
  CHECK(mirror_rule(rule(3, 75)).decimal() == 45);
  CHECK(mirror_rule(rule(2, 3)).decimal() == 3);
  CHECK_THROWS_AS(mirror_rule(rule(3, 150)), StructureError);

  std::mt19937_64 rng(23);
  for (int mu = 2; mu <= 8; ++mu) {
    for (int i = 0; i < 200; ++i) {
      const RuleTable r = RuleTable::from_binary(random_structured(rng, mu));
      REQUIRE(mirror_rule(mirror_rule(r)) == r);
    }
  }
}

TEST_CASE("mirror closure over de Bruijn rules") {
  for (int mu = 4; mu <= 5; ++mu) {
    std::size_t seen = 0;
    for (const RuleTable& r : enumerate_feasible(MemoryLength(mu))) {
      if (!is_debruijn_rule(r)) continue;
      ++seen;
      const RuleTable m = mirror_rule(r);
      REQUIRE(is_debruijn_rule(m));
      REQUIRE(is_feasible(m).feasible());
    }
    CHECK(seen == debruijn_count(MemoryLength(mu)));
  }
}

TEST_CASE("is_feasible") {
  const auto p45 = is_feasible(rule(3, 45));
  CHECK(p45.feasible());
  CHECK(p45.evil_factor == BigNat(3));
  CHECK(p45.phi == BigNat(15));
  CHECK(p45.pair_ok == true);
  const auto p150 = is_feasible(rule(3, 150));
  CHECK_FALSE(p150.feasible());
  CHECK_FALSE(p150.boundary_ok);
  const auto p255 = is_feasible(rule(3, 255));
  CHECK_FALSE(p255.feasible());
  CHECK_FALSE(p255.boundary_ok);
  CHECK_FALSE(p255.symmetry_ok);
  CHECK_FALSE(p255.evil_factor);
  const auto p1 = is_feasible(rule(1, 1));
  CHECK(p1.feasible());
  CHECK_FALSE(p1.phi);
  CHECK_FALSE(p1.pair_ok);
}

TEST_CASE("superset property, exhaustive for mu in 2..4") {
  for (int m = 2; m <= 4; ++m) {
    const MemoryLength mu(m);
    const std::uint64_t rules = std::uint64_t{1} << mu.state_count();
    std::uint64_t debruijn = 0;
    std::uint64_t feasible = 0;
    for (std::uint64_t w = 0; w < rules; ++w) {
      const RuleTable r = RuleTable::from_word(mu, w);
      const bool f = is_feasible(r).feasible();
      feasible += f;
      if (is_debruijn_rule(r)) {
        ++debruijn;
        REQUIRE(f);
      }
    }
    CHECK(debruijn == debruijn_count(mu));
    CHECK(feasible == count_feasible(mu));
  }
}

TEST_CASE("superset property for mu = 5") {
  const auto feasible = enumerate_feasible(MemoryLength(5));
  CHECK(feasible.size() == 6144);
  std::size_t debruijn = 0;
  for (const auto& r : feasible) debruijn += is_debruijn_rule(r);
  // Every de Bruijn rule of memory 5 is inside the enumerated set.
  CHECK(debruijn == debruijn_count(MemoryLength(5)));
}

TEST_CASE("enumeration agrees with the string oracle") {
  for (int mu = 3; mu <= 5; ++mu) {
    const std::set<std::string> listed = as_strings(enumerate_feasible(MemoryLength(mu)));
    const std::size_t h = std::size_t{1} << (mu - 1);
    std::size_t expected = 0;
    for (std::uint64_t interior = 0; interior < (std::uint64_t{1} << (h - 2)); ++interior) {
      std::string half(h, '0');
      for (std::size_t p = 2; p < h; ++p) half[p - 1] = ((interior >> (h - 1 - p)) & 1) ? '1' : '0';
      std::string table = half;
      for (char c : half) table += c == '0' ? '1' : '0';
      const bool f = oracle::feasible_by_strings(table, mu);
      expected += f;
      REQUIRE(listed.count(table) == (f ? 1u : 0u));
    }
    CHECK(listed.size() == expected);
  }
  std::mt19937_64 rng(29);
  for (int mu = 6; mu <= 8; ++mu) {
    for (int i = 0; i < 2000; ++i) {
      const std::string table = random_structured(rng, mu);
      REQUIRE(is_feasible(RuleTable::from_binary(table)).feasible() == oracle::feasible_by_strings(table, mu));
    }
  }
}

TEST_CASE("enumerate_feasible") {
  const auto three = enumerate_feasible(MemoryLength(3));
  REQUIRE(three.size() == 2);
  CHECK(three[0].decimal() == 45);
  CHECK(three[1].decimal() == 75);
  CHECK(enumerate_feasible(MemoryLength(4)).size() == 24);
  CHECK(enumerate_feasible(MemoryLength(2)).size() == 1);
  CHECK(enumerate_feasible(MemoryLength(1)).size() == 1);

  SUBCASE("increasing decimal order") {
    const auto rules = enumerate_feasible(MemoryLength(5));
    for (std::size_t i = 1; i < rules.size(); ++i) REQUIRE(rules[i - 1].decimal() < rules[i].decimal());
  }
  SUBCASE("ranges concatenate to the full stream") {
    const auto full = enumerate_feasible(MemoryLength(5));
    FeasibleEnumerator probe(MemoryLength(5));
    const std::uint64_t end = probe.index_end();
    std::vector<RuleTable> joined;
    for (std::uint64_t start = 0; start < end; start += 3001) {
      EnumerationOptions opts;
      opts.start = start;
      opts.end = std::min(end, start + 3001);
      for (auto& r : enumerate_feasible(MemoryLength(5), opts)) joined.push_back(r);
    }
    CHECK(joined == full);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(FeasibleEnumerator(MemoryLength(6)), CapacityError);
    EnumerationOptions large;
    large.allow_large = true;
    CHECK_NOTHROW(FeasibleEnumerator(MemoryLength(6), large));
    CHECK_THROWS_AS(FeasibleEnumerator(MemoryLength(8), large), CapacityError);
    EnumerationOptions bad;
    bad.start = 10;
    bad.end = 5;
    CHECK_THROWS_AS(FeasibleEnumerator(MemoryLength(4), bad), RangeError);
    bad.start = 0;
    bad.end = 1u << 20;
    CHECK_THROWS_AS(FeasibleEnumerator(MemoryLength(4), bad), RangeError);
  }
  SUBCASE("a bounded scan at mu = 7") {
    EnumerationOptions opts;
    opts.allow_large = true;
    opts.end = 4096;
    for (const auto& r : enumerate_feasible(MemoryLength(7), opts)) {
      REQUIRE(oracle::feasible_by_strings(r.to_binary(), 7));
    }
  }
}

TEST_CASE("count_feasible") {
  for (int mu = 1; mu <= 5; ++mu) {
    CHECK(count_feasible(MemoryLength(mu)) == enumerate_feasible(MemoryLength(mu)).size());
  }
  CHECK(count_feasible(MemoryLength(6)) == 402653184);
  CHECK(count_feasible(MemoryLength(7)) == BigNat(3) << 59);
  CHECK(count_feasible(MemoryLength(4)) == 24);
}

TEST_CASE("rule_from_interior") {
  CHECK(rule_from_interior(MemoryLength(3), 1).decimal() == 45);
  CHECK(rule_from_interior(MemoryLength(3), 2).decimal() == 75);
  CHECK(rule_from_interior(MemoryLength(4), 0b000111).decimal() == 3825);
  CHECK_THROWS_AS(rule_from_interior(MemoryLength(3), 4), RangeError);
  CHECK_THROWS_AS(rule_from_interior(MemoryLength(8), 0), CapacityError);
  const RuleTable r7 = rule_from_interior(MemoryLength(7), (std::uint64_t{1} << 61) | 1);
  CHECK(r7.at(2));
  CHECK(r7.at(63));
  CHECK_FALSE(r7.at(3));
  CHECK(symmetry_ok(r7));
}

TEST_CASE("sampling") {
  SUBCASE("memory 5 draws are feasible") {
    for (const auto& r : sample_feasible(MemoryLength(5), 7, 6144)) REQUIRE(is_feasible(r).feasible());
  }
  SUBCASE("memory 4 support is the enumerated set") {
    const std::set<std::string> all = as_strings(enumerate_feasible(MemoryLength(4)));
    const std::set<std::string> seen = as_strings(sample_feasible(MemoryLength(4), 7, 1000));
    for (const auto& s : seen) CHECK(all.count(s) == 1);
    CHECK(seen.size() == all.size());
  }
  SUBCASE("determinism") {
    CHECK(sample_feasible(MemoryLength(6), 42, 50) == sample_feasible(MemoryLength(6), 42, 50));
    CHECK(sample_feasible(MemoryLength(6), 42, 50) != sample_feasible(MemoryLength(6), 43, 50));
    CHECK(sample_feasible(MemoryLength(9), 42, 5) == sample_feasible(MemoryLength(9), 42, 5));
  }
  SUBCASE("wide memories") {
    for (const auto& r : sample_feasible(MemoryLength(8), 3, 200)) {
      REQUIRE(oracle::feasible_by_strings(r.to_binary(), 8));
    }
    for (const auto& r : sample_feasible(MemoryLength(9), 3, 20)) REQUIRE(is_feasible(r).feasible());
  }
  SUBCASE("memory 6 de Bruijn fraction is one sixth") {
    const std::size_t n = 200000;
    std::size_t hits = 0;
    FeasibleSampler sampler(MemoryLength(6), 11);
    for (std::size_t i = 0; i < n; ++i) {
      const RuleTable r = sampler.next();
      REQUIRE(is_feasible(r).feasible());
      hits += is_debruijn_rule(r);
    }
    CHECK(static_cast<double>(hits) / n == doctest::Approx(1.0 / 6.0).epsilon(0.03));
  }
  SUBCASE("small memories") {
    CHECK(sample_feasible(MemoryLength(2), 1, 3)[2].decimal() == 3);
    CHECK(sample_feasible(MemoryLength(1), 1, 1)[0].decimal() == 1);
  }
}

TEST_CASE("memory 6 pair positions 11 and 22, checked by sampling") {
  // Draw from the set before the pair filter and record which first-half
  // position pairs are ever jointly 1 in a de Bruijn rule.
  const MemoryLength mu(6);
  const std::uint32_t h = mu.half_size();
  SamplerOptions opts;
  opts.apply_pair = false;
  FeasibleSampler sampler(mu, 2024, opts);
  std::vector<std::vector<bool>> joint(h + 1, std::vector<bool>(h + 1, false));
  std::size_t debruijn = 0;
  std::size_t draws = 0;
  while (debruijn < 4000) {
    const RuleTable r = sampler.next();
    ++draws;
    if (!is_debruijn_rule(r)) continue;
    ++debruijn;
    for (std::uint32_t a = 2; a < h; ++a) {
      if (!r.at(a)) continue;
      for (std::uint32_t b = a + 1; b < h; ++b) {
        if (r.at(b)) joint[a][b] = true;
      }
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> never;
  for (std::uint32_t a = 2; a < h; ++a) {
    for (std::uint32_t b = a + 1; b < h; ++b) {
      if (!joint[a][b]) never.emplace_back(a, b);
    }
  }
  REQUIRE(never.size() == 1);
  CHECK(never[0] == std::make_pair(11u, 22u));
  // The pre-pair set is four thirds of the feasible set, so one draw in eight
  // is de Bruijn.
  CHECK(static_cast<double>(debruijn) / draws == doctest::Approx(0.125).epsilon(0.08));
}
