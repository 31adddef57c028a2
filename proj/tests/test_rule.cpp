#include <doctest.h>

#include <random>
#include <set>
#include <string>

#include "dbrules/errors.hpp"
#include "dbrules/rule.hpp"
#include "oracles.hpp"

using namespace dbrules;

namespace {

RuleTable rule(int mu, unsigned long long n) { return RuleTable::from_decimal(MemoryLength(mu), n); }
StateWord state(int mu, const char* bits) { return StateWord::parse(MemoryLength(mu), bits); }

}  // namespace

TEST_CASE("memory length bounds") {
  CHECK_THROWS_AS(MemoryLength(0), RangeError);
  CHECK_THROWS_AS(MemoryLength(kMuMax + 1), RangeError);
  CHECK(MemoryLength(16).state_count() == 65536u);
}

TEST_CASE("rule_from_decimal") {
  CHECK(rule(3, 150).to_binary() == "10010110");
  CHECK(rule(3, 45).to_binary() == "00101101");
  CHECK(rule(1, 0).to_binary() == "00");
  CHECK(rule(4, 3825).to_binary() == "0000111011110001");
  CHECK(RuleTable::from_decimal(MemoryLength(5), 218034945).to_binary() == "00001100111111101111001100000001");
  CHECK_THROWS_AS(rule(3, 256), RangeError);
  CHECK_THROWS_AS(RuleTable::from_decimal(MemoryLength(2), BigNat(-1)), RangeError);
}

TEST_CASE("rule text forms") {
  CHECK(RuleTable::parse("00101101") == rule(3, 45));
  CHECK(RuleTable::parse("d:45", MemoryLength(3)) == rule(3, 45));
  CHECK_THROWS_AS(RuleTable::parse("d:45"), ParseError);
  CHECK_THROWS_AS(RuleTable::parse("0010110"), ParseError);
  CHECK_THROWS_AS(RuleTable::parse("0010110x"), ParseError);
  CHECK_THROWS_AS(RuleTable::parse("0011", MemoryLength(3)), ParseError);
}

TEST_CASE("positions read the 11...1 window first") {
  const RuleTable r150 = rule(3, 150);
  CHECK(r150.at(1) == true);   // 111 -> 1
  CHECK(r150.at(2) == false);  // 110 -> 0
  CHECK(r150.at(8) == false);  // 000 -> 0
  CHECK(r150.first_half_value() == 9);
  CHECK(rule(4, 3825).first_half_value() == 14);
}

TEST_CASE("apply_rule") {
  CHECK(apply_rule(rule(3, 150), state(3, "110")) == 0);
  CHECK(apply_rule(rule(3, 150), state(3, "010")) == 1);
  CHECK(apply_rule(rule(3, 45), state(3, "000")) == 1);
  CHECK_THROWS_AS(apply_rule(rule(3, 45), state(2, "00")), ArityError);
}

TEST_CASE("next_state") {
  CHECK(next_state(rule(3, 45), state(3, "000")).to_string() == "001");
  CHECK(next_state(rule(3, 45), state(3, "010")).to_string() == "101");
  CHECK(next_state(rule(3, 150), state(3, "000")).to_string() == "000");
  CHECK_THROWS_AS(next_state(rule(3, 45), state(4, "0000")), ArityError);
}

TEST_CASE("generate_sequence") {
  CHECK(to_string(generate_sequence(rule(3, 150), state(3, "010"), 9)) == "010101010");
  const RuleTable xor2 = RuleTable::from_binary("0110");
  CHECK(to_string(generate_sequence(xor2, state(2, "01"), 10)) == "0110110110");
  CHECK(to_string(generate_sequence(rule(3, 45), state(3, "000"), 8)) == "00010111");
  CHECK_THROWS_AS(generate_sequence(rule(3, 45), state(3, "000"), 2), RangeError);
}

TEST_CASE("detect_orbit") {
  CHECK(detect_orbit(rule(3, 150), state(3, "010")).period == 2);
  const OrbitReport r45 = detect_orbit(rule(3, 45), state(3, "000"));
  CHECK(r45.period == 8);
  CHECK(r45.transient_length == 0);
  CHECK(detect_orbit(RuleTable::from_binary("0110"), state(2, "01")).period == 3);
  CHECK(detect_orbit(RuleTable::from_binary("1000"), state(2, "01")).period == 1);
  // The four initial triplets shown for rule 150 have periods 1, 4, 1 and 2.
  const RuleTable r150 = rule(3, 150);
  std::multiset<std::uint32_t> periods;
  for (std::uint32_t s = 0; s < 8; ++s) periods.insert(detect_orbit(r150, StateWord{MemoryLength(3), s}).period);
  CHECK(periods.count(4) > 0);
}

TEST_CASE("total_configuration_count") {
  CHECK(total_configuration_count(MemoryLength(3)) == 2048);
  CHECK(total_configuration_count(MemoryLength(4)) == 1048576);
  CHECK(total_configuration_count(MemoryLength(1)) == 8);
}

TEST_CASE("decimal conversion agrees with the string oracle") {
  std::mt19937_64 rng(11);
  for (int mu = 2; mu <= 8; ++mu) {
    const std::uint32_t bits = 1u << mu;
    for (int i = 0; i < 1000; ++i) {
      std::string text(bits, '0');
      for (char& c : text) c = (rng() & 1) ? '1' : '0';
      const BigNat n = oracle::binary_to_decimal(text);
      const RuleTable r = RuleTable::from_decimal(MemoryLength(mu), n);
      REQUIRE(r.to_binary() == text);
      REQUIRE(r.decimal() == n);
      REQUIRE(RuleTable::from_binary(text) == r);
    }
  }
}

TEST_CASE("dynamics properties, exhaustive for mu <= 4") {
  for (int m = 1; m <= 4; ++m) {
    const MemoryLength mu(m);
    const std::uint64_t rules = std::uint64_t{1} << mu.state_count();
    for (std::uint64_t w = 0; w < rules; ++w) {
      const RuleTable r = RuleTable::from_word(mu, w);
      const std::string table = r.to_binary();
      const auto attractors = attractor_periods(r);
      for (std::uint32_t s = 0; s < mu.state_count(); ++s) {
        const StateWord init{mu, s};
        // Sliding window: the string oracle reads the table by position.
        REQUIRE(next_state(r, init).to_string() == oracle::next_window(table, init.to_string()));

        const OrbitReport orbit = detect_orbit(r, init);
        REQUIRE(orbit.period >= 1);
        REQUIRE(orbit.period <= mu.state_count());
        REQUIRE(orbit.transient_length + orbit.period <= mu.state_count());
        REQUIRE(orbit.period == attractors[s]);
        REQUIRE(orbit.emitted_cycle.size() == orbit.period);
        std::set<std::uint32_t> distinct;
        for (const StateWord& c : orbit.cycle_states) distinct.insert(c.value);
        REQUIRE(distinct.size() == orbit.period);

        // Repetition of the emitted cycle after the transient.
        const std::size_t len = orbit.transient_length + 2 * orbit.period + static_cast<std::size_t>(m);
        const SymbolSequence seq = generate_sequence(r, init, len);
        const std::size_t first = static_cast<std::size_t>(m) + orbit.transient_length;
        for (std::size_t i = 0; i < orbit.period; ++i) {
          REQUIRE(seq[first + i] == orbit.emitted_cycle[i]);
          REQUIRE(seq[first + orbit.period + i] == orbit.emitted_cycle[i]);
        }
      }
    }
  }
}

TEST_CASE("wide tables use several words") {
  const MemoryLength mu(8);
  std::string text(256, '0');
  text[0] = '1';
  text[255] = '1';
  const RuleTable r = RuleTable::from_binary(text);
  CHECK(r.words().size() == 4);
  CHECK(r.output(255));
  CHECK(r.output(0));
  CHECK(r.decimal() == (BigNat(1) << 255) + 1);
  CHECK(next_state(r, StateWord{mu, 0}).value == 1);
}
