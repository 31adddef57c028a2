#pragma once

// Generating rules with memory mu and their shift-register dynamics.
//
// A rule maps each binary window of mu symbols to the next symbol. Its textual
// form is the 2^mu-character truth table ordered from input 11...1 down to
// 00...0, which makes the big-endian value of that string the usual decimal
// rule number (rule 45 == "00101101"). Internally the table is packed with the
// output for window value v at bit v, so the packed words *are* the decimal
// number in little-endian limb order.
//
// Windows are encoded with the oldest symbol in the most significant bit, so a
// step is shift-left, drop the top bit, append the output.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace dbrules {

using BigNat = boost::multiprecision::cpp_int;

inline constexpr int kMuMax = 16;

class MemoryLength {
 public:
  // Throws RangeError unless 1 <= mu <= kMuMax.
  explicit MemoryLength(int mu);

  int value() const { return mu_; }
  // 2^mu, the number of windows and the length of a rule table.
  std::uint32_t state_count() const { return std::uint32_t{1} << mu_; }
  std::uint32_t half_size() const { return state_count() >> 1; }
  std::uint32_t state_mask() const { return state_count() - 1; }

  auto operator<=>(const MemoryLength&) const = default;

 private:
  int mu_;
};

using Symbol = std::uint8_t;
using SymbolSequence = std::vector<Symbol>;

std::string to_string(std::span<const Symbol> symbols);
// Accepts only '0'/'1'; throws ParseError otherwise.
SymbolSequence parse_symbols(std::string_view text);

struct StateWord {
  MemoryLength mu;
  std::uint32_t value;

  // Throws RangeError when value >= 2^mu.
  static StateWord make(MemoryLength mu, std::uint32_t value);
  // Exactly mu characters, oldest symbol first.
  static StateWord parse(MemoryLength mu, std::string_view bits);

  std::string to_string() const;
  SymbolSequence symbols() const;

  bool operator==(const StateWord&) const = default;
};

class RuleTable {
 public:
  // The zero rule.
  explicit RuleTable(MemoryLength mu);

  // Throws RangeError when n >= 2^(2^mu).
  static RuleTable from_decimal(MemoryLength mu, const BigNat& n);
  // Truth table in position order (11...1 first). The length must be 2^mu.
  static RuleTable from_binary(MemoryLength mu, std::string_view bits);
  // Same, with mu inferred from the length.
  static RuleTable from_binary(std::string_view bits);
  // Position-ordered symbols, i.e. the characters of the binary form.
  static RuleTable from_positions(MemoryLength mu, std::span<const Symbol> bits);
  // Packed table for mu <= 6: bit v of `word` is the output for window v.
  static RuleTable from_word(MemoryLength mu, std::uint64_t word);
  // Builds the complement-symmetric rule whose first half (positions 1 ..
  // 2^(mu-1)) is `half`; the second half is its bitwise complement.
  static RuleTable from_first_half(MemoryLength mu, std::span<const Symbol> half);

  // Accepts a binary string or "d:<decimal>". A binary string must have length
  // 2^mu when mu is given; a decimal requires mu.
  static RuleTable parse(std::string_view text, std::optional<MemoryLength> mu = std::nullopt);

  MemoryLength mu() const { return mu_; }
  std::uint32_t size() const { return mu_.state_count(); }

  // R(window).
  bool output(std::uint32_t window) const {
    return (words_[window >> 6] >> (window & 63)) & 1u;
  }
  // 1-based position in the binary form; position p reads window 2^mu - p.
  bool at(std::uint32_t position) const;

  // Low 64 table bits; the whole table when mu <= 6.
  std::uint64_t low_word() const { return words_.front(); }
  std::span<const std::uint64_t> words() const { return words_; }

  BigNat decimal() const;
  std::string to_binary() const;
  // First-half value h: positions 1 .. 2^(mu-1) read as a big-endian numeral.
  BigNat first_half_value() const;

  bool operator==(const RuleTable& other) const {
    return mu_ == other.mu_ && words_ == other.words_;
  }

 private:
  RuleTable(MemoryLength mu, std::vector<std::uint64_t> words);

  MemoryLength mu_;
  std::vector<std::uint64_t> words_;
};

struct OrbitReport {
  std::uint32_t transient_length = 0;
  std::uint32_t period = 0;
  std::vector<StateWord> cycle_states;
  SymbolSequence emitted_cycle;
};

// Single update on a raw window value, no validation.
inline std::uint32_t step_state(const RuleTable& rule, std::uint32_t state) {
  return ((state << 1) & rule.mu().state_mask()) | static_cast<std::uint32_t>(rule.output(state));
}

// Throw ArityError on memory mismatch.
Symbol apply_rule(const RuleTable& rule, StateWord window);
StateWord next_state(const RuleTable& rule, StateWord state);

// The mu symbols of `init` followed by length - mu generated symbols.
// Throws RangeError when length < mu.
SymbolSequence generate_sequence(const RuleTable& rule, StateWord init, std::size_t length);

OrbitReport detect_orbit(const RuleTable& rule, StateWord init);

// Attractor period reached from every initial window, indexed by window value.
// Linear in 2^mu.
std::vector<std::uint32_t> attractor_periods(const RuleTable& rule);

// 2^(2^mu + mu): rules times initial windows.
BigNat total_configuration_count(MemoryLength mu);

}  // namespace dbrules
