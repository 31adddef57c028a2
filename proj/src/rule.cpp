#include "dbrules/rule.hpp"

#include <algorithm>
#include <bit>
#include <iterator>

#include "dbrules/errors.hpp"

namespace dbrules {

namespace {

std::size_t word_count(MemoryLength mu) {
  return (static_cast<std::size_t>(mu.state_count()) + 63) / 64;
}

std::uint64_t tail_mask(MemoryLength mu) {
  const std::uint32_t bits = mu.state_count();
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

void check_same_mu(const RuleTable& rule, MemoryLength mu) {
  if (rule.mu() != mu) {
    throw ArityError("window has memory " + std::to_string(mu.value()) + " but rule has memory " +
                     std::to_string(rule.mu().value()));
  }
}

int mu_from_length(std::size_t length) {
  if (length < 2 || !std::has_single_bit(length)) {
    throw ParseError("rule string length " + std::to_string(length) + " is not a power of two >= 2");
  }
  return std::countr_zero(length);
}

}  // namespace

MemoryLength::MemoryLength(int mu) : mu_(mu) {
  if (mu < 1 || mu > kMuMax) {
    throw RangeError("memory length " + std::to_string(mu) + " outside [1, " + std::to_string(kMuMax) + "]");
  }
}

std::string to_string(std::span<const Symbol> symbols) {
  std::string out(symbols.size(), '0');
  for (std::size_t i = 0; i < symbols.size(); ++i) out[i] = symbols[i] ? '1' : '0';
  return out;
}

SymbolSequence parse_symbols(std::string_view text) {
  SymbolSequence out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw ParseError("expected a binary string, got '" + std::string(text) + "'");
    out.push_back(static_cast<Symbol>(c - '0'));
  }
  return out;
}

StateWord StateWord::make(MemoryLength mu, std::uint32_t value) {
  if (value >= mu.state_count()) {
    throw RangeError("state " + std::to_string(value) + " does not fit in " + std::to_string(mu.value()) + " bits");
  }
  return StateWord{mu, value};
}

StateWord StateWord::parse(MemoryLength mu, std::string_view bits) {
  if (bits.size() != static_cast<std::size_t>(mu.value())) {
    throw ParseError("state '" + std::string(bits) + "' must have exactly " + std::to_string(mu.value()) + " symbols");
  }
  std::uint32_t value = 0;
  for (Symbol s : parse_symbols(bits)) value = (value << 1) | s;
  return StateWord{mu, value};
}

std::string StateWord::to_string() const {
  std::string out(static_cast<std::size_t>(mu.value()), '0');
  for (int i = 0; i < mu.value(); ++i) {
    if ((value >> (mu.value() - 1 - i)) & 1u) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

SymbolSequence StateWord::symbols() const {
  SymbolSequence out(static_cast<std::size_t>(mu.value()));
  for (int i = 0; i < mu.value(); ++i) out[static_cast<std::size_t>(i)] = (value >> (mu.value() - 1 - i)) & 1u;
  return out;
}

RuleTable::RuleTable(MemoryLength mu) : mu_(mu), words_(word_count(mu), 0) {}

RuleTable::RuleTable(MemoryLength mu, std::vector<std::uint64_t> words) : mu_(mu), words_(std::move(words)) {
  words_.resize(word_count(mu_), 0);
  words_.back() &= tail_mask(mu_);
}

RuleTable RuleTable::from_decimal(MemoryLength mu, const BigNat& n) {
  if (n < 0 || n >= (BigNat(1) << mu.state_count())) {
    throw RangeError("rule number out of range for memory " + std::to_string(mu.value()));
  }
  std::vector<std::uint64_t> words;
  if (n != 0) boost::multiprecision::export_bits(n, std::back_inserter(words), 64, false);
  return RuleTable(mu, std::move(words));
}

RuleTable RuleTable::from_positions(MemoryLength mu, std::span<const Symbol> bits) {
  if (bits.size() != mu.state_count()) {
    throw ParseError("rule for memory " + std::to_string(mu.value()) + " needs " +
                     std::to_string(mu.state_count()) + " symbols, got " + std::to_string(bits.size()));
  }
  std::vector<std::uint64_t> words(word_count(mu), 0);
  const std::uint32_t n = mu.state_count();
  for (std::uint32_t p = 0; p < n; ++p) {
    if (bits[p]) {
      const std::uint32_t window = n - 1 - p;
      words[window >> 6] |= std::uint64_t{1} << (window & 63);
    }
  }
  return RuleTable(mu, std::move(words));
}

RuleTable RuleTable::from_binary(MemoryLength mu, std::string_view bits) {
  return from_positions(mu, parse_symbols(bits));
}

RuleTable RuleTable::from_binary(std::string_view bits) {
  const int mu = mu_from_length(bits.size());
  return from_binary(MemoryLength(mu), bits);
}

RuleTable RuleTable::from_word(MemoryLength mu, std::uint64_t word) {
  if (mu.value() > 6) throw RangeError("from_word requires memory <= 6");
  if ((word & ~tail_mask(mu)) != 0) throw RangeError("rule word has bits beyond the table");
  return RuleTable(mu, {word});
}

RuleTable RuleTable::from_first_half(MemoryLength mu, std::span<const Symbol> half) {
  const std::uint32_t h = mu.half_size();
  if (half.size() != h) {
    throw ParseError("first half for memory " + std::to_string(mu.value()) + " needs " + std::to_string(h) +
                     " symbols");
  }
  // Position p (1-based) of the first half reads window 2^mu - p, which lies in
  // the upper half of window values; its partner p + h reads window h - p.
  std::vector<std::uint64_t> words(word_count(mu), 0);
  for (std::uint32_t i = 0; i < h; ++i) {
    const std::uint32_t upper = mu.state_count() - 1 - i;
    const std::uint32_t lower = h - 1 - i;
    const std::uint32_t window = half[i] ? upper : lower;
    words[window >> 6] |= std::uint64_t{1} << (window & 63);
  }
  return RuleTable(mu, std::move(words));
}

RuleTable RuleTable::parse(std::string_view text, std::optional<MemoryLength> mu) {
  if (text.starts_with("d:")) {
    if (!mu) throw ParseError("decimal rule '" + std::string(text) + "' needs an explicit memory length");
    const std::string_view digits = text.substr(2);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError("malformed decimal rule '" + std::string(text) + "'");
    }
    return from_decimal(*mu, BigNat(std::string(digits)));
  }
  if (mu) return from_binary(*mu, text);
  return from_binary(text);
}

bool RuleTable::at(std::uint32_t position) const {
  if (position < 1 || position > size()) {
    throw RangeError("position " + std::to_string(position) + " outside [1, " + std::to_string(size()) + "]");
  }
  return output(size() - position);
}

BigNat RuleTable::decimal() const {
  BigNat n;
  boost::multiprecision::import_bits(n, words_.begin(), words_.end(), 64, false);
  return n;
}

std::string RuleTable::to_binary() const {
  const std::uint32_t n = size();
  std::string out(n, '0');
  for (std::uint32_t p = 0; p < n; ++p) {
    if (output(n - 1 - p)) out[p] = '1';
  }
  return out;
}

BigNat RuleTable::first_half_value() const {
  // Windows in the upper half, shifted down, hold the first half in order.
  const std::uint32_t h = mu_.half_size();
  if (h >= 64) {
    std::vector<std::uint64_t> upper(words_.begin() + static_cast<std::ptrdiff_t>(words_.size() / 2), words_.end());
    BigNat n;
    boost::multiprecision::import_bits(n, upper.begin(), upper.end(), 64, false);
    return n;
  }
  return BigNat((words_.front() >> h) & ((std::uint64_t{1} << h) - 1));
}

Symbol apply_rule(const RuleTable& rule, StateWord window) {
  check_same_mu(rule, window.mu);
  return rule.output(window.value) ? 1 : 0;
}

StateWord next_state(const RuleTable& rule, StateWord state) {
  check_same_mu(rule, state.mu);
  return StateWord{state.mu, step_state(rule, state.value)};
}

SymbolSequence generate_sequence(const RuleTable& rule, StateWord init, std::size_t length) {
  check_same_mu(rule, init.mu);
  if (length < static_cast<std::size_t>(init.mu.value())) {
    throw RangeError("sequence length " + std::to_string(length) + " shorter than memory " +
                     std::to_string(init.mu.value()));
  }
  SymbolSequence out = init.symbols();
  out.reserve(length);
  std::uint32_t state = init.value;
  while (out.size() < length) {
    const Symbol s = rule.output(state) ? 1 : 0;
    out.push_back(s);
    state = ((state << 1) & rule.mu().state_mask()) | s;
  }
  return out;
}

OrbitReport detect_orbit(const RuleTable& rule, StateWord init) {
  check_same_mu(rule, init.mu);
  constexpr std::uint32_t kUnseen = ~std::uint32_t{0};
  std::vector<std::uint32_t> first_seen(rule.size(), kUnseen);
  std::vector<std::uint32_t> path;
  std::uint32_t state = init.value;
  while (first_seen[state] == kUnseen) {
    first_seen[state] = static_cast<std::uint32_t>(path.size());
    path.push_back(state);
    state = step_state(rule, state);
  }
  OrbitReport report;
  report.transient_length = first_seen[state];
  report.period = static_cast<std::uint32_t>(path.size()) - report.transient_length;
  report.cycle_states.reserve(report.period);
  report.emitted_cycle.reserve(report.period);
  for (std::size_t i = report.transient_length; i < path.size(); ++i) {
    report.cycle_states.push_back(StateWord{init.mu, path[i]});
    report.emitted_cycle.push_back(rule.output(path[i]) ? 1 : 0);
  }
  return report;
}

std::vector<std::uint32_t> attractor_periods(const RuleTable& rule) {
  const std::uint32_t n = rule.size();
  constexpr std::uint32_t kNone = ~std::uint32_t{0};
  std::vector<std::uint32_t> period(n, 0);
  std::vector<std::uint32_t> walk_id(n, kNone);
  std::vector<std::uint32_t> walk_pos(n, 0);
  std::vector<std::uint32_t> path;
  for (std::uint32_t start = 0; start < n; ++start) {
    if (period[start] != 0) continue;
    path.clear();
    std::uint32_t s = start;
    while (period[s] == 0 && walk_id[s] != start) {
      walk_id[s] = start;
      walk_pos[s] = static_cast<std::uint32_t>(path.size());
      path.push_back(s);
      s = step_state(rule, s);
    }
    // Either closed a new cycle inside this walk or ran into a solved state.
    const std::uint32_t p = period[s] != 0 ? period[s] : static_cast<std::uint32_t>(path.size()) - walk_pos[s];
    for (std::uint32_t v : path) period[v] = p;
  }
  return period;
}

BigNat total_configuration_count(MemoryLength mu) {
  BigNat one = 1;
  return one << (mu.state_count() + static_cast<std::uint32_t>(mu.value()));
}

}  // namespace dbrules
