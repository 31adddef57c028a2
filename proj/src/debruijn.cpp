#include "dbrules/debruijn.hpp"

#include <sstream>
#include <vector>

#include "dbrules/errors.hpp"

namespace dbrules {

namespace {

// Index of the least rotation. Booth's failure-function formulation, O(n).
std::size_t least_rotation_index(std::span<const Symbol> s) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.size());
  std::vector<std::ptrdiff_t> fail(static_cast<std::size_t>(2 * n), -1);
  std::ptrdiff_t k = 0;
  auto at = [&](std::ptrdiff_t i) { return s[static_cast<std::size_t>(i % n)]; };
  for (std::ptrdiff_t j = 1; j < 2 * n; ++j) {
    const Symbol sj = at(j);
    std::ptrdiff_t i = fail[static_cast<std::size_t>(j - k - 1)];
    while (i != -1 && sj != at(k + i + 1)) {
      if (sj < at(k + i + 1)) k = j - i - 1;
      i = fail[static_cast<std::size_t>(i)];
    }
    if (sj != at(k + i + 1)) {
      if (sj < at(k)) k = j;
      fail[static_cast<std::size_t>(j - k)] = -1;
    } else {
      fail[static_cast<std::size_t>(j - k)] = i + 1;
    }
  }
  return static_cast<std::size_t>(k % n);
}

}  // namespace

DeBruijnSequence DeBruijnSequence::from_symbols(MemoryLength mu, SymbolSequence symbols) {
  if (!verify_debruijn_sequence(symbols, mu)) {
    throw NotDeBruijnError("'" + dbrules::to_string(symbols) + "' is not a de Bruijn sequence of order " +
                           std::to_string(mu.value()));
  }
  return DeBruijnSequence(mu, canonical_rotation(symbols));
}

DeBruijnSequence DeBruijnSequence::parse(MemoryLength mu, std::string_view text) {
  return from_symbols(mu, parse_symbols(text));
}

bool is_debruijn_rule(const RuleTable& rule) {
  const std::uint32_t n = rule.size();
  std::uint32_t state = 0;
  for (std::uint32_t steps = 1; steps <= n; ++steps) {
    state = step_state(rule, state);
    if (state == 0) return steps == n;
  }
  return false;
}

DeBruijnSequence sequence_of_rule(const RuleTable& rule) {
  if (!is_debruijn_rule(rule)) {
    throw NotDeBruijnError("rule " + rule.to_binary() + " does not generate a de Bruijn sequence");
  }
  const OrbitReport orbit = detect_orbit(rule, StateWord{rule.mu(), 0});
  return DeBruijnSequence::from_symbols(rule.mu(), orbit.emitted_cycle);
}

RuleTable rule_of_sequence(const DeBruijnSequence& sequence) {
  const MemoryLength mu = sequence.mu();
  const SymbolSequence& s = sequence.symbols();
  const std::size_t n = s.size();
  std::vector<Symbol> by_window(n, 0);
  std::uint32_t window = 0;
  for (int i = 0; i < mu.value(); ++i) window = (window << 1) | s[static_cast<std::size_t>(i)];
  for (std::size_t i = 0; i < n; ++i) {
    const Symbol next = s[(i + static_cast<std::size_t>(mu.value())) % n];
    by_window[window] = next;
    window = ((window << 1) & mu.state_mask()) | next;
  }
  SymbolSequence positions(n);
  for (std::size_t p = 0; p < n; ++p) positions[p] = by_window[n - 1 - p];
  return RuleTable::from_positions(mu, positions);
}

RuleTable rule_of_sequence(MemoryLength mu, std::span<const Symbol> symbols) {
  return rule_of_sequence(DeBruijnSequence::from_symbols(mu, SymbolSequence(symbols.begin(), symbols.end())));
}

SymbolSequence canonical_rotation(std::span<const Symbol> symbols) {
  if (symbols.empty()) return {};
  const std::size_t k = least_rotation_index(symbols);
  SymbolSequence out;
  out.reserve(symbols.size());
  out.insert(out.end(), symbols.begin() + static_cast<std::ptrdiff_t>(k), symbols.end());
  out.insert(out.end(), symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

bool verify_debruijn_sequence(std::span<const Symbol> symbols, MemoryLength mu) {
  const std::size_t n = mu.state_count();
  if (symbols.size() != n) return false;
  std::vector<bool> seen(n, false);
  std::uint32_t window = 0;
  for (int i = 0; i < mu.value(); ++i) window = (window << 1) | (symbols[static_cast<std::size_t>(i)] & 1u);
  for (std::size_t i = 0; i < n; ++i) {
    if (symbols[i] > 1) return false;
    if (seen[window]) return false;
    seen[window] = true;
    window = ((window << 1) & mu.state_mask()) | symbols[(i + static_cast<std::size_t>(mu.value())) % n];
  }
  return true;
}

BigNat debruijn_count(MemoryLength mu) {
  if (mu.value() == 1) return 1;
  return BigNat(1) << (mu.half_size() - static_cast<std::uint32_t>(mu.value()));
}

void GranddaddySearch::offer(const RuleTable& rule) {
  if (rule.mu() != mu_) throw ArityError("candidate memory does not match the search");
  ++seen_;
  if (!is_debruijn_rule(rule)) return;
  ++debruijn_;
  DeBruijnSequence seq = sequence_of_rule(rule);
  if (!best_ || seq < best_->sequence) best_ = Result{rule, std::move(seq)};
}

void GranddaddySearch::merge(const GranddaddySearch& other) {
  if (other.mu_ != mu_) throw ArityError("cannot merge searches over different memories");
  seen_ += other.seen_;
  debruijn_ += other.debruijn_;
  if (other.best_ && (!best_ || other.best_->sequence < best_->sequence)) best_ = other.best_;
}

GranddaddySearch::Result GranddaddySearch::result() const {
  if (!best_) {
    throw NotFoundError("no de Bruijn rule among " + std::to_string(seen_) + " candidates for memory " +
                        std::to_string(mu_.value()));
  }
  return *best_;
}

GranddaddySearch::Result granddaddy(MemoryLength mu, std::span<const RuleTable> candidates) {
  GranddaddySearch search(mu);
  for (const RuleTable& r : candidates) search.offer(r);
  return search.result();
}

std::string export_state_graph(const RuleTable& rule) {
  const MemoryLength mu = rule.mu();
  std::ostringstream out;
  out << "digraph rule_" << rule.to_binary() << " {\n";
  for (std::uint32_t v = rule.size(); v-- > 0;) {
    out << "  \"" << StateWord{mu, v}.to_string() << "\";\n";
  }
  for (std::uint32_t v = rule.size(); v-- > 0;) {
    out << "  \"" << StateWord{mu, v}.to_string() << "\" -> \"" << StateWord{mu, step_state(rule, v)}.to_string()
        << "\";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace dbrules
