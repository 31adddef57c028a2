#pragma once

#include <optional>
#include <span>
#include <string>

#include "dbrules/rule.hpp"

namespace dbrules {

// A binary de Bruijn sequence of order mu, held in its lexicographically least
// rotation. Construction validates window uniqueness.
class DeBruijnSequence {
 public:
  // Throws NotDeBruijnError unless `symbols` is a de Bruijn sequence of order
  // mu (any rotation is accepted).
  static DeBruijnSequence from_symbols(MemoryLength mu, SymbolSequence symbols);
  static DeBruijnSequence parse(MemoryLength mu, std::string_view text);

  MemoryLength mu() const { return mu_; }
  const SymbolSequence& symbols() const { return symbols_; }
  std::string to_string() const { return dbrules::to_string(symbols_); }

  auto operator<=>(const DeBruijnSequence& other) const { return symbols_ <=> other.symbols_; }
  bool operator==(const DeBruijnSequence& other) const { return symbols_ == other.symbols_; }

 private:
  DeBruijnSequence(MemoryLength mu, SymbolSequence symbols) : mu_(mu), symbols_(std::move(symbols)) {}

  MemoryLength mu_;
  SymbolSequence symbols_;
};

// True iff the state map is one cycle through all 2^mu windows. Walks from the
// zero window only.
bool is_debruijn_rule(const RuleTable& rule);

// Throws NotDeBruijnError for rules that are not de Bruijn.
DeBruijnSequence sequence_of_rule(const RuleTable& rule);

RuleTable rule_of_sequence(const DeBruijnSequence& sequence);
// Validates first; throws NotDeBruijnError on a repeated window.
RuleTable rule_of_sequence(MemoryLength mu, std::span<const Symbol> symbols);

// Least rotation in lexicographic order (Booth's algorithm).
SymbolSequence canonical_rotation(std::span<const Symbol> symbols);

bool verify_debruijn_sequence(std::span<const Symbol> symbols, MemoryLength mu);

// 2^(2^(mu-1) - mu); 1 for mu = 1.
BigNat debruijn_count(MemoryLength mu);

// Running minimum over a stream of candidate rules. Partial searches over
// disjoint partitions combine with merge(); the result does not depend on how
// the stream was split.
class GranddaddySearch {
 public:
  explicit GranddaddySearch(MemoryLength mu) : mu_(mu) {}

  // Non-de Bruijn candidates are ignored. Throws ArityError on memory mismatch.
  void offer(const RuleTable& rule);
  void merge(const GranddaddySearch& other);

  bool found() const { return best_.has_value(); }
  std::size_t candidates_seen() const { return seen_; }
  std::size_t debruijn_seen() const { return debruijn_; }

  struct Result {
    RuleTable rule;
    DeBruijnSequence sequence;
  };
  // Throws NotFoundError when no de Bruijn rule was offered.
  Result result() const;

 private:
  MemoryLength mu_;
  std::optional<Result> best_;
  std::size_t seen_ = 0;
  std::size_t debruijn_ = 0;
};

GranddaddySearch::Result granddaddy(MemoryLength mu, std::span<const RuleTable> candidates);

// Directed graph in Graphviz DOT: one node line per window and one edge line
// per window to its successor, both in descending window order.
std::string export_state_graph(const RuleTable& rule);

}  // namespace dbrules
