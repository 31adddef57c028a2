#include "dbrules/census.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>
#include <thread>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dbrules/debruijn.hpp"
#include "dbrules/errors.hpp"
#include "dbrules/feasibility.hpp"

namespace dbrules {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

using Counts = std::vector<std::uint64_t>;

void tally_range(MemoryLength mu, const InitPolicy& policy, std::uint64_t begin, std::uint64_t end, Counts& counts) {
  for (std::uint64_t word = begin; word < end; ++word) {
    ++counts[rule_period(RuleTable::from_word(mu, word), policy)];
  }
}

}  // namespace

InitPolicy InitPolicy::parse(std::string_view text) {
  if (text == "max") return max_over_inits();
  if (text == "min") return min_over_inits();
  if (text.starts_with("fixed:")) {
    return fixed(static_cast<std::uint32_t>(parse_u64(text.substr(6), "initial state")));
  }
  if (text.starts_with("random:")) return random(parse_u64(text.substr(7), "seed"));
  throw ParseError("unknown init policy '" + std::string(text) + "' (expected fixed:<n>, max, min, random:<seed>)");
}

std::string InitPolicy::to_string() const {
  switch (kind) {
    case Kind::fixed:
      return "fixed:" + std::to_string(state);
    case Kind::max_over_inits:
      return "max";
    case Kind::min_over_inits:
      return "min";
    case Kind::random:
      return "random:" + std::to_string(seed);
  }
  return {};
}

std::uint64_t PeriodHistogram::total() const {
  std::uint64_t sum = 0;
  for (const auto& [period, count] : counts) sum += count;
  return sum;
}

std::string PeriodHistogram::to_csv() const {
  std::ostringstream out;
  out << "period,count\n";
  for (const auto& [period, count] : counts) out << period << ',' << count << '\n';
  return out.str();
}

std::string PeriodHistogram::render_bars(std::size_t width) const {
  std::uint64_t peak = 1;
  for (const auto& [period, count] : counts) peak = std::max(peak, count);
  std::ostringstream out;
  for (const auto& [period, count] : counts) {
    const auto len = static_cast<std::size_t>((static_cast<double>(count) / static_cast<double>(peak)) *
                                              static_cast<double>(width) + 0.5);
    out << std::setw(5) << period << " | " << std::string(len, '#') << ' ' << count << '\n';
  }
  return out.str();
}

std::uint32_t rule_period(const RuleTable& rule, const InitPolicy& policy) {
  switch (policy.kind) {
    case InitPolicy::Kind::fixed:
      return detect_orbit(rule, StateWord::make(rule.mu(), policy.state)).period;
    case InitPolicy::Kind::random: {
      const std::uint64_t draw = splitmix64(policy.seed ^ splitmix64(rule.low_word()));
      const auto state = static_cast<std::uint32_t>(draw & rule.mu().state_mask());
      return detect_orbit(rule, StateWord{rule.mu(), state}).period;
    }
    case InitPolicy::Kind::max_over_inits: {
      const auto periods = attractor_periods(rule);
      return *std::max_element(periods.begin(), periods.end());
    }
    case InitPolicy::Kind::min_over_inits: {
      const auto periods = attractor_periods(rule);
      return *std::min_element(periods.begin(), periods.end());
    }
  }
  return 0;
}

PeriodHistogram period_histogram(MemoryLength mu, InitPolicy policy, CensusOptions options) {
  if (mu.value() > kCensusGuardMu && !options.allow_large) {
    throw CapacityError("period census over all rules of memory " + std::to_string(mu.value()) +
                        " needs an explicit override (limit " + std::to_string(kCensusGuardMu) + ")");
  }
  if (mu.value() > 5) throw CapacityError("period census is limited to memory <= 5");
  if (policy.kind == InitPolicy::Kind::fixed) StateWord::make(mu, policy.state);

  const std::uint64_t rule_count = std::uint64_t{1} << mu.state_count();
  const unsigned workers = std::max(1u, options.workers);
  std::vector<Counts> partial(workers, Counts(mu.state_count() + 1, 0));
  if (workers == 1) {
    tally_range(mu, policy, 0, rule_count, partial[0]);
  } else {
    std::vector<std::jthread> threads;
    const std::uint64_t chunk = (rule_count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min(rule_count, chunk * w);
      const std::uint64_t end = std::min(rule_count, begin + chunk);
      threads.emplace_back([&, w, begin, end] { tally_range(mu, policy, begin, end, partial[w]); });
    }
  }

  PeriodHistogram hist{mu, policy, {}};
  for (std::uint32_t p = 1; p <= mu.state_count(); ++p) {
    std::uint64_t sum = 0;
    for (const Counts& c : partial) sum += c[p];
    hist.counts[p] = sum;
  }
  return hist;
}

std::string format_ratio(const BigNat& numerator, const BigNat& denominator, int significant) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  const Float ratio = Float(numerator) / Float(denominator);
  std::string text = ratio.str(significant - 1, std::ios_base::scientific);
  std::replace(text.begin(), text.end(), 'e', 'E');
  return text;
}

std::string format_count(const BigNat& n, int significant) {
  static const BigNat kExactLimit = BigNat(1000000000000000ULL);
  if (n < kExactLimit) return n.str();
  return format_ratio(n, 1, significant);
}

std::vector<ReductionRow> reduction_table(const std::vector<MemoryLength>& mus) {
  std::vector<ReductionRow> rows;
  rows.reserve(mus.size());
  for (MemoryLength mu : mus) {
    ReductionRow row{mu, BigNat(1) << mu.state_count(), count_feasible(mu), debruijn_count(mu), {}, {}, {}};
    row.feasible_over_total = format_ratio(row.feasible, row.total);
    row.debruijn_over_total = format_ratio(row.debruijn, row.total);
    row.debruijn_over_feasible = format_ratio(row.debruijn, row.feasible);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string reduction_table_csv(const std::vector<ReductionRow>& rows) {
  std::ostringstream out;
  out << "mu,C(mu),# Feasible,# de Bruijn,Feasible/Total,de Bruijn/Total,de Bruijn/Feasible\n";
  for (const ReductionRow& r : rows) {
    out << r.mu.value() << ',' << format_count(r.total) << ',' << format_count(r.feasible) << ','
        << format_count(r.debruijn) << ',' << r.feasible_over_total << ',' << r.debruijn_over_total << ','
        << r.debruijn_over_feasible << '\n';
  }
  return out.str();
}

std::string reduction_table_text(const std::vector<ReductionRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(4) << "mu" << std::setw(14) << "C(mu)" << std::setw(14) << "# Feasible"
      << std::setw(14) << "# de Bruijn" << std::setw(16) << "Feasible/Total" << std::setw(16) << "de Bruijn/Total"
      << "de Bruijn/Feasible\n";
  for (const ReductionRow& r : rows) {
    out << std::setw(4) << r.mu.value() << std::setw(14) << format_count(r.total) << std::setw(14)
        << format_count(r.feasible) << std::setw(14) << format_count(r.debruijn) << std::setw(16)
        << r.feasible_over_total << std::setw(16) << r.debruijn_over_total << r.debruijn_over_feasible << '\n';
  }
  return out.str();
}

}  // namespace dbrules
