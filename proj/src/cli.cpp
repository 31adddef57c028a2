#include "dbrules/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dbrules/census.hpp"
#include "dbrules/classifier.hpp"
#include "dbrules/debruijn.hpp"
#include "dbrules/errors.hpp"
#include "dbrules/feasibility.hpp"
#include "dbrules/rule.hpp"

namespace dbrules::cli {

namespace {

struct Options {
  int mu = 0;
  std::string rule;
  std::string init;
  std::string kind = "feasible";
  bool profile = false;
  bool allow_large = false;
  std::uint64_t start = 0;
  std::optional<std::uint64_t> end;
  unsigned workers = 1;
  std::string policy;
  std::string format = "csv";
  int mu_min = 2;
  int mu_max = 9;
  std::string output;
  std::string data;
  std::string model;
  std::string input;
  bool sampled = false;
  bool no_balance = false;
  bool trust = false;
  bool whole = false;
  std::size_t rows = 200000;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  double train_fraction = 0.8;
  std::vector<std::size_t> layers;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> epochs;
  double threshold = 0.5;
};

unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const unsigned long n = std::stoul(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Writes to --output when given, otherwise to stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

RuleTable resolve_rule(const Options& o) {
  if (o.rule.empty()) throw ParseError("--rule is required");
  std::optional<MemoryLength> mu;
  if (o.mu > 0) mu = MemoryLength(o.mu);
  return RuleTable::parse(o.rule, mu);
}

void echo(std::ostream& out, const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  out << "# dbrules " << command;
  for (const auto& [k, v] : kv) out << ' ' << k << '=' << v;
  out << '\n';
}

std::string profile_csv_header() { return "rule,decimal,boundary,symmetry,evil_factor,phi,pair,feasible"; }

std::string profile_csv_row(const FeasibilityProfile& p) {
  std::ostringstream row;
  row << p.rule.to_binary() << ',' << p.rule.decimal() << ',' << int(p.boundary_ok) << ',' << int(p.symmetry_ok)
      << ',' << (p.evil_factor ? p.evil_factor->str() : "") << ',' << (p.phi ? p.phi->str() : "") << ','
      << (p.pair_ok ? std::to_string(int(*p.pair_ok)) : "") << ',' << int(p.feasible());
  return row.str();
}

// Splits the enumerator's index range across workers and concatenates the
// per-worker results in range order.
template <typename Visit>
std::vector<std::vector<RuleTable>> partitioned_scan(MemoryLength mu, const Options& o, Visit visit) {
  EnumerationOptions base{o.allow_large, o.start, o.end};
  FeasibleEnumerator probe(mu, base);
  const std::uint64_t begin = o.start;
  const std::uint64_t end = o.end.value_or(probe.index_end());
  const unsigned workers = std::max(1u, o.workers);
  std::vector<std::vector<RuleTable>> parts(workers);
  const std::uint64_t span = end - begin;
  const std::uint64_t chunk = (span + workers - 1) / workers;
  auto job = [&](unsigned w) {
    const std::uint64_t lo = std::min(end, begin + chunk * w);
    const std::uint64_t hi = std::min(end, lo + chunk);
    FeasibleEnumerator it(mu, EnumerationOptions{o.allow_large, lo, hi});
    while (auto rule = it.next()) {
      if (visit(*rule)) parts[w].push_back(std::move(*rule));
    }
  };
  if (workers == 1) {
    job(0);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(job, w);
  }
  return parts;
}

int cmd_check(const Options& o, std::ostream& out) {
  const RuleTable rule = resolve_rule(o);
  const MemoryLength mu = rule.mu();
  const StateWord init = o.init.empty() ? StateWord{mu, 0} : StateWord::parse(mu, o.init);
  echo(out, "check", {{"mu", std::to_string(mu.value())}, {"rule", rule.to_binary()}, {"init", init.to_string()}});
  const FeasibilityProfile profile = is_feasible(rule);
  const OrbitReport orbit = detect_orbit(rule, init);
  const bool debruijn = is_debruijn_rule(rule);
  out << "rule: " << rule.to_binary() << '\n';
  out << "decimal: " << rule.decimal() << '\n';
  out << "mu: " << mu.value() << '\n';
  out << "boundary: " << bool_text(profile.boundary_ok) << '\n';
  out << "symmetry: " << bool_text(profile.symmetry_ok) << '\n';
  out << "evil_factor: " << (profile.evil_factor ? profile.evil_factor->str() : "none") << '\n';
  out << "phi: " << (profile.phi ? profile.phi->str() : "n/a") << '\n';
  out << "pair: " << (profile.pair_ok ? bool_text(*profile.pair_ok) : "n/a") << '\n';
  out << "feasible: " << bool_text(profile.feasible()) << '\n';
  out << "de Bruijn: " << bool_text(debruijn) << '\n';
  if (debruijn) out << "sequence: " << sequence_of_rule(rule).to_string() << '\n';
  out << "transient: " << orbit.transient_length << '\n';
  out << "period: " << orbit.period << '\n';
  out << "cycle: " << to_string(orbit.emitted_cycle) << '\n';
  return kOk;
}

int cmd_enumerate(const Options& o, std::ostream& out, std::ostream& err) {
  const MemoryLength mu(o.mu);
  if (o.kind != "feasible" && o.kind != "debruijn") throw ParseError("--kind must be feasible or debruijn");
  Sink sink(o.output, out);
  echo(out, "enumerate",
       {{"mu", std::to_string(mu.value())},
        {"kind", o.kind},
        {"start", std::to_string(o.start)},
        {"end", o.end ? std::to_string(*o.end) : "all"},
        {"workers", std::to_string(o.workers)}});
  const bool want_debruijn = o.kind == "debruijn";
  const auto parts = partitioned_scan(mu, o, [&](const RuleTable& r) { return !want_debruijn || is_debruijn_rule(r); });
  std::ostream& dst = sink.get();
  if (o.profile) dst << profile_csv_header() << '\n';
  std::size_t count = 0;
  for (const auto& part : parts) {
    for (const RuleTable& r : part) {
      if (o.profile) {
        dst << profile_csv_row(is_feasible(r)) << '\n';
      } else {
        dst << r.to_binary() << '\n';
      }
      ++count;
    }
  }
  err << "enumerated " << count << ' ' << o.kind << " rules for mu=" << mu.value() << '\n';
  return kOk;
}

int cmd_granddaddy(const Options& o, std::ostream& out, std::ostream& err) {
  const MemoryLength mu(o.mu);
  echo(out, "granddaddy", {{"mu", std::to_string(mu.value())}, {"workers", std::to_string(o.workers)}});
  GranddaddySearch total(mu);
  const auto parts = partitioned_scan(mu, o, [&](const RuleTable&) { return true; });
  for (const auto& part : parts) {
    GranddaddySearch partial(mu);
    for (const RuleTable& r : part) partial.offer(r);
    total.merge(partial);
  }
  const auto best = total.result();
  out << "rule: " << best.rule.decimal() << '\n';
  out << "binary: " << best.rule.to_binary() << '\n';
  out << "sequence: " << best.sequence.to_string() << '\n';
  err << "scanned " << total.candidates_seen() << " feasible rules, " << total.debruijn_seen() << " de Bruijn\n";
  return kOk;
}

int cmd_periods(const Options& o, std::ostream& out) {
  const MemoryLength mu(o.mu);
  const InitPolicy policy = o.policy.empty() ? default_init_policy() : InitPolicy::parse(o.policy);
  echo(out, "periods",
       {{"mu", std::to_string(mu.value())}, {"policy", policy.to_string()}, {"workers", std::to_string(o.workers)}});
  const PeriodHistogram hist = period_histogram(mu, policy, CensusOptions{o.allow_large, o.workers});
  Sink sink(o.output, out);
  if (o.format == "text") {
    sink.get() << hist.render_bars();
  } else {
    sink.get() << hist.to_csv();
  }
  return kOk;
}

int cmd_table3(const Options& o, std::ostream& out) {
  if (o.mu_min > o.mu_max) throw RangeError("--mu-min exceeds --mu-max");
  std::vector<MemoryLength> mus;
  for (int m = o.mu_min; m <= o.mu_max; ++m) mus.emplace_back(m);
  echo(out, "table3", {{"mu-min", std::to_string(o.mu_min)}, {"mu-max", std::to_string(o.mu_max)}});
  const auto rows = reduction_table(mus);
  Sink sink(o.output, out);
  sink.get() << (o.format == "text" ? reduction_table_text(rows) : reduction_table_csv(rows));
  return kOk;
}

int cmd_graph(const Options& o, std::ostream& out) {
  const RuleTable rule = resolve_rule(o);
  echo(out, "graph", {{"mu", std::to_string(rule.mu().value())}, {"rule", rule.to_binary()}});
  Sink sink(o.output, out);
  sink.get() << export_state_graph(rule);
  return kOk;
}

int cmd_dataset(const Options& o, std::ostream& out, std::ostream& err) {
  const MemoryLength mu(o.mu);
  const bool sampled = o.sampled || mu.value() > kExhaustiveDatasetMu;
  echo(out, "dataset",
       {{"mu", std::to_string(mu.value())},
        {"source", sampled ? "sampled" : "exhaustive"},
        {"rows", sampled ? std::to_string(o.rows) : "all"},
        {"balance", bool_text(!o.no_balance)},
        {"seed", std::to_string(o.seed)}});
  const LabeledDataset data = sampled ? build_dataset_sampled(mu, SampledSource{o.rows, !o.no_balance, o.seed})
                                      : build_dataset_exhaustive(mu);
  Sink sink(o.output, out);
  write_dataset_csv(sink.get(), data);
  err << "dataset: " << data.size() << " rows, " << data.positives() << " de Bruijn\n";
  return kOk;
}

NetworkConfig resolve_network(const Options& o, MemoryLength mu) {
  NetworkConfig cfg = NetworkConfig::defaults_for(mu);
  if (!o.layers.empty()) cfg.hidden_layers = o.layers;
  if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
  if (o.batch) cfg.batch_size = *o.batch;
  if (o.epochs) cfg.epochs = *o.epochs;
  cfg.threshold = o.threshold;
  cfg.seed = o.seed;
  return cfg;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.data.empty() || o.model.empty()) throw ParseError("train needs --data and --model");
  std::ifstream in = open_input(o.data);
  const LabeledDataset data = read_dataset_csv(in, o.trust);
  const NetworkConfig cfg = resolve_network(o, data.mu);
  echo(out, "train",
       {{"data", o.data},
        {"mu", std::to_string(data.mu.value())},
        {"train-fraction", std::to_string(o.train_fraction)},
        {"split-seed", std::to_string(o.split_seed)},
        {"config", "\"" + cfg.to_string() + "\""}});
  const auto [train_set, test_set] = split_dataset(data, o.train_fraction, o.split_seed);
  const Mlp model = train(train_set, cfg, [&](const EpochStats& s) {
    if (s.epoch % 10 == 0 || s.epoch == cfg.epochs) err << "epoch " << s.epoch << " loss " << s.mean_loss << '\n';
  });
  {
    std::ofstream file(o.model, std::ios::binary);
    if (!file) throw DataError("cannot open '" + o.model + "' for writing");
    model.save(file);
  }
  out << "train_rows: " << train_set.size() << '\n';
  out << "test_rows: " << test_set.size() << '\n';
  out << "model: " << o.model << '\n';
  return kOk;
}

Mlp load_model(const std::string& path) {
  std::ifstream in = open_input(path);
  return Mlp::load(in);
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.data.empty() || o.model.empty()) throw ParseError("evaluate needs --data and --model");
  std::ifstream in = open_input(o.data);
  const LabeledDataset data = read_dataset_csv(in, o.trust);
  const Mlp model = load_model(o.model);
  echo(out, "evaluate",
       {{"data", o.data},
        {"model", o.model},
        {"subset", o.whole ? "all" : "test"},
        {"train-fraction", std::to_string(o.train_fraction)},
        {"split-seed", std::to_string(o.split_seed)},
        {"threshold", std::to_string(o.threshold)}});
  const LabeledDataset test = o.whole ? data : split_dataset(data, o.train_fraction, o.split_seed).second;
  Sink sink(o.output, out);
  sink.get() << evaluate(model, test, o.threshold).to_csv();
  return kOk;
}

int cmd_classify(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw ParseError("classify needs --model");
  const Mlp model = load_model(o.model);
  std::vector<RuleTable> candidates;
  std::string source;
  if (!o.input.empty()) {
    std::ifstream in = open_input(o.input);
    std::string line;
    std::optional<MemoryLength> mu;
    if (o.mu > 0) mu = MemoryLength(o.mu);
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      candidates.push_back(RuleTable::parse(line, mu));
    }
    source = o.input;
  } else {
    const MemoryLength mu(o.mu);
    for (auto& part : partitioned_scan(mu, o, [](const RuleTable&) { return true; })) {
      candidates.insert(candidates.end(), part.begin(), part.end());
    }
    source = "feasible";
  }
  echo(out, "classify",
       {{"model", o.model}, {"candidates", source}, {"threshold", std::to_string(o.threshold)}});
  const VerificationResult result = verify_predictions(model, candidates, o.threshold);
  Sink sink(o.output, out);
  for (const RuleTable& r : result.confirmed) sink.get() << r.to_binary() << '\n';
  out << "# candidates=" << result.candidates << " predicted_positive=" << result.predicted_positive
      << " confirmed=" << result.confirmed.size() << '\n';
  err << "confirmed " << result.confirmed.size() << " of " << result.predicted_positive << " predicted positives\n";
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generating rules with memory: feasibility filters, de Bruijn rules, period census, classifier",
               "dbrules"};
  app.require_subcommand(1);
  Options o;
  o.workers = default_workers();

  auto add_mu = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--mu", o.mu, "Memory length")->check(CLI::Range(1, kMuMax));
    if (required) opt->required();
  };
  auto add_range = [&](CLI::App* sub) {
    sub->add_option("--start", o.start, "First interior index of the scan");
    sub->add_option("--end", o.end, "One past the last interior index of the scan");
    sub->add_flag("--allow-large", o.allow_large, "Lift the size guard");
    sub->add_option("--workers", o.workers, "Worker threads (default from DBRULES_WORKERS)")
        ->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "Feasibility profile, de Bruijn verdict and period of one rule");
  add_mu(check, false);
  check->add_option("--rule", o.rule, "Binary truth table or d:<decimal>")->required();
  check->add_option("--init", o.init, "Initial window (mu symbols, oldest first)");

  auto* enumerate = app.add_subcommand("enumerate", "List feasible or de Bruijn rules");
  add_mu(enumerate, true);
  enumerate->add_option("--kind", o.kind, "feasible | debruijn")->check(CLI::IsMember({"feasible", "debruijn"}));
  enumerate->add_flag("--profile", o.profile, "Emit filter columns as CSV");
  enumerate->add_option("--output,-o", o.output, "Output file");
  add_range(enumerate);

  auto* grand = app.add_subcommand("granddaddy", "Least de Bruijn sequence and its rule");
  add_mu(grand, true);
  add_range(grand);

  auto* periods = app.add_subcommand("periods", "Histogram of periods over every rule");
  add_mu(periods, true);
  periods->add_option("--policy", o.policy, "fixed:<n> | max | min | random:<seed>");
  periods->add_option("--format", o.format, "csv | text")->check(CLI::IsMember({"csv", "text"}));
  periods->add_option("--output,-o", o.output, "Output file");
  add_range(periods);

  auto* table3 = app.add_subcommand("table3", "Rule-space reduction by the feasibility filters");
  table3->add_option("--mu-min", o.mu_min, "Smallest memory")->check(CLI::Range(1, kMuMax));
  table3->add_option("--mu-max", o.mu_max, "Largest memory")->check(CLI::Range(1, kMuMax));
  table3->add_option("--format", o.format, "csv | text")->check(CLI::IsMember({"csv", "text"}));
  table3->add_option("--output,-o", o.output, "Output file");

  auto* graph = app.add_subcommand("graph", "State graph of a rule in DOT");
  add_mu(graph, false);
  graph->add_option("--rule", o.rule, "Binary truth table or d:<decimal>")->required();
  graph->add_option("--output,-o", o.output, "Output file");

  auto* dataset = app.add_subcommand("dataset", "Labelled feasible rules as rule,label CSV");
  add_mu(dataset, true);
  dataset->add_flag("--sampled", o.sampled, "Sample instead of enumerating (implied above mu=5)");
  dataset->add_option("--rows", o.rows, "Rows to sample")->check(CLI::PositiveNumber);
  dataset->add_flag("--no-balance", o.no_balance, "Keep the natural class mix");
  dataset->add_option("--seed", o.seed, "Sampling seed");
  dataset->add_option("--output,-o", o.output, "Output file");

  auto add_split = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Dataset CSV")->required();
    sub->add_option("--train-fraction", o.train_fraction, "Training share of the split");
    sub->add_option("--split-seed", o.split_seed, "Split seed");
    sub->add_flag("--trust", o.trust, "Skip oracle verification of labels");
  };

  auto* train_cmd = app.add_subcommand("train", "Train the classifier on the training split");
  add_split(train_cmd);
  train_cmd->add_option("--model", o.model, "Model file to write")->required();
  train_cmd->add_option("--layers", o.layers, "Hidden layer widths")->delimiter(',');
  train_cmd->add_option("--lr", o.learning_rate, "Learning rate");
  train_cmd->add_option("--batch", o.batch, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", o.epochs, "Epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", o.seed, "Training seed");

  auto* eval = app.add_subcommand("evaluate", "Confusion matrix and metrics on the test split");
  add_split(eval);
  eval->add_option("--model", o.model, "Model file")->required();
  eval->add_option("--threshold", o.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  eval->add_flag("--all", o.whole, "Evaluate on every row instead of the test split");
  eval->add_option("--output,-o", o.output, "Output file");

  auto* classify = app.add_subcommand("classify", "Predict and confirm de Bruijn rules with the oracle");
  add_mu(classify, false);
  classify->add_option("--model", o.model, "Model file")->required();
  classify->add_option("--input", o.input, "File with one rule per line (default: the feasible set of --mu)");
  classify->add_option("--threshold", o.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  classify->add_option("--output,-o", o.output, "Output file");
  add_range(classify);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*check) return cmd_check(o, out);
    if (*enumerate) return cmd_enumerate(o, out, err);
    if (*grand) return cmd_granddaddy(o, out, err);
    if (*periods) return cmd_periods(o, out);
    if (*table3) return cmd_table3(o, out);
    if (*graph) return cmd_graph(o, out);
    if (*dataset) return cmd_dataset(o, out, err);
    if (*train_cmd) return cmd_train(o, out, err);
    if (*eval) return cmd_evaluate(o, out);
    if (*classify) {
      if (o.input.empty() && o.mu == 0) throw ParseError("classify needs --input or --mu");
      return cmd_classify(o, out, err);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace dbrules::cli
