#include "dbrules/classifier.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "dbrules/debruijn.hpp"
#include "dbrules/errors.hpp"
#include "dbrules/feasibility.hpp"

namespace dbrules {

namespace {

std::mt19937_64 derived_stream(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kInitStream = 1;
constexpr std::uint32_t kShuffleStream = 2;

LabeledRow label_row(RuleTable rule) {
  FeatureVector features = extract_features(rule);
  const Symbol label = is_debruijn_rule(rule) ? 1 : 0;
  return LabeledRow{std::move(rule), std::move(features), label};
}

std::vector<double> to_inputs(std::span<const Symbol> features) {
  return std::vector<double>(features.begin(), features.end());
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void append_metric(std::ostringstream& out, const char* name, const std::optional<double>& v) {
  out << name << ',';
  if (v) {
    out << *v;
  } else {
    out << "NA";
  }
  out << '\n';
}

}  // namespace

std::size_t feature_width(MemoryLength mu) { return interior_bit_count(mu); }

FeatureVector extract_features(const RuleTable& rule) {
  if (!boundary_ok(rule) || !symmetry_ok(rule)) {
    throw StructureError("features need a boundary and complement-symmetric rule, got " + rule.to_binary());
  }
  const std::uint32_t h = rule.mu().half_size();
  FeatureVector out;
  out.reserve(feature_width(rule.mu()));
  for (std::uint32_t p = 2; p < h; ++p) out.push_back(rule.at(p) ? 1 : 0);
  return out;
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const LabeledRow& r) { return r.label == 1; }));
}

LabeledDataset build_dataset_exhaustive(MemoryLength mu) {
  if (mu.value() > kExhaustiveDatasetMu) {
    throw CapacityError("exhaustive datasets are limited to memory <= " + std::to_string(kExhaustiveDatasetMu) +
                        "; use a sampled dataset");
  }
  LabeledDataset data{mu, {}};
  FeasibleEnumerator it(mu);
  while (auto rule = it.next()) data.rows.push_back(label_row(std::move(*rule)));
  return data;
}

LabeledDataset build_dataset_sampled(MemoryLength mu, const SampledSource& source) {
  LabeledDataset data{mu, {}};
  data.rows.reserve(source.rows);
  FeasibleSampler sampler(mu, source.seed);
  if (!source.balance) {
    for (std::size_t i = 0; i < source.rows; ++i) data.rows.push_back(label_row(sampler.next()));
    return data;
  }
  const std::size_t per_class = source.rows / 2;
  std::size_t have[2] = {0, 0};
  while (have[0] < per_class || have[1] < per_class) {
    LabeledRow row = label_row(sampler.next());
    if (have[row.label] >= per_class) continue;
    ++have[row.label];
    data.rows.push_back(std::move(row));
  }
  return data;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data, double train_fraction,
                                                        std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw RangeError("train fraction must lie in (0, 1)");
  const std::size_t n = data.rows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto train_size = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  std::pair<LabeledDataset, LabeledDataset> out{LabeledDataset{data.mu, {}}, LabeledDataset{data.mu, {}}};
  out.first.rows.reserve(train_size);
  out.second.rows.reserve(n - train_size);
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_size ? out.first : out.second).rows.push_back(data.rows[order[i]]);
  }
  return out;
}

NetworkConfig NetworkConfig::defaults_for(MemoryLength mu) {
  NetworkConfig cfg;
  if (mu.value() <= 5) {
    cfg.hidden_layers = {32, 16};
    cfg.batch_size = 4;
  } else {
    cfg.hidden_layers = {64, 64, 8};
    cfg.batch_size = 64;
  }
  return cfg;
}

std::string NetworkConfig::to_string() const {
  std::ostringstream out;
  out << "layers=";
  for (std::size_t i = 0; i < hidden_layers.size(); ++i) out << (i ? "," : "") << hidden_layers[i];
  out << " lr=" << learning_rate << " batch=" << batch_size << " epochs=" << epochs << " threshold=" << threshold
      << " seed=" << seed;
  return out.str();
}

Mlp train(const LabeledDataset& data, const NetworkConfig& config,
          const std::function<void(const EpochStats&)>& on_epoch) {
  if (data.rows.empty()) throw DataError("cannot train on an empty dataset");
  if (config.batch_size == 0) throw RangeError("batch size must be positive");
  const std::size_t width = data.rows.front().features.size();
  if (width == 0) throw ArityError("rules of memory " + std::to_string(data.mu.value()) + " have no free features");
  const std::size_t n = data.rows.size();

  std::vector<double> inputs(n * width);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LabeledRow& row = data.rows[i];
    if (row.features.size() != width) throw ArityError("feature vectors differ in length");
    std::copy(row.features.begin(), row.features.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * width));
    targets[i] = row.label;
  }

  std::vector<std::size_t> widths{width};
  widths.insert(widths.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  widths.push_back(1);
  std::mt19937_64 init_rng = derived_stream(config.seed, kInitStream);
  Mlp model = Mlp::initialized(widths, init_rng());
  Adam adam(model.parameter_count(), AdamSettings{config.learning_rate});
  std::mt19937_64 shuffle_rng = derived_stream(config.seed, kShuffleStream);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_x(config.batch_size * width);
  std::vector<double> batch_y(config.batch_size);
  std::vector<double> gradient(model.parameter_count());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t src = order[start + j];
        std::copy_n(inputs.begin() + static_cast<std::ptrdiff_t>(src * width), width,
                    batch_x.begin() + static_cast<std::ptrdiff_t>(j * width));
        batch_y[j] = targets[src];
      }
      const double loss = model.loss_and_gradient(std::span<const double>(batch_x.data(), b * width),
                                                  std::span<const double>(batch_y.data(), b), gradient);
      loss_sum += loss * static_cast<double>(b);
      adam.step(model.parameters(), gradient);
    }
    if (on_epoch) on_epoch(EpochStats{epoch + 1, loss_sum / static_cast<double>(n)});
  }
  return model;
}

Symbol threshold_label(double probability, double threshold) { return probability >= threshold ? 1 : 0; }

Prediction predict(const Mlp& model, const FeatureVector& features, double threshold) {
  const double p = model.predict_one(to_inputs(features));
  return Prediction{p, threshold_label(p, threshold)};
}

MetricsReport MetricsReport::from_counts(const ConfusionCounts& c) {
  MetricsReport r;
  r.counts = c;
  const std::uint64_t total = c.total();
  r.accuracy = ratio(c.tp + c.tn, total);
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.npv = ratio(c.tn, c.tn + c.fn);
  if (r.sensitivity && r.specificity) r.balanced_accuracy = (*r.sensitivity + *r.specificity) / 2.0;
  r.detection_rate = ratio(c.tp, total);
  r.detection_prevalence = ratio(c.tp + c.fp, total);
  r.true_prevalence = ratio(c.tp + c.fn, total);
  const bool one_true_class = (c.tp + c.fn == 0) || (c.tn + c.fp == 0);
  const bool one_predicted_class = (c.tp + c.fp == 0) || (c.tn + c.fn == 0);
  r.degenerate = one_true_class || one_predicted_class;
  return r;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out.precision(6);
  out << "metric,value\n";
  out << "tp," << counts.tp << "\nfp," << counts.fp << "\ntn," << counts.tn << "\nfn," << counts.fn << '\n';
  append_metric(out, "accuracy", accuracy);
  append_metric(out, "sensitivity", sensitivity);
  append_metric(out, "specificity", specificity);
  append_metric(out, "precision", precision);
  append_metric(out, "npv", npv);
  append_metric(out, "balanced_accuracy", balanced_accuracy);
  append_metric(out, "detection_rate", detection_rate);
  append_metric(out, "detection_prevalence", detection_prevalence);
  append_metric(out, "true_prevalence", true_prevalence);
  out << "degenerate," << (degenerate ? 1 : 0) << '\n';
  return out.str();
}

MetricsReport evaluate(const Mlp& model, const LabeledDataset& test, double threshold) {
  if (test.rows.empty()) throw DataError("cannot evaluate on an empty test set");
  const std::size_t width = model.input_width();
  std::vector<double> inputs;
  inputs.reserve(test.rows.size() * width);
  for (const LabeledRow& row : test.rows) {
    if (row.features.size() != width) throw ArityError("test features do not match the model input width");
    inputs.insert(inputs.end(), row.features.begin(), row.features.end());
  }
  const std::vector<double> probs = model.predict(inputs);
  ConfusionCounts c;
  for (std::size_t i = 0; i < test.rows.size(); ++i) {
    const bool predicted = threshold_label(probs[i], threshold) == 1;
    const bool actual = test.rows[i].label == 1;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return MetricsReport::from_counts(c);
}

VerificationResult verify_predictions(const Mlp& model, std::span<const RuleTable> candidates, double threshold) {
  VerificationResult result;
  for (const RuleTable& rule : candidates) {
    ++result.candidates;
    if (!boundary_ok(rule) || !symmetry_ok(rule)) continue;
    if (predict(model, extract_features(rule), threshold).label != 1) continue;
    ++result.predicted_positive;
    if (is_debruijn_rule(rule)) result.confirmed.push_back(rule);
  }
  return result;
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
  out << "rule,label\n";
  for (const LabeledRow& row : data.rows) out << row.rule.to_binary() << ',' << int(row.label) << '\n';
}

LabeledDataset read_dataset_csv(std::istream& in, bool trust_labels) {
  std::string line;
  if (!std::getline(in, line) || line != "rule,label") throw DataError("dataset must start with header 'rule,label'");
  std::optional<LabeledDataset> data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = "dataset line " + std::to_string(line_no);
    if (comma == std::string::npos) throw DataError(where + ": expected 'rule,label'");
    const std::string label_text = line.substr(comma + 1);
    if (label_text != "0" && label_text != "1") throw DataError(where + ": label must be 0 or 1");
    RuleTable rule = [&] {
      try {
        return RuleTable::from_binary(std::string_view(line).substr(0, comma));
      } catch (const Error& e) {
        throw DataError(where + ": " + e.what());
      }
    }();
    if (!data) data = LabeledDataset{rule.mu(), {}};
    if (rule.mu() != data->mu) throw DataError(where + ": rules of different memory lengths");
    const Symbol label = static_cast<Symbol>(label_text[0] - '0');
    if (!boundary_ok(rule) || !symmetry_ok(rule)) {
      throw DataError(where + ": rule " + rule.to_binary() + " lacks the boundary/symmetry structure");
    }
    FeatureVector features = extract_features(rule);
    if (!trust_labels && label != (is_debruijn_rule(rule) ? 1 : 0)) {
      throw DataError(where + ": label " + label_text + " disagrees with the de Bruijn oracle");
    }
    data->rows.push_back(LabeledRow{std::move(rule), std::move(features), label});
  }
  if (!data) throw DataError("dataset has no rows");
  return std::move(*data);
}

}  // namespace dbrules
