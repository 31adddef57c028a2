#pragma once

// Learning which feasible rules are de Bruijn rules.
//
// Features are the free bits of the first half of a structured rule
// (positions 2 .. 2^(mu-1) - 1); everything else is fixed by the boundary and
// complement-symmetry filters. Labels always come from the exact oracle.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dbrules/network.hpp"
#include "dbrules/rule.hpp"

namespace dbrules {

using FeatureVector = std::vector<Symbol>;

std::size_t feature_width(MemoryLength mu);

// Throws StructureError unless the rule passes boundary_ok and symmetry_ok.
FeatureVector extract_features(const RuleTable& rule);

struct LabeledRow {
  RuleTable rule;
  FeatureVector features;
  Symbol label;
};

struct LabeledDataset {
  MemoryLength mu;
  std::vector<LabeledRow> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t positives() const;
};

struct SampledSource {
  std::size_t rows = 200000;
  bool balance = true;
  std::uint64_t seed = 1;
};

// Limit for exhaustive datasets; above it only sampling is offered.
inline constexpr int kExhaustiveDatasetMu = 5;

// Every feasible rule with its oracle label. Throws CapacityError above mu = 5.
LabeledDataset build_dataset_exhaustive(MemoryLength mu);
// Draws from the feasible sampler and labels each draw. With balance, keeps
// drawing until each class holds rows / 2 entries, discarding surplus draws.
LabeledDataset build_dataset_sampled(MemoryLength mu, const SampledSource& source);

// Seeded permutation, then the first floor(fraction * n) rows train.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& data, double train_fraction,
                                                        std::uint64_t seed);

struct NetworkConfig {
  std::vector<std::size_t> hidden_layers;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double threshold = 0.5;
  std::uint64_t seed = 1;

  // [32, 16] / batch 4 for mu <= 5, [64, 64, 8] / batch 64 above.
  static NetworkConfig defaults_for(MemoryLength mu);
  std::string to_string() const;
};

struct EpochStats {
  std::size_t epoch;
  double mean_loss;
};

// Deterministic for a fixed (data, config): weight init and epoch shuffling use
// separate streams derived from config.seed. Throws DataError on an empty set.
Mlp train(const LabeledDataset& data, const NetworkConfig& config,
          const std::function<void(const EpochStats&)>& on_epoch = {});

struct Prediction {
  double probability;
  Symbol label;
};

// label = 1 iff probability >= threshold.
Symbol threshold_label(double probability, double threshold);
// Throws ArityError when the feature width differs from the model input.
Prediction predict(const Mlp& model, const FeatureVector& features, double threshold = 0.5);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Positive class is de Bruijn. A metric whose denominator is zero is absent.
struct MetricsReport {
  ConfusionCounts counts;
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> npv;
  std::optional<double> balanced_accuracy;
  std::optional<double> detection_rate;
  std::optional<double> detection_prevalence;
  std::optional<double> true_prevalence;
  // True when the test set or the predictions contain a single class.
  bool degenerate = false;

  static MetricsReport from_counts(const ConfusionCounts& counts);
  std::string to_csv() const;
};

// Throws DataError on an empty test set.
MetricsReport evaluate(const Mlp& model, const LabeledDataset& test, double threshold = 0.5);

struct VerificationResult {
  std::vector<RuleTable> confirmed;
  std::size_t candidates = 0;
  std::size_t predicted_positive = 0;
};

// Runs the exact oracle on every predicted-positive candidate and keeps only
// confirmed de Bruijn rules. Candidates without the boundary/symmetry
// structure are predicted negative.
VerificationResult verify_predictions(const Mlp& model, std::span<const RuleTable> candidates,
                                      double threshold = 0.5);

// "rule,label" CSV with the full binary rule string.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
// Features are re-derived. Unless `trust_labels`, each label is checked against
// the oracle and a mismatch throws DataError.
LabeledDataset read_dataset_csv(std::istream& in, bool trust_labels = false);

}  // namespace dbrules
