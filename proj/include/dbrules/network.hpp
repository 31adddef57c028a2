#pragma once

// Small fully-connected binary classifier: ReLU hidden layers and one sigmoid
// output unit, trained on mean binary cross-entropy with Adam.
//
// All parameters live in one flat vector. Layer l stores its weight matrix
// (outputs x inputs, column-major) followed by its bias vector.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace dbrules {

class Mlp {
 public:
  // widths = {inputs, hidden..., 1}. Parameters start at zero.
  explicit Mlp(std::vector<std::size_t> widths);

  // Weights uniform in +-sqrt(6 / fan_in), biases zero.
  static Mlp initialized(std::vector<std::size_t> widths, std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Sigmoid output for each row of `inputs` (row-major, rows x input_width).
  std::vector<double> predict(std::span<const double> inputs) const;
  double predict_one(std::span<const double> x) const;

  // Mean binary cross-entropy over the batch; writes d(loss)/d(params) into
  // `gradient`, which must have parameter_count() entries.
  double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                           std::span<double> gradient) const;
  double loss(std::span<const double> inputs, std::span<const double> targets) const;

  // Versioned text format; weights are written as hex floats so a reload is
  // bit-identical.
  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<std::size_t> widths_;
  std::vector<double> params_;
};

struct AdamSettings {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t parameter_count, AdamSettings settings = {});
  void step(std::span<double> params, std::span<const double> gradient);

 private:
  AdamSettings settings_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

// Portable draws from a 64-bit engine (the standard distributions are
// implementation-defined, which would make seeded output platform-specific).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);
double uniform_unit(std::mt19937_64& rng);

}  // namespace dbrules
