#include "dbrules/network.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "dbrules/errors.hpp"

namespace dbrules {

namespace {

using Matrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MutVecMap = Eigen::Map<Eigen::VectorXd>;

constexpr const char* kMagic = "dbrules-mlp";
constexpr int kFormatVersion = 1;

std::size_t count_parameters(const std::vector<std::size_t>& widths) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l + 1] * widths[l] + widths[l + 1];
  return n;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Column-major view of the inputs: one column per sample.
ConstMap batch_view(std::span<const double> inputs, std::size_t width) {
  if (width == 0 || inputs.size() % width != 0) throw ArityError("input size is not a multiple of the input width");
  return ConstMap(inputs.data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(inputs.size() / width));
}

struct Forward {
  std::vector<Matrix> pre;   // z per layer
  std::vector<Matrix> post;  // activation per layer; post[0] is the input
};

Forward forward(const std::vector<std::size_t>& widths, std::span<const double> params, const ConstMap& x) {
  Forward f;
  const std::size_t layers = widths.size() - 1;
  f.post.reserve(layers + 1);
  f.pre.reserve(layers);
  f.post.emplace_back(x);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const auto in = static_cast<Eigen::Index>(widths[l]);
    ConstMap w(params.data() + offset, out, in);
    offset += static_cast<std::size_t>(out * in);
    ConstVecMap b(params.data() + offset, out);
    offset += static_cast<std::size_t>(out);
    Matrix z = w * f.post.back();
    z.colwise() += b;
    if (l + 1 < layers) {
      f.post.emplace_back(z.cwiseMax(0.0));
    } else {
      f.post.emplace_back(z.unaryExpr([](double v) { return sigmoid(v); }));
    }
    f.pre.push_back(std::move(z));
  }
  return f;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2 || widths_.back() != 1) throw ArityError("network needs an input width and one output unit");
  for (std::size_t w : widths_) {
    if (w == 0) throw ArityError("layer widths must be positive");
  }
  params_.assign(count_parameters(widths_), 0.0);
}

Mlp Mlp::initialized(std::vector<std::size_t> widths, std::uint64_t seed) {
  Mlp net(std::move(widths));
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < net.widths_.size(); ++l) {
    const std::size_t in = net.widths_[l];
    const std::size_t out = net.widths_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (std::size_t i = 0; i < in * out; ++i) net.params_[offset + i] = (2.0 * uniform_unit(rng) - 1.0) * limit;
    offset += in * out + out;
  }
  return net;
}

std::vector<double> Mlp::predict(std::span<const double> inputs) const {
  const ConstMap x = batch_view(inputs, input_width());
  const Forward f = forward(widths_, params_, x);
  const Matrix& out = f.post.back();
  return std::vector<double>(out.data(), out.data() + out.size());
}

double Mlp::predict_one(std::span<const double> x) const {
  if (x.size() != input_width()) {
    throw ArityError("feature vector has width " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(input_width()));
  }
  return predict(x).front();
}

double Mlp::loss(std::span<const double> inputs, std::span<const double> targets) const {
  const ConstMap x = batch_view(inputs, input_width());
  if (static_cast<std::size_t>(x.cols()) != targets.size()) throw ArityError("one target per sample required");
  const Forward f = forward(widths_, params_, x);
  const Matrix& z = f.pre.back();
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) total += softplus(z(0, i)) - targets[static_cast<std::size_t>(i)] * z(0, i);
  return total / static_cast<double>(z.cols());
}

double Mlp::loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                              std::span<double> gradient) const {
  const ConstMap x = batch_view(inputs, input_width());
  const auto batch = x.cols();
  if (static_cast<std::size_t>(batch) != targets.size()) throw ArityError("one target per sample required");
  if (gradient.size() != params_.size()) throw ArityError("gradient buffer has the wrong size");
  const Forward f = forward(widths_, params_, x);
  const std::size_t layers = widths_.size() - 1;
  const double scale = 1.0 / static_cast<double>(batch);

  double total = 0.0;
  Matrix delta(1, batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double z = f.pre.back()(0, i);
    const double y = targets[static_cast<std::size_t>(i)];
    total += softplus(z) - y * z;
    delta(0, i) = (f.post.back()(0, i) - y) * scale;
  }

  // Layer offsets, walked backwards.
  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += widths_[l + 1] * widths_[l] + widths_[l + 1];
  }
  for (std::size_t l = layers; l-- > 0;) {
    const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
    const auto in = static_cast<Eigen::Index>(widths_[l]);
    MutMap dw(gradient.data() + offsets[l], out, in);
    MutVecMap db(gradient.data() + offsets[l] + static_cast<std::size_t>(out * in), out);
    dw.noalias() = delta * f.post[l].transpose();
    db = delta.rowwise().sum();
    if (l == 0) break;
    ConstMap w(params_.data() + offsets[l], out, in);
    Matrix back = w.transpose() * delta;
    delta = back.cwiseProduct((f.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return total * scale;
}

void Mlp::save(std::ostream& out) const {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "widths";
  for (std::size_t w : widths_) out << ' ' << w;
  out << '\n' << "parameters " << params_.size() << '\n';
  char buf[64];
  for (double p : params_) {
    std::snprintf(buf, sizeof buf, "%a", p);
    out << buf << '\n';
  }
}

Mlp Mlp::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw DataError("not a dbrules model file");
  if (version != kFormatVersion) throw DataError("unsupported model format version " + std::to_string(version));
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line) || !line.starts_with("widths ")) throw DataError("model file: missing widths line");
  std::vector<std::size_t> widths;
  {
    std::size_t pos = 7;
    while (pos < line.size()) {
      std::size_t used = 0;
      widths.push_back(std::stoul(line.substr(pos), &used));
      pos += used;
      while (pos < line.size() && line[pos] == ' ') ++pos;
    }
  }
  Mlp net(std::move(widths));
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "parameters" || count != net.params_.size()) {
    throw DataError("model file: parameter count does not match the layer widths");
  }
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) throw DataError("model file: truncated parameter list");
    char* end = nullptr;
    net.params_[i] = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw DataError("model file: malformed parameter '" + token + "'");
  }
  return net;
}

Adam::Adam(std::size_t parameter_count, AdamSettings settings)
    : settings_(settings), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> gradient) {
  ++t_;
  const double c1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * gradient[i];
    v_[i] = settings_.beta2 * v_[i] + (1.0 - settings_.beta2) * gradient[i] * gradient[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= settings_.learning_rate * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
  }
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace dbrules
