#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aed/graph.hpp"
#include "aed/rng.hpp"

// The three network roles. The feature generator is a fixed four-conv stack
// with two max pools; predictor and discriminator are small dense stacks on
// top of its flattened features.

namespace aed {

struct ModelConfig {
  std::size_t window = 599;
  std::vector<std::size_t> predictor_hidden = {1024, 128};
  std::vector<std::size_t> discriminator_hidden = {256, 64};
  bool batchnorm = false;   // after each conv layer
  bool dropout = false;     // after each dense hidden layer
  double dropout_p = 0.1;
};

// conv stack: kernels {7,5,5,3}, channels {30,40,40,50}, pads {3,2,2,1},
// pool(3) after conv1 and pool(2) after conv4
inline constexpr std::size_t kConvLayers = 4;
inline constexpr std::size_t kConvKernel[kConvLayers] = {7, 5, 5, 3};
inline constexpr std::size_t kConvChannels[kConvLayers] = {30, 40, 40, 50};
inline constexpr std::size_t kPoolAfterFirst = 3;
inline constexpr std::size_t kPoolAfterLast = 2;
inline constexpr std::size_t kMinWindow = 27;

// 50 * floor(floor(W/3) / 2); W must be odd and >= 27
inline std::size_t generator_feature_len(std::size_t window) {
  if (window < kMinWindow)
    fail(errc::config, "window must be >= " + std::to_string(kMinWindow) + ", got " +
                           std::to_string(window));
  if (window % 2 == 0)
    fail(errc::config, "window must be odd so the midpoint is a sample, got " +
                           std::to_string(window));
  return kConvChannels[kConvLayers - 1] * ((window / kPoolAfterFirst) / kPoolAfterLast);
}

template <class T>
using NamedParam = std::pair<std::string, NodePtr<T>>;

template <class T>
struct Generator {
  std::size_t window = 0;
  bool use_batchnorm = false;
  std::array<NodePtr<T>, kConvLayers> conv_w;
  std::array<NodePtr<T>, kConvLayers> conv_b;
  std::array<NodePtr<T>, kConvLayers> bn_gamma;  // batchnorm only
  std::array<NodePtr<T>, kConvLayers> bn_beta;
  std::array<Tensor<T>, kConvLayers> bn_mean;    // running buffers
  std::array<Tensor<T>, kConvLayers> bn_var;

  std::size_t feature_len() const { return generator_feature_len(window); }

  // windows: (batch, W) -> features: (batch, feature_len)
  NodePtr<T> forward(const NodePtr<T>& windows, bool training = false) {
    if (windows->value.rank() != 2 || windows->value.dim(1) != window)
      fail(errc::shape, "generator expects (batch, " + std::to_string(window) + ") windows, got " +
                            windows->value.shape_string());
    const std::size_t batch = windows->value.dim(0);
    auto h = reshape(windows, {batch, std::size_t(1), window});
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      h = conv1d(h, conv_w[l], conv_b[l], kConvKernel[l] / 2);
      if (use_batchnorm) h = batchnorm1d(h, bn_gamma[l], bn_beta[l], bn_mean[l], bn_var[l], training);
      h = relu(h);
      if (l == 0) h = maxpool1d(h, kPoolAfterFirst);
      if (l == kConvLayers - 1) h = maxpool1d(h, kPoolAfterLast);
    }
    return flatten_rows(h);
  }

  std::vector<NamedParam<T>> params() const {
    std::vector<NamedParam<T>> out;
    for (std::size_t l = 0; l < kConvLayers; ++l) {
      const std::string base = "conv" + std::to_string(l + 1);
      out.push_back({base + ".weight", conv_w[l]});
      out.push_back({base + ".bias", conv_b[l]});
      if (use_batchnorm) {
        out.push_back({"bn" + std::to_string(l + 1) + ".gamma", bn_gamma[l]});
        out.push_back({"bn" + std::to_string(l + 1) + ".beta", bn_beta[l]});
      }
    }
    return out;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> buffers() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    if (use_batchnorm)
      for (std::size_t l = 0; l < kConvLayers; ++l) {
        out.push_back({"bn" + std::to_string(l + 1) + ".running_mean", &bn_mean[l]});
        out.push_back({"bn" + std::to_string(l + 1) + ".running_var", &bn_var[l]});
      }
    return out;
  }
};

// Dense stack shared by predictor and discriminator.
template <class T>
struct DenseStack {
  std::vector<NodePtr<T>> w;
  std::vector<NodePtr<T>> b;
  bool use_dropout = false;
  double dropout_p = 0.1;

  std::size_t in_width() const { return w.front()->value.dim(1); }

  // hidden layers with ReLU; final layer linear. Dropout masks come from
  // *dropout_rng when training with dropout enabled (inverted scaling).
  NodePtr<T> hidden_forward(NodePtr<T> h, bool training, std::mt19937_64* dropout_rng) const {
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      h = relu(dense(h, w[l], b[l]));
      if (use_dropout && training && dropout_rng) {
        Tensor<T> mask = Tensor<T>::zeros(h->value.shape());
        std::bernoulli_distribution keep(1.0 - dropout_p);
        const T inv = static_cast<T>(1.0 / (1.0 - dropout_p));
        for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = keep(*dropout_rng) ? inv : T(0);
        h = mul(h, make_constant(std::move(mask)));
      }
    }
    return dense(h, w.back(), b.back());
  }

  void collect_params(const std::string& prefix, std::vector<NamedParam<T>>& out) const {
    for (std::size_t l = 0; l < w.size(); ++l) {
      out.push_back({prefix + std::to_string(l + 1) + ".weight", w[l]});
      out.push_back({prefix + std::to_string(l + 1) + ".bias", b[l]});
    }
  }
};

template <class T>
struct Predictor {
  DenseStack<T> stack;

  // features: (batch, F) -> predictions: (batch)
  NodePtr<T> forward(const NodePtr<T>& features, bool training = false,
                     std::mt19937_64* dropout_rng = nullptr) const {
    auto out = stack.hidden_forward(features, training, dropout_rng);
    return reshape(out, {out->value.dim(0)});
  }

  std::vector<NamedParam<T>> params() const {
    std::vector<NamedParam<T>> out;
    stack.collect_params("fc", out);
    return out;
  }
};

template <class T>
struct Discriminator {
  DenseStack<T> stack;

  // features: (batch, F) -> probabilities in (0,1): (batch)
  NodePtr<T> forward(const NodePtr<T>& features, bool training = false,
                     std::mt19937_64* dropout_rng = nullptr) const {
    auto out = sigmoid(stack.hidden_forward(features, training, dropout_rng));
    return reshape(out, {out->value.dim(0)});
  }

  std::vector<NamedParam<T>> params() const {
    std::vector<NamedParam<T>> out;
    stack.collect_params("fc", out);
    return out;
  }
};

// Parameters start as scaled normal noise, std sqrt(2/fan_in); biases zero.
// Deterministic per seed.
template <class T>
Generator<T> build_generator(std::size_t window, const ModelConfig& cfg, std::uint64_t seed) {
  generator_feature_len(window);  // validates window
  Generator<T> g;
  g.window = window;
  g.use_batchnorm = cfg.batchnorm;
  std::size_t cin = 1;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const std::size_t cout = kConvChannels[l];
    const std::size_t k = kConvKernel[l];
    const T stddev = static_cast<T>(std::sqrt(2.0 / static_cast<double>(cin * k)));
    g.conv_w[l] = make_param(Tensor<T>::randn({cout, cin, k}, stddev, derive_seed(seed, l)),
                             "conv" + std::to_string(l + 1) + ".weight");
    g.conv_b[l] =
        make_param(Tensor<T>::zeros({cout}), "conv" + std::to_string(l + 1) + ".bias");
    if (cfg.batchnorm) {
      g.bn_gamma[l] = make_param(Tensor<T>::full({cout}, T(1)),
                                 "bn" + std::to_string(l + 1) + ".gamma");
      g.bn_beta[l] =
          make_param(Tensor<T>::zeros({cout}), "bn" + std::to_string(l + 1) + ".beta");
      g.bn_mean[l] = Tensor<T>::zeros({cout});
      g.bn_var[l] = Tensor<T>::full({cout}, T(1));
    }
    cin = cout;
  }
  return g;
}

namespace detail {

template <class T>
DenseStack<T> build_stack(std::size_t in_width, const std::vector<std::size_t>& hidden,
                          std::size_t out_width, const ModelConfig& cfg, std::uint64_t seed) {
  DenseStack<T> s;
  s.use_dropout = cfg.dropout;
  s.dropout_p = cfg.dropout_p;
  std::size_t n = in_width;
  std::vector<std::size_t> widths = hidden;
  widths.push_back(out_width);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::size_t m = widths[l];
    const T stddev = static_cast<T>(std::sqrt(2.0 / static_cast<double>(n)));
    s.w.push_back(make_param(Tensor<T>::randn({m, n}, stddev, derive_seed(seed, 100 + l)),
                             "fc" + std::to_string(l + 1) + ".weight"));
    s.b.push_back(make_param(Tensor<T>::zeros({m}), "fc" + std::to_string(l + 1) + ".bias"));
    n = m;
  }
  return s;
}

}  // namespace detail

template <class T>
Predictor<T> build_predictor(std::size_t feature_len, const ModelConfig& cfg, std::uint64_t seed) {
  if (feature_len == 0) fail(errc::config, "predictor needs a positive feature length");
  Predictor<T> p;
  p.stack = detail::build_stack<T>(feature_len, cfg.predictor_hidden, 1, cfg, seed);
  return p;
}

template <class T>
Discriminator<T> build_discriminator(std::size_t feature_len, const ModelConfig& cfg,
                                     std::uint64_t seed) {
  if (feature_len == 0) fail(errc::config, "discriminator needs a positive feature length");
  Discriminator<T> d;
  d.stack = detail::build_stack<T>(feature_len, cfg.discriminator_hidden, 1, cfg, seed);
  return d;
}

// Deep copies: fresh parameter nodes with copied tensors.
template <class T>
std::vector<NamedParam<T>> clone_params(const std::vector<NamedParam<T>>& params) {
  std::vector<NamedParam<T>> out;
  out.reserve(params.size());
  for (const auto& [name, node] : params) out.push_back({name, make_param(node->value, name)});
  return out;
}

template <class T>
void copy_param_values(const std::vector<NamedParam<T>>& from,
                       const std::vector<NamedParam<T>>& to) {
  if (from.size() != to.size()) fail(errc::shape, "parameter count mismatch in copy");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!from[i].second->value.same_shape(to[i].second->value))
      fail(errc::shape, "parameter shape mismatch in copy: " + from[i].first);
    to[i].second->value = from[i].second->value;
  }
}

template <class T>
Generator<T> clone(const Generator<T>& g) {
  Generator<T> out = g;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    out.conv_w[l] = make_param(g.conv_w[l]->value, g.conv_w[l]->name);
    out.conv_b[l] = make_param(g.conv_b[l]->value, g.conv_b[l]->name);
    if (g.use_batchnorm) {
      out.bn_gamma[l] = make_param(g.bn_gamma[l]->value, g.bn_gamma[l]->name);
      out.bn_beta[l] = make_param(g.bn_beta[l]->value, g.bn_beta[l]->name);
    }
  }
  return out;
}

template <class T>
Predictor<T> clone(const Predictor<T>& p) {
  Predictor<T> out = p;
  for (std::size_t l = 0; l < p.stack.w.size(); ++l) {
    out.stack.w[l] = make_param(p.stack.w[l]->value, p.stack.w[l]->name);
    out.stack.b[l] = make_param(p.stack.b[l]->value, p.stack.b[l]->name);
  }
  return out;
}

template <class T>
Discriminator<T> clone(const Discriminator<T>& d) {
  Discriminator<T> out = d;
  for (std::size_t l = 0; l < d.stack.w.size(); ++l) {
    out.stack.w[l] = make_param(d.stack.w[l]->value, d.stack.w[l]->name);
    out.stack.b[l] = make_param(d.stack.b[l]->value, d.stack.b[l]->name);
  }
  return out;
}

}  // namespace aed
