#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "aed/checkpoint.hpp"
#include "aed/dataset.hpp"
#include "aed/models.hpp"

// Optimization: Adam steps, per-appliance pretraining on the midpoint
// squared error, and the multi-adversarial loop. Each batch updates the
// discriminators in appliance order against detached shared features, then
// applies the accumulated adversarial gradient plus lambda-scaled prediction
// gradient to the shared generator, and the prediction gradient to the
// predictor. The discriminators label shared features 1 and
// appliance-specific features 0; the generator descends its adversarial
// term, so a fooled discriminator settles near 0.5.

namespace aed {

struct TrainConfig {
  double lambda = 0.05;       // trade-off between adversarial and prediction terms
  std::size_t batch_size = 64;
  std::size_t max_epochs = 10;
  std::uint64_t seed = 1;
  bool adversarial = true;    // false = prediction-only ablation
  bool non_saturating = false;
  double disc_lr_scale = 1.0;  // discriminator Adam lr multiplier (game balance)
  double loss_scale = 1.0;    // pretraining objective coefficient
  std::size_t patience = 3;   // epochs without val improvement before stopping; 0 = off
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool shuffle = true;

  void validate() const {
    if (!(lambda > 0.0)) fail(errc::config, "lambda must be > 0");
    if (batch_size < 1) fail(errc::config, "batch size must be >= 1");
    if (max_epochs < 1) fail(errc::config, "max epochs must be >= 1");
    if (!(lr > 0.0)) fail(errc::config, "learning rate must be > 0");
    if (!(loss_scale > 0.0)) fail(errc::config, "loss scale must be > 0");
  }

  // paper-scale settings: batch 1000, 50 epochs, lambda 0.05
  static TrainConfig paper_defaults() {
    TrainConfig cfg;
    cfg.batch_size = 1000;
    cfg.max_epochs = 50;
    cfg.lambda = 0.05;
    return cfg;
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;  // normalized units; multiply by target std for Watts
  std::vector<double> disc_shared_mean;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// ---------------------------------------------------------------------------
// Adam with bias correction.
// ---------------------------------------------------------------------------
template <class T>
struct AdamState {
  double lr = 0.001, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor<T>> m, v;

  static AdamState for_params(const std::vector<NamedParam<T>>& params, const TrainConfig& cfg) {
    AdamState st;
    st.lr = cfg.lr;
    st.beta1 = cfg.beta1;
    st.beta2 = cfg.beta2;
    st.eps = cfg.eps;
    for (const auto& [name, node] : params) {
      st.m.push_back(Tensor<T>::zeros(node->value.shape()));
      st.v.push_back(Tensor<T>::zeros(node->value.shape()));
    }
    return st;
  }
};

template <class T>
void adam_step(const std::vector<NamedParam<T>>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& state) {
  if (grads.size() != params.size())
    fail(errc::shape, "adam_step gradient count " + std::to_string(grads.size()) +
                          " does not cover the " + std::to_string(params.size()) + " parameters");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T one_m_b1 = static_cast<T>(1.0 - state.beta1), one_m_b2 = static_cast<T>(1.0 - state.beta2);
  const T lr = static_cast<T>(state.lr), eps = static_cast<T>(state.eps);
  const T inv_bc1 = static_cast<T>(1.0 / bc1), inv_bc2 = static_cast<T>(1.0 / bc2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Node<T>& p = *params[i].second;
    const Tensor<T>* g = grads[i];
    if (!g || g->numel() == 0)
      fail(errc::shape, "missing gradient for parameter '" + params[i].first + "'");
    if (!g->same_shape(p.value))
      fail(errc::shape, "gradient shape mismatch for parameter '" + params[i].first + "'");
    Tensor<T>& m = state.m[i];
    Tensor<T>& v = state.v[i];
    const std::size_t n = p.value.numel();
    for (std::size_t k = 0; k < n; ++k) {
      const T gk = (*g)[k];
      m[k] = b1 * m[k] + one_m_b1 * gk;
      v[k] = b2 * v[k] + one_m_b2 * gk * gk;
      const T mhat = m[k] * inv_bc1;
      const T vhat = v[k] * inv_bc2;
      p.value[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

// Gradients of a parameter list after backward(); every parameter must have
// been reached.
template <class T>
std::vector<const Tensor<T>*> collect_grads(const std::vector<NamedParam<T>>& params) {
  std::vector<const Tensor<T>*> out;
  out.reserve(params.size());
  for (const auto& [name, node] : params) {
    if (node->grad.numel() == 0) fail(errc::shape, "missing gradient for parameter '" + name + "'");
    out.push_back(&node->grad);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------
namespace detail {

template <class T>
struct BatchTensors {
  NodePtr<T> input;   // (B, W)
  NodePtr<T> target;  // (B)
};

template <class T>
BatchTensors<T> load_batch(const WindowedDataset& ds, std::span<const std::size_t> ids) {
  Tensor<T> windows, targets;
  ds.gather(ids, windows, targets);
  return {make_input(std::move(windows)), make_constant(std::move(targets))};
}

inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                           bool shuffle, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t at = 0; at < n; at += batch_size) {
    const std::size_t take = std::min(batch_size, n - at);
    batches.emplace_back(order.begin() + at, order.begin() + at + take);
  }
  return batches;
}

}  // namespace detail

// Mean absolute error (normalized units) of the model over a dataset,
// evaluation mode.
template <class T>
double eval_normalized_mae(Generator<T>& g, const Predictor<T>& c, const WindowedDataset& ds,
                           std::size_t batch_size = 256) {
  double abs_sum = 0.0;
  std::vector<std::size_t> ids;
  for (std::size_t at = 0; at < ds.num_windows(); at += batch_size) {
    const std::size_t take = std::min(batch_size, ds.num_windows() - at);
    ids.resize(take);
    for (std::size_t i = 0; i < take; ++i) ids[i] = at + i;
    auto batch = detail::load_batch<T>(ds, ids);
    auto pred = c.forward(g.forward(batch.input));
    for (std::size_t i = 0; i < take; ++i)
      abs_sum += std::fabs(static_cast<double>(pred->value[i]) -
                           static_cast<double>(batch.target->value[i]));
  }
  return abs_sum / static_cast<double>(ds.num_windows());
}

// Predictions (normalized units) for every full window of a normalized mains
// sequence at stride 1, i.e. indices W/2 .. T-1-W/2.
template <class T>
std::vector<double> predict_midpoints(Generator<T>& g, const Predictor<T>& c,
                                      std::span<const double> mains_norm,
                                      std::size_t batch_size = 256) {
  const std::size_t w = g.window;
  if (mains_norm.size() < w)
    fail(errc::config, "mains length " + std::to_string(mains_norm.size()) +
                           " shorter than window " + std::to_string(w));
  const std::size_t count = mains_norm.size() - w + 1;
  std::vector<double> out(count);
  for (std::size_t at = 0; at < count; at += batch_size) {
    const std::size_t take = std::min(batch_size, count - at);
    Tensor<T> windows = Tensor<T>::zeros({take, w});
    for (std::size_t r = 0; r < take; ++r)
      for (std::size_t i = 0; i < w; ++i)
        windows[r * w + i] = static_cast<T>(mains_norm[at + r + i]);
    auto pred = c.forward(g.forward(make_input(std::move(windows))));
    for (std::size_t r = 0; r < take; ++r) out[at + r] = static_cast<double>(pred->value[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Appliance-specific pretraining: minimize loss_scale * mean squared error of
// the normalized midpoint prediction. Returns the best-validation parameters.
// ---------------------------------------------------------------------------
template <class T>
struct PretrainResult {
  Generator<T> generator;
  Predictor<T> predictor;
  std::vector<EpochStats> epochs;
  double best_val_mae = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  bool diverged = false;
  std::string divergence_note;
};

template <class T>
PretrainResult<T> pretrain_appliance(const WindowedDataset& train, const WindowedDataset& val,
                                     const ModelConfig& mcfg, const TrainConfig& tcfg,
                                     const EpochCallback& callback = {}) {
  tcfg.validate();
  if (train.num_windows() == 0) fail(errc::config, "pretrain dataset is empty");

  PretrainResult<T> res;
  res.generator = build_generator<T>(mcfg.window, mcfg, derive_seed(tcfg.seed, 1));
  res.predictor = build_predictor<T>(res.generator.feature_len(), mcfg, derive_seed(tcfg.seed, 2));
  auto g_params = res.generator.params();
  auto c_params = res.predictor.params();
  auto g_adam = AdamState<T>::for_params(g_params, tcfg);
  auto c_adam = AdamState<T>::for_params(c_params, tcfg);
  std::mt19937_64 shuffle_rng(derive_seed(tcfg.seed, 3));
  std::mt19937_64 dropout_rng(derive_seed(tcfg.seed, 4));

  std::vector<NamedParam<T>> best_g = clone_params(g_params);
  std::vector<NamedParam<T>> best_c = clone_params(c_params);

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches =
        detail::epoch_batches(train.num_windows(), tcfg.batch_size, tcfg.shuffle, shuffle_rng);
    double loss_sum = 0.0;
    for (const auto& ids : batches) {
      auto batch = detail::load_batch<T>(train, ids);
      auto feats = res.generator.forward(batch.input, /*training=*/true);
      auto pred = res.predictor.forward(feats, /*training=*/true, &dropout_rng);
      auto diff = sub(pred, batch.target);
      auto loss = scale(mean(mul(diff, diff)), tcfg.loss_scale);
      const double loss_value = static_cast<double>(loss->value[0]);
      if (!std::isfinite(loss_value)) {
        res.diverged = true;
        res.divergence_note = "non-finite pretraining loss in epoch " + std::to_string(epoch);
        copy_param_values(best_g, g_params);
        copy_param_values(best_c, c_params);
        return res;
      }
      loss_sum += loss_value;
      backward(loss);
      adam_step(g_params, collect_grads(g_params), g_adam);
      adam_step(c_params, collect_grads(c_params), c_adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches.size());
    stats.val_mae = eval_normalized_mae(res.generator, res.predictor, val);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.epochs.push_back(stats);
    if (callback) callback(stats);

    if (stats.val_mae < res.best_val_mae) {
      res.best_val_mae = stats.val_mae;
      res.best_epoch = epoch;
      best_g = clone_params(g_params);
      best_c = clone_params(c_params);
    } else if (tcfg.patience > 0 && epoch - res.best_epoch >= tcfg.patience) {
      break;
    }
  }
  copy_param_values(best_g, g_params);
  copy_param_values(best_c, c_params);
  return res;
}

// ---------------------------------------------------------------------------
// Multi-adversarial training of the shared generator.
// ---------------------------------------------------------------------------
template <class T>
struct AdversarialResult {
  Generator<T> generator;
  Predictor<T> predictor;
  std::vector<Discriminator<T>> discriminators;
  std::vector<EpochStats> epochs;
  std::vector<double> final_disc_shared_mean;  // per discriminator, on val windows
  double final_val_mae = 0.0;                  // normalized
  bool diverged = false;
  std::string divergence_note;
};

// Frozen extractors enter as read-only values; their parameters are copied
// into constant graph nodes so no gradient work is spent on them.
template <class T>
Generator<T> freeze(const Generator<T>& g) {
  Generator<T> out = g;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    out.conv_w[l] = make_constant(g.conv_w[l]->value);
    out.conv_b[l] = make_constant(g.conv_b[l]->value);
    if (g.use_batchnorm) {
      out.bn_gamma[l] = make_constant(g.bn_gamma[l]->value);
      out.bn_beta[l] = make_constant(g.bn_beta[l]->value);
    }
  }
  return out;
}

// Mean discriminator output on shared features over a dataset (eval mode).
template <class T>
std::vector<double> discriminator_shared_means(Generator<T>& g,
                                               std::vector<Discriminator<T>>& discs,
                                               const WindowedDataset& ds,
                                               std::size_t batch_size = 256) {
  std::vector<double> sums(discs.size(), 0.0);
  std::vector<std::size_t> ids;
  for (std::size_t at = 0; at < ds.num_windows(); at += batch_size) {
    const std::size_t take = std::min(batch_size, ds.num_windows() - at);
    ids.resize(take);
    for (std::size_t i = 0; i < take; ++i) ids[i] = at + i;
    auto batch = detail::load_batch<T>(ds, ids);
    auto feats = g.forward(batch.input);
    for (std::size_t j = 0; j < discs.size(); ++j) {
      auto p = discs[j].forward(feats);
      for (std::size_t i = 0; i < take; ++i) sums[j] += static_cast<double>(p->value[i]);
    }
  }
  for (double& s : sums) s /= static_cast<double>(ds.num_windows());
  return sums;
}

template <class T>
AdversarialResult<T> train_adversarial(const WindowedDataset& train, const WindowedDataset& val,
                                       const std::vector<Generator<T>>& pretrained,
                                       const ModelConfig& mcfg, const TrainConfig& tcfg,
                                       const Generator<T>* warm_generator = nullptr,
                                       const Predictor<T>* warm_predictor = nullptr,
                                       const EpochCallback& callback = {}) {
  tcfg.validate();
  if (train.num_windows() == 0) fail(errc::config, "training dataset is empty");
  const std::size_t n_disc = pretrained.size();
  if (tcfg.adversarial && n_disc == 0)
    fail(errc::config, "adversarial training needs at least one pretrained extractor");

  AdversarialResult<T> res;
  res.generator = warm_generator ? clone(*warm_generator)
                                 : build_generator<T>(mcfg.window, mcfg, derive_seed(tcfg.seed, 1));
  if (res.generator.window != mcfg.window)
    fail(errc::shape, "warm-start generator window does not match the configuration");
  res.predictor =
      warm_predictor
          ? clone(*warm_predictor)
          : build_predictor<T>(res.generator.feature_len(), mcfg, derive_seed(tcfg.seed, 2));

  std::vector<Generator<T>> frozen;
  for (const auto& g : pretrained) {
    if (g.window != res.generator.window)
      fail(errc::shape, "pretrained extractor window does not match the shared generator");
    frozen.push_back(freeze(g));
  }

  auto g_params = res.generator.params();
  auto c_params = res.predictor.params();
  auto g_adam = AdamState<T>::for_params(g_params, tcfg);
  auto c_adam = AdamState<T>::for_params(c_params, tcfg);

  std::vector<std::vector<NamedParam<T>>> d_params;
  std::vector<AdamState<T>> d_adam;
  if (tcfg.adversarial) {
    TrainConfig dcfg = tcfg;
    dcfg.lr = tcfg.lr * tcfg.disc_lr_scale;
    for (std::size_t j = 0; j < n_disc; ++j) {
      res.discriminators.push_back(build_discriminator<T>(res.generator.feature_len(), mcfg,
                                                          derive_seed(tcfg.seed, 10 + j)));
      d_params.push_back(res.discriminators.back().params());
      d_adam.push_back(AdamState<T>::for_params(d_params.back(), dcfg));
    }
  }

  std::mt19937_64 shuffle_rng(derive_seed(tcfg.seed, 3));
  std::mt19937_64 dropout_rng(derive_seed(tcfg.seed, 4));
  auto one = make_constant(Tensor<T>::scalar(T(1)));

  auto snapshot_g = clone_params(g_params);
  auto snapshot_c = clone_params(c_params);
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto batches =
        detail::epoch_batches(train.num_windows(), tcfg.batch_size, tcfg.shuffle, shuffle_rng);
    double loss_sum = 0.0;
    std::vector<double> disc_sums(n_disc, 0.0);

    for (const auto& ids : batches) {
      auto batch = detail::load_batch<T>(train, ids);
      auto shared = res.generator.forward(batch.input, /*training=*/true);

      std::vector<NodePtr<T>> g_terms;
      if (tcfg.adversarial) {
        auto shared_frozen = detach(shared);
        for (std::size_t j = 0; j < n_disc; ++j) {
          // discriminator ascends log D(shared) + log(1 - D(specific))
          auto specific = frozen[j].forward(batch.input);
          auto p_shared = res.discriminators[j].forward(shared_frozen, true, &dropout_rng);
          auto p_specific = res.discriminators[j].forward(specific, true, &dropout_rng);
          auto d_gain = add(mean(log_op(p_shared)), mean(log_op(sub(one, p_specific))));
          auto d_loss = scale(d_gain, -1.0);
          if (!std::isfinite(static_cast<double>(d_loss->value[0]))) {
            res.diverged = true;
            res.divergence_note =
                "non-finite discriminator loss in epoch " + std::to_string(epoch);
            copy_param_values(snapshot_g, g_params);
            copy_param_values(snapshot_c, c_params);
            return res;
          }
          backward(d_loss);
          adam_step(d_params[j], collect_grads(d_params[j]), d_adam[j]);

          // generator term against the just-updated discriminator
          auto p_adv = res.discriminators[j].forward(shared, true, &dropout_rng);
          for (std::size_t i = 0; i < p_adv->value.numel(); ++i)
            disc_sums[j] += static_cast<double>(p_adv->value[i]);
          if (tcfg.non_saturating)
            g_terms.push_back(scale(mean(log_op(sub(one, p_adv))), -1.0));
          else
            g_terms.push_back(mean(log_op(p_adv)));
        }
      }

      auto pred = res.predictor.forward(shared, /*training=*/true, &dropout_rng);
      auto diff = sub(pred, batch.target);
      auto total = scale(mean(mul(diff, diff)), tcfg.lambda);
      for (auto& term : g_terms) total = add(total, term);

      const double loss_value = static_cast<double>(total->value[0]);
      if (!std::isfinite(loss_value)) {
        res.diverged = true;
        res.divergence_note = "non-finite training loss in epoch " + std::to_string(epoch);
        copy_param_values(snapshot_g, g_params);
        copy_param_values(snapshot_c, c_params);
        return res;
      }
      loss_sum += loss_value;
      backward(total);
      adam_step(g_params, collect_grads(g_params), g_adam);
      adam_step(c_params, collect_grads(c_params), c_adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches.size());
    stats.val_mae = eval_normalized_mae(res.generator, res.predictor, val);
    const double denom = static_cast<double>(train.num_windows());
    for (std::size_t j = 0; j < n_disc; ++j)
      stats.disc_shared_mean.push_back(disc_sums[j] / denom);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.epochs.push_back(stats);
    if (callback) callback(stats);

    snapshot_g = clone_params(g_params);
    snapshot_c = clone_params(c_params);
    if (stats.val_mae < best_val) {
      best_val = stats.val_mae;
      best_epoch = epoch;
    } else if (tcfg.patience > 0 && epoch - best_epoch >= tcfg.patience) {
      break;
    }
  }

  res.final_val_mae = eval_normalized_mae(res.generator, res.predictor, val);
  if (tcfg.adversarial)
    res.final_disc_shared_mean =
        discriminator_shared_means(res.generator, res.discriminators, val);
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint bridges for the three roles.
// ---------------------------------------------------------------------------
template <class T>
RawCheckpoint generator_checkpoint(Generator<T>& g,
                                   std::vector<std::pair<std::string, std::string>> meta = {}) {
  meta.push_back({"window", std::to_string(g.window)});
  meta.push_back({"batchnorm", g.use_batchnorm ? "1" : "0"});
  return make_checkpoint<T>("generator", g.params(), g.buffers(), std::move(meta));
}

template <class T>
Generator<T> generator_from_checkpoint(const RawCheckpoint& ckpt, const ModelConfig& mcfg) {
  if (ckpt.role != "generator")
    fail(errc::checkpoint, "expected a generator checkpoint, found role '" + ckpt.role + "'");
  std::size_t window = 0;
  bool batchnorm = false;
  for (const auto& [k, v] : ckpt.meta) {
    if (k == "window") window = static_cast<std::size_t>(std::stoull(v));
    if (k == "batchnorm") batchnorm = (v == "1");
  }
  if (window == 0) fail(errc::checkpoint, "generator checkpoint lacks window metadata");
  ModelConfig cfg = mcfg;
  cfg.batchnorm = batchnorm;
  Generator<T> g = build_generator<T>(window, cfg, 0);
  restore_params(ckpt, g.params(), g.buffers());
  return g;
}

template <class T>
RawCheckpoint dense_checkpoint(const char* role, const DenseStack<T>& stack,
                               std::vector<std::pair<std::string, std::string>> meta = {}) {
  std::vector<NamedParam<T>> params;
  stack.collect_params("fc", params);
  meta.push_back({"in_width", std::to_string(stack.in_width())});
  std::string widths;
  for (std::size_t l = 0; l + 1 < stack.w.size(); ++l) {
    if (!widths.empty()) widths += ",";
    widths += std::to_string(stack.w[l]->value.dim(0));
  }
  meta.push_back({"hidden", widths});
  return make_checkpoint<T>(role, params, {}, std::move(meta));
}

template <class T>
RawCheckpoint predictor_checkpoint(const Predictor<T>& p,
                                   std::vector<std::pair<std::string, std::string>> meta = {}) {
  return dense_checkpoint<T>("predictor", p.stack, std::move(meta));
}

template <class T>
RawCheckpoint discriminator_checkpoint(const Discriminator<T>& d,
                                       std::vector<std::pair<std::string, std::string>> meta = {}) {
  return dense_checkpoint<T>("discriminator", d.stack, std::move(meta));
}

namespace detail {

inline std::vector<std::size_t> parse_widths(const std::string& csv) {
  std::vector<std::size_t> out;
  std::size_t at = 0;
  while (at < csv.size()) {
    std::size_t comma = csv.find(',', at);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(static_cast<std::size_t>(std::stoull(csv.substr(at, comma - at))));
    at = comma + 1;
  }
  return out;
}

}  // namespace detail

template <class T>
Predictor<T> predictor_from_checkpoint(const RawCheckpoint& ckpt, const ModelConfig& mcfg) {
  if (ckpt.role != "predictor")
    fail(errc::checkpoint, "expected a predictor checkpoint, found role '" + ckpt.role + "'");
  std::size_t in_width = 0;
  ModelConfig cfg = mcfg;
  for (const auto& [k, v] : ckpt.meta) {
    if (k == "in_width") in_width = static_cast<std::size_t>(std::stoull(v));
    if (k == "hidden") cfg.predictor_hidden = detail::parse_widths(v);
  }
  if (in_width == 0) fail(errc::checkpoint, "predictor checkpoint lacks width metadata");
  Predictor<T> p = build_predictor<T>(in_width, cfg, 0);
  restore_params(ckpt, p.params());
  return p;
}

template <class T>
Discriminator<T> discriminator_from_checkpoint(const RawCheckpoint& ckpt, const ModelConfig& mcfg) {
  if (ckpt.role != "discriminator")
    fail(errc::checkpoint, "expected a discriminator checkpoint, found role '" + ckpt.role + "'");
  std::size_t in_width = 0;
  ModelConfig cfg = mcfg;
  for (const auto& [k, v] : ckpt.meta) {
    if (k == "in_width") in_width = static_cast<std::size_t>(std::stoull(v));
    if (k == "hidden") cfg.discriminator_hidden = detail::parse_widths(v);
  }
  if (in_width == 0) fail(errc::checkpoint, "discriminator checkpoint lacks width metadata");
  Discriminator<T> d = build_discriminator<T>(in_width, cfg, 0);
  restore_params(ckpt, d.params());
  return d;
}

}  // namespace aed
