#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "aed/kernels.hpp"
#include "aed/tensor.hpp"

// Reverse-mode graph over dense tensors. Ops evaluate eagerly; each result
// node keeps its inputs plus a closure that scatters the chain-rule
// contribution into them. backward() runs the closures in reverse
// topological order from a scalar root.

namespace aed {

enum class OpKind {
  input,
  constant,
  param,
  conv1d,
  maxpool1d,
  dense,
  relu,
  sigmoid,
  add,
  sub,
  mul,
  scale,
  log,
  reshape,
  sum,
  mean,
  batchnorm1d,
  detach,
};

template <class T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until backward reaches this node
  OpKind op = OpKind::input;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;  // accumulates into inputs' grads
  bool requires_grad = false;
  bool is_param = false;
  std::string name;

  void ensure_grad() {
    if (grad.numel() == 0) grad = Tensor<T>::zeros(value.shape());
  }
};

template <class T>
using NodePtr = std::shared_ptr<Node<T>>;

template <class T>
NodePtr<T> make_input(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = OpKind::input;
  return n;
}

template <class T>
NodePtr<T> make_constant(Tensor<T> value) {
  auto n = make_input(std::move(value));
  n->op = OpKind::constant;
  return n;
}

template <class T>
NodePtr<T> make_param(Tensor<T> value, std::string name) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = OpKind::param;
  n->requires_grad = true;
  n->is_param = true;
  n->name = std::move(name);
  return n;
}

namespace detail {

template <class T>
NodePtr<T> make_result(Tensor<T> value, OpKind op, std::vector<NodePtr<T>> inputs) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  for (const auto& in : inputs)
    if (in->requires_grad) n->requires_grad = true;
  n->inputs = std::move(inputs);
  return n;
}

inline void check(bool ok, errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace detail

// Detached copy: same value, gradient flow stops here.
template <class T>
NodePtr<T> detach(const NodePtr<T>& x) {
  auto n = make_input(x->value);
  n->op = OpKind::detach;
  return n;
}

// ---------------------------------------------------------------------------
// conv1d: cross-correlation with replication padding, length preserving.
// Accepts (cin, len) for a single sample or (batch, cin, len).
// kernels: (cout, cin, k) with k odd; bias: (cout); pad must equal k/2.
// ---------------------------------------------------------------------------
template <class T>
NodePtr<T> conv1d(const NodePtr<T>& x, const NodePtr<T>& kernels, const NodePtr<T>& bias,
                  std::size_t pad) {
  const bool batched = x->value.rank() == 3;
  detail::check(batched || x->value.rank() == 2, errc::shape,
                "conv1d input must be (cin, len) or (batch, cin, len), got " +
                    x->value.shape_string());
  detail::check(kernels->value.rank() == 3, errc::shape, "conv1d kernels must be (cout, cin, k)");
  const std::size_t batch = batched ? x->value.dim(0) : 1;
  const std::size_t cin = x->value.dim(batched ? 1 : 0);
  const std::size_t len = x->value.dim(batched ? 2 : 1);
  const std::size_t cout = kernels->value.dim(0);
  const std::size_t k = kernels->value.dim(2);
  detail::check(k % 2 == 1, errc::config, "conv1d kernel length must be odd, got " + std::to_string(k));
  detail::check(pad == k / 2, errc::config,
                "conv1d pad must be k/2 = " + std::to_string(k / 2) + ", got " + std::to_string(pad));
  detail::check(kernels->value.dim(1) == cin, errc::shape,
                "conv1d channel mismatch: input has " + std::to_string(cin) + ", kernels expect " +
                    std::to_string(kernels->value.dim(1)));
  detail::check(bias->value.rank() == 1 && bias->value.dim(0) == cout, errc::shape,
                "conv1d bias must be (cout)");

  Tensor<T> out = Tensor<T>::zeros(batched ? std::vector<std::size_t>{batch, cout, len}
                                           : std::vector<std::size_t>{cout, len});
  kernels::conv1d_forward(batch, cin, len, cout, k, pad, x->value.data(), kernels->value.data(),
                          bias->value.data(), out.data());
  auto n = detail::make_result(std::move(out), OpKind::conv1d, {x, kernels, bias});
  if (n->requires_grad) {
    n->backward_fn = [batch, cin, len, cout, k, pad](Node<T>& self) {
      auto& xin = *self.inputs[0];
      auto& win = *self.inputs[1];
      auto& bin = *self.inputs[2];
      T* gx = nullptr;
      T* gw = nullptr;
      T* gb = nullptr;
      if (xin.requires_grad) {
        xin.ensure_grad();
        gx = xin.grad.data();
      }
      if (win.requires_grad) {
        win.ensure_grad();
        gw = win.grad.data();
      }
      if (bin.requires_grad) {
        bin.ensure_grad();
        gb = bin.grad.data();
      }
      kernels::conv1d_backward(batch, cin, len, cout, k, pad, xin.value.data(), win.value.data(),
                               self.grad.data(), gx, gw, gb);
    };
  }
  return n;
}

// ---------------------------------------------------------------------------
// maxpool1d: non-overlapping windows, trailing remainder dropped.
// Accepts (ch, len) or (batch, ch, len).
// ---------------------------------------------------------------------------
template <class T>
NodePtr<T> maxpool1d(const NodePtr<T>& x, std::size_t pool) {
  const bool batched = x->value.rank() == 3;
  detail::check(batched || x->value.rank() == 2, errc::shape,
                "maxpool1d input must be (ch, len) or (batch, ch, len)");
  detail::check(pool >= 1, errc::config, "pool must be >= 1");
  const std::size_t batch = batched ? x->value.dim(0) : 1;
  const std::size_t ch = x->value.dim(batched ? 1 : 0);
  const std::size_t len = x->value.dim(batched ? 2 : 1);
  detail::check(pool <= len, errc::shape, "maxpool1d pool " + std::to_string(pool) +
                                              " exceeds length " + std::to_string(len) +
                                              " (empty output)");
  const std::size_t olen = len / pool;
  const std::size_t rows = batch * ch;

  Tensor<T> out = Tensor<T>::zeros(batched ? std::vector<std::size_t>{batch, ch, olen}
                                           : std::vector<std::size_t>{ch, olen});
  auto arg = std::make_shared<std::vector<std::uint32_t>>(rows * olen);
  kernels::maxpool_forward(rows, len, pool, x->value.data(), out.data(), arg->data());
  auto n = detail::make_result(std::move(out), OpKind::maxpool1d, {x});
  if (n->requires_grad) {
    n->backward_fn = [rows, len, pool, arg](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      kernels::maxpool_backward(rows, len, pool, self.grad.data(), arg->data(), xin.grad.data());
    };
  }
  return n;
}

// ---------------------------------------------------------------------------
// dense: affine map w x + b. Accepts x of shape (n) or (batch, n);
// w: (m, n), b: (m).
// ---------------------------------------------------------------------------
template <class T>
NodePtr<T> dense(const NodePtr<T>& x, const NodePtr<T>& w, const NodePtr<T>& b) {
  const bool batched = x->value.rank() == 2;
  detail::check(batched || x->value.rank() == 1, errc::shape, "dense input must be (n) or (batch, n)");
  detail::check(w->value.rank() == 2, errc::shape, "dense weight must be (m, n)");
  const std::size_t batch = batched ? x->value.dim(0) : 1;
  const std::size_t n = x->value.dim(batched ? 1 : 0);
  const std::size_t m = w->value.dim(0);
  detail::check(w->value.dim(1) == n, errc::shape,
                "dense dimension mismatch: input width " + std::to_string(n) + ", weight expects " +
                    std::to_string(w->value.dim(1)));
  detail::check(b->value.rank() == 1 && b->value.dim(0) == m, errc::shape, "dense bias must be (m)");

  Tensor<T> out = Tensor<T>::zeros(batched ? std::vector<std::size_t>{batch, m}
                                           : std::vector<std::size_t>{m});
  kernels::dense_forward(batch, n, m, x->value.data(), w->value.data(), b->value.data(),
                         out.data());
  auto nd = detail::make_result(std::move(out), OpKind::dense, {x, w, b});
  if (nd->requires_grad) {
    nd->backward_fn = [batch, n, m](Node<T>& self) {
      auto& xin = *self.inputs[0];
      auto& win = *self.inputs[1];
      auto& bin = *self.inputs[2];
      T* gx = nullptr;
      T* gw = nullptr;
      T* gb = nullptr;
      if (xin.requires_grad) {
        xin.ensure_grad();
        gx = xin.grad.data();
      }
      if (win.requires_grad) {
        win.ensure_grad();
        gw = win.grad.data();
      }
      if (bin.requires_grad) {
        bin.ensure_grad();
        gb = bin.grad.data();
      }
      kernels::dense_backward(batch, n, m, xin.value.data(), win.value.data(), self.grad.data(),
                              gx, gw, gb);
    };
  }
  return nd;
}

// ---------------------------------------------------------------------------
// Pointwise ops. Binary ops require equal shapes or a scalar (numel 1)
// operand; no other broadcasting.
// ---------------------------------------------------------------------------
template <class T>
NodePtr<T> relu(const NodePtr<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x->value.shape());
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = x->value[i] > T(0) ? x->value[i] : T(0);
  auto nd = detail::make_result(std::move(out), OpKind::relu, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      // subgradient 0 at x == 0
      for (std::size_t i = 0; i < n; ++i)
        if (xin.value[i] > T(0)) xin.grad[i] += self.grad[i];
    };
  }
  return nd;
}

template <class T>
NodePtr<T> sigmoid(const NodePtr<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x->value.shape());
  const std::size_t n = out.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = T(1) / (T(1) + std::exp(-x->value[i]));
  auto nd = detail::make_result(std::move(out), OpKind::sigmoid, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const T s = self.value[i];
        xin.grad[i] += self.grad[i] * s * (T(1) - s);
      }
    };
  }
  return nd;
}

inline constexpr double kLogClamp = 1e-12;

// Natural log. Clamped mode (default) evaluates log(max(x, 1e-12)) so a
// saturated discriminator keeps the loss finite; strict mode rejects
// nonpositive inputs instead.
template <class T>
NodePtr<T> log_op(const NodePtr<T>& x, bool strict = false) {
  Tensor<T> out = Tensor<T>::zeros(x->value.shape());
  const std::size_t n = out.numel();
  const T clamp = static_cast<T>(kLogClamp);
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x->value[i];
    if (strict && v <= T(0)) fail(errc::numeric, "log of nonpositive value in strict mode");
    out[i] = std::log(v < clamp ? clamp : v);
  }
  auto nd = detail::make_result(std::move(out), OpKind::log, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n, clamp](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      // derivative of log(max(x, clamp)): zero in the clamped region
      for (std::size_t i = 0; i < n; ++i)
        if (xin.value[i] >= clamp) xin.grad[i] += self.grad[i] / xin.value[i];
    };
  }
  return nd;
}

namespace detail {

enum class BinOp { add, sub, mul };

template <class T>
NodePtr<T> binary_op(BinOp kind, OpKind tag, const NodePtr<T>& a, const NodePtr<T>& b) {
  const bool a_scalar = a->value.numel() == 1;
  const bool b_scalar = b->value.numel() == 1;
  check(a->value.same_shape(b->value) || a_scalar || b_scalar, errc::shape,
        "elementwise shape mismatch: " + a->value.shape_string() + " vs " +
            b->value.shape_string());
  const auto& big = b_scalar ? a->value : b->value;
  Tensor<T> out = Tensor<T>::zeros(big.shape());
  const std::size_t n = out.numel();
  const auto ai = [&](std::size_t i) { return a->value[a_scalar ? 0 : i]; };
  const auto bi = [&](std::size_t i) { return b->value[b_scalar ? 0 : i]; };
  switch (kind) {
    case BinOp::add:
      for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) + bi(i);
      break;
    case BinOp::sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) - bi(i);
      break;
    case BinOp::mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = ai(i) * bi(i);
      break;
  }
  auto nd = make_result(std::move(out), tag, {a, b});
  if (nd->requires_grad) {
    nd->backward_fn = [kind, n, a_scalar, b_scalar](Node<T>& self) {
      auto& an = *self.inputs[0];
      auto& bn = *self.inputs[1];
      if (an.requires_grad) {
        an.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
          T g = self.grad[i];
          if (kind == BinOp::mul) g *= bn.value[b_scalar ? 0 : i];
          an.grad[a_scalar ? 0 : i] += g;
        }
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
          T g = self.grad[i];
          switch (kind) {
            case BinOp::add:
              break;
            case BinOp::sub:
              g = -g;
              break;
            case BinOp::mul:
              g *= an.value[a_scalar ? 0 : i];
              break;
          }
          bn.grad[b_scalar ? 0 : i] += g;
        }
      }
    };
  }
  return nd;
}

}  // namespace detail

template <class T>
NodePtr<T> add(const NodePtr<T>& a, const NodePtr<T>& b) {
  return detail::binary_op(detail::BinOp::add, OpKind::add, a, b);
}
template <class T>
NodePtr<T> sub(const NodePtr<T>& a, const NodePtr<T>& b) {
  return detail::binary_op(detail::BinOp::sub, OpKind::sub, a, b);
}
template <class T>
NodePtr<T> mul(const NodePtr<T>& a, const NodePtr<T>& b) {
  return detail::binary_op(detail::BinOp::mul, OpKind::mul, a, b);
}

template <class T>
NodePtr<T> scale(const NodePtr<T>& x, double c) {
  Tensor<T> out = Tensor<T>::zeros(x->value.shape());
  const std::size_t n = out.numel();
  const T cv = static_cast<T>(c);
  for (std::size_t i = 0; i < n; ++i) out[i] = cv * x->value[i];
  auto nd = detail::make_result(std::move(out), OpKind::scale, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n, cv](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) xin.grad[i] += cv * self.grad[i];
    };
  }
  return nd;
}

template <class T>
NodePtr<T> reshape(const NodePtr<T>& x, std::vector<std::size_t> shape) {
  detail::check(detail::shape_numel(shape) == x->value.numel(), errc::shape,
                "reshape numel mismatch");
  Tensor<T> out = Tensor<T>::wrap(std::move(shape), x->value.vec());
  auto nd = detail::make_result(std::move(out), OpKind::reshape, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      const std::size_t n = self.grad.numel();
      for (std::size_t i = 0; i < n; ++i) xin.grad[i] += self.grad[i];
    };
  }
  return nd;
}

// Flattens (batch, ch, len) to (batch, ch*len).
template <class T>
NodePtr<T> flatten_rows(const NodePtr<T>& x) {
  detail::check(x->value.rank() == 3, errc::shape, "flatten_rows expects (batch, ch, len)");
  return reshape(x, {x->value.dim(0), x->value.dim(1) * x->value.dim(2)});
}

template <class T>
NodePtr<T> sum(const NodePtr<T>& x) {
  const std::size_t n = x->value.numel();
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x->value[i];
  auto nd = detail::make_result(Tensor<T>::wrap({1}, {acc}), OpKind::sum, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      const T g = self.grad[0];
      for (std::size_t i = 0; i < n; ++i) xin.grad[i] += g;
    };
  }
  return nd;
}

template <class T>
NodePtr<T> mean(const NodePtr<T>& x) {
  const std::size_t n = x->value.numel();
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x->value[i];
  acc /= static_cast<T>(n);
  auto nd = detail::make_result(Tensor<T>::wrap({1}, {acc}), OpKind::mean, {x});
  if (nd->requires_grad) {
    nd->backward_fn = [n](Node<T>& self) {
      auto& xin = *self.inputs[0];
      if (!xin.requires_grad) return;
      xin.ensure_grad();
      const T g = self.grad[0] / static_cast<T>(n);
      for (std::size_t i = 0; i < n; ++i) xin.grad[i] += g;
    };
  }
  return nd;
}

// ---------------------------------------------------------------------------
// batchnorm1d over (batch, ch, len). Training mode uses batch statistics and
// updates the running buffers in place (unbiased variance, torch-style);
// eval mode normalizes with the running buffers.
// ---------------------------------------------------------------------------
template <class T>
NodePtr<T> batchnorm1d(const NodePtr<T>& x, const NodePtr<T>& gamma, const NodePtr<T>& beta,
                       Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                       double momentum = 0.1, double eps = 1e-5) {
  detail::check(x->value.rank() == 3, errc::shape, "batchnorm1d expects (batch, ch, len)");
  const std::size_t batch = x->value.dim(0);
  const std::size_t ch = x->value.dim(1);
  const std::size_t len = x->value.dim(2);
  detail::check(gamma->value.numel() == ch && beta->value.numel() == ch, errc::shape,
                "batchnorm1d gamma/beta must have (ch)");
  detail::check(running_mean.numel() == ch && running_var.numel() == ch, errc::shape,
                "batchnorm1d running stats must have (ch)");

  Tensor<T> out = Tensor<T>::zeros(x->value.shape());
  auto stats_mean = std::make_shared<Tensor<T>>();
  auto stats_var = std::make_shared<Tensor<T>>();
  if (training) {
    *stats_mean = Tensor<T>::zeros({ch});
    *stats_var = Tensor<T>::zeros({ch});
    kernels::batchnorm_forward(batch, ch, len, x->value.data(), gamma->value.data(),
                               beta->value.data(), static_cast<const T*>(nullptr),
                               static_cast<const T*>(nullptr), static_cast<T>(eps), out.data(),
                               stats_mean->data(), stats_var->data());
    const T m = static_cast<T>(momentum);
    const std::size_t cnt = batch * len;
    const T unbias = cnt > 1 ? static_cast<T>(cnt) / static_cast<T>(cnt - 1) : T(1);
    for (std::size_t c = 0; c < ch; ++c) {
      running_mean[c] = (T(1) - m) * running_mean[c] + m * (*stats_mean)[c];
      running_var[c] = (T(1) - m) * running_var[c] + m * (*stats_var)[c] * unbias;
    }
  } else {
    *stats_mean = running_mean;
    *stats_var = running_var;
    kernels::batchnorm_forward(batch, ch, len, x->value.data(), gamma->value.data(),
                               beta->value.data(), stats_mean->data(), stats_var->data(),
                               static_cast<T>(eps), out.data(), static_cast<T*>(nullptr),
                               static_cast<T*>(nullptr));
  }
  auto nd = detail::make_result(std::move(out), OpKind::batchnorm1d, {x, gamma, beta});
  if (nd->requires_grad) {
    nd->backward_fn = [batch, ch, len, eps, training, stats_mean, stats_var](Node<T>& self) {
      auto& xin = *self.inputs[0];
      auto& gn = *self.inputs[1];
      auto& bn = *self.inputs[2];
      T* gx = nullptr;
      T* gg = nullptr;
      T* gb = nullptr;
      if (xin.requires_grad) {
        xin.ensure_grad();
        gx = xin.grad.data();
      }
      if (gn.requires_grad) {
        gn.ensure_grad();
        gg = gn.grad.data();
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        gb = bn.grad.data();
      }
      kernels::batchnorm_backward(batch, ch, len, xin.value.data(), gn.value.data(),
                                  stats_mean->data(), stats_var->data(), static_cast<T>(eps),
                                  training, self.grad.data(), gx, gg, gb);
    };
  }
  return nd;
}

// ---------------------------------------------------------------------------
// backward: reverse-mode accumulation from a scalar root. Zeroes the grads of
// every reachable node first, then applies the chain rule in reverse
// topological order. Returns the parameter nodes that received gradients.
// ---------------------------------------------------------------------------
template <class T>
std::vector<NodePtr<T>> backward(const NodePtr<T>& root) {
  detail::check(root->value.numel() == 1, errc::shape,
                "backward root must be scalar, got shape " + root->value.shape_string());

  // iterative DFS topological sort
  std::vector<NodePtr<T>> order;
  std::unordered_set<const Node<T>*> seen;
  std::vector<std::pair<NodePtr<T>, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodePtr<T> child = node->inputs[next++];
      if (child->requires_grad && seen.insert(child.get()).second)
        stack.emplace_back(std::move(child), 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto& n : order) n->grad = Tensor<T>::zeros(n->value.shape());
  root->grad[0] = T(1);

  std::vector<NodePtr<T>> params;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>& n = **it;
    if (n.is_param) params.push_back(*it);
    if (n.backward_fn && n.requires_grad) n.backward_fn(n);
  }
  return params;
}

}  // namespace aed
