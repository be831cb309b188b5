#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "aed/parallel.hpp"

// Raw-array kernels behind the graph ops. Hot loops are written as
// contiguous axpy/dot passes with fixed-order lane accumulators, so they
// vectorize without -ffast-math and every output element has one fixed
// summation order. Parallel loops split only disjoint output slices, which
// keeps results bitwise identical for any thread count.

namespace aed::kernels {

template <class T>
inline void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T, int kLanes = 16>
inline T dot(std::size_t n, const T* a, const T* b) {
  T lanes[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (int j = 0; j < kLanes; ++j) lanes[j] += a[i + j] * b[i + j];
  T s = 0;
  for (int j = 0; j < kLanes; ++j) s += lanes[j];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Four dot products against a shared left-hand row; reuses w from registers.
// Per-row summation order matches dot<T>() exactly.
template <class T, int kLanes = 16>
inline void dot4(std::size_t n, const T* w, const T* x0, const T* x1, const T* x2, const T* x3,
                 T* y0, T* y1, T* y2, T* y3) {
  T l0[kLanes] = {}, l1[kLanes] = {}, l2[kLanes] = {}, l3[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (int j = 0; j < kLanes; ++j) {
      const T wv = w[i + j];
      l0[j] += wv * x0[i + j];
      l1[j] += wv * x1[i + j];
      l2[j] += wv * x2[i + j];
      l3[j] += wv * x3[i + j];
    }
  T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  for (int j = 0; j < kLanes; ++j) {
    s0 += l0[j];
    s1 += l1[j];
    s2 += l2[j];
    s3 += l3[j];
  }
  for (; i < n; ++i) {
    const T wv = w[i];
    s0 += wv * x0[i];
    s1 += wv * x1[i];
    s2 += wv * x2[i];
    s3 += wv * x3[i];
  }
  *y0 = s0;
  *y1 = s1;
  *y2 = s2;
  *y3 = s3;
}

// Replication padding: pad copies of the edge samples on each side.
template <class T>
inline void replicate_pad(const T* x, std::size_t len, std::size_t pad, T* out) {
  for (std::size_t i = 0; i < pad; ++i) out[i] = x[0];
  std::copy(x, x + len, out + pad);
  for (std::size_t i = 0; i < pad; ++i) out[pad + len + i] = x[len - 1];
}

// Materializes the padded input block (batch, cin, len + 2*pad).
template <class T>
inline std::vector<T> pad_input(std::size_t batch, std::size_t cin, std::size_t len,
                                std::size_t pad, const T* x) {
  const std::size_t plen = len + 2 * pad;
  std::vector<T> out(batch * cin * plen);
  detail::parallel_for(batch * cin, [&](std::size_t row) {
    replicate_pad(x + row * len, len, pad, out.data() + row * plen);
  });
  return out;
}

// Cross-correlation with replication padding; output length == input length.
// x: (batch, cin, len), w: (cout, cin, k), bias: (cout), y: (batch, cout, len)
template <class T>
inline void conv1d_forward(std::size_t batch, std::size_t cin, std::size_t len, std::size_t cout,
                           std::size_t k, std::size_t pad, const T* x, const T* w, const T* bias,
                           T* y) {
  const std::size_t plen = len + 2 * pad;
  const std::vector<T> xp = pad_input(batch, cin, len, pad, x);
  detail::parallel_for(batch, [&](std::size_t b) {
    const T* xb = xp.data() + b * cin * plen;
    T* yb = y + b * cout * len;
    for (std::size_t co = 0; co < cout; ++co) {
      T* yrow = yb + co * len;
      std::fill(yrow, yrow + len, bias[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* xrow = xb + ci * plen;
        const T* wrow = w + (co * cin + ci) * k;
        for (std::size_t t = 0; t < k; ++t) axpy(len, wrow[t], xrow + t, yrow);
      }
    }
  });
}

// gx/gw/gb may be null to skip that gradient.
template <class T>
inline void conv1d_backward(std::size_t batch, std::size_t cin, std::size_t len, std::size_t cout,
                            std::size_t k, std::size_t pad, const T* x, const T* w, const T* gy,
                            T* gx, T* gw, T* gb) {
  const std::size_t plen = len + 2 * pad;
  std::vector<T> xp;
  if (gw) xp = pad_input(batch, cin, len, pad, x);

  if (gb) {
    detail::parallel_for(cout, [&](std::size_t co) {
      T acc = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* grow = gy + (b * cout + co) * len;
        for (std::size_t i = 0; i < len; ++i) acc += grow[i];
      }
      gb[co] += acc;
    });
  }

  if (gw) {
    detail::parallel_for(cout, [&](std::size_t co) {
      for (std::size_t ci = 0; ci < cin; ++ci) {
        T* gwrow = gw + (co * cin + ci) * k;
        for (std::size_t t = 0; t < k; ++t) {
          T acc = 0;
          for (std::size_t b = 0; b < batch; ++b) {
            const T* grow = gy + (b * cout + co) * len;
            const T* xrow = xp.data() + (b * cin + ci) * plen;
            acc += dot(len, grow, xrow + t);
          }
          gwrow[t] += acc;
        }
      }
    });
  }

  if (gx) {
    detail::parallel_for(batch, [&](std::size_t b) {
      std::vector<T> gxp(cin * plen, T(0));
      for (std::size_t co = 0; co < cout; ++co) {
        const T* grow = gy + (b * cout + co) * len;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const T* wrow = w + (co * cin + ci) * k;
          T* gxrow = gxp.data() + ci * plen;
          for (std::size_t t = 0; t < k; ++t) axpy(len, wrow[t], grow, gxrow + t);
        }
      }
      // fold padded-region gradients back onto the replicated edge samples
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* gxrow = gxp.data() + ci * plen;
        T* out = gx + (b * cin + ci) * len;
        for (std::size_t i = 0; i < len; ++i) out[i] += gxrow[pad + i];
        for (std::size_t i = 0; i < pad; ++i) out[0] += gxrow[i];
        for (std::size_t i = 0; i < pad; ++i) out[len - 1] += gxrow[pad + len + i];
      }
    });
  }
}

// x: (batch, n), w: (m, n), bias: (m), y: (batch, m)
template <class T>
inline void dense_forward(std::size_t batch, std::size_t n, std::size_t m, const T* x, const T* w,
                          const T* bias, T* y) {
  if (batch >= 8) {
    const std::size_t blocks = (batch + 3) / 4;
    detail::parallel_for(blocks, [&](std::size_t blk) {
      const std::size_t b0 = blk * 4;
      const std::size_t rows = std::min<std::size_t>(4, batch - b0);
      if (rows == 4) {
        for (std::size_t j = 0; j < m; ++j) {
          dot4(n, w + j * n, x + b0 * n, x + (b0 + 1) * n, x + (b0 + 2) * n, x + (b0 + 3) * n,
               y + b0 * m + j, y + (b0 + 1) * m + j, y + (b0 + 2) * m + j, y + (b0 + 3) * m + j);
          for (std::size_t r = 0; r < 4; ++r) y[(b0 + r) * m + j] += bias[j];
        }
      } else {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < m; ++j)
            y[(b0 + r) * m + j] = bias[j] + dot(n, w + j * n, x + (b0 + r) * n);
      }
    });
  } else {
    detail::parallel_for(m, [&](std::size_t j) {
      for (std::size_t b = 0; b < batch; ++b)
        y[b * m + j] = bias[j] + dot(n, w + j * n, x + b * n);
    });
  }
}

template <class T>
inline void dense_backward(std::size_t batch, std::size_t n, std::size_t m, const T* x, const T* w,
                           const T* gy, T* gx, T* gw, T* gb) {
  if (gx) {
    detail::parallel_for(batch, [&](std::size_t b) {
      T* gxrow = gx + b * n;
      const T* grow = gy + b * m;
      for (std::size_t j = 0; j < m; ++j) axpy(n, grow[j], w + j * n, gxrow);
    });
  }
  if (gw) {
    detail::parallel_for(m, [&](std::size_t j) {
      T* gwrow = gw + j * n;
      for (std::size_t b = 0; b < batch; ++b) axpy(n, gy[b * m + j], x + b * n, gwrow);
    });
  }
  if (gb) {
    detail::parallel_for(m, [&](std::size_t j) {
      T acc = 0;
      for (std::size_t b = 0; b < batch; ++b) acc += gy[b * m + j];
      gb[j] += acc;
    });
  }
}

// Non-overlapping max pooling, stride == pool, trailing remainder dropped.
// First maximal element wins ties; its flat in-row offset lands in arg.
template <class T>
inline void maxpool_forward(std::size_t rows, std::size_t len, std::size_t pool, const T* x, T* y,
                            std::uint32_t* arg) {
  const std::size_t olen = len / pool;
  detail::parallel_for(rows, [&](std::size_t r) {
    const T* xrow = x + r * len;
    T* yrow = y + r * olen;
    std::uint32_t* arow = arg + r * olen;
    for (std::size_t o = 0; o < olen; ++o) {
      std::size_t base = o * pool;
      T best = xrow[base];
      std::size_t besti = base;
      for (std::size_t i = 1; i < pool; ++i) {
        if (xrow[base + i] > best) {
          best = xrow[base + i];
          besti = base + i;
        }
      }
      yrow[o] = best;
      arow[o] = static_cast<std::uint32_t>(besti);
    }
  });
}

template <class T>
inline void maxpool_backward(std::size_t rows, std::size_t len, std::size_t pool, const T* gy,
                             const std::uint32_t* arg, T* gx) {
  const std::size_t olen = len / pool;
  detail::parallel_for(rows, [&](std::size_t r) {
    const T* grow = gy + r * olen;
    const std::uint32_t* arow = arg + r * olen;
    T* gxrow = gx + r * len;
    for (std::size_t o = 0; o < olen; ++o) gxrow[arow[o]] += grow[o];
  });
}

// Per-channel batch normalization over (batch, len) slices of (batch, ch, len).
// Training mode normalizes with biased batch statistics and reports them;
// eval mode consumes the provided running statistics.
template <class T>
inline void batchnorm_forward(std::size_t batch, std::size_t ch, std::size_t len, const T* x,
                              const T* gamma, const T* beta, const T* use_mean, const T* use_var,
                              T eps, T* y, T* batch_mean, T* batch_var) {
  const std::size_t cnt = batch * len;
  detail::parallel_for(ch, [&](std::size_t c) {
    T mean, var;
    if (batch_mean) {
      T sum = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* xrow = x + (b * ch + c) * len;
        for (std::size_t i = 0; i < len; ++i) sum += xrow[i];
      }
      mean = sum / static_cast<T>(cnt);
      T sq = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* xrow = x + (b * ch + c) * len;
        for (std::size_t i = 0; i < len; ++i) {
          const T d = xrow[i] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<T>(cnt);
      batch_mean[c] = mean;
      batch_var[c] = var;
    } else {
      mean = use_mean[c];
      var = use_var[c];
    }
    const T invstd = T(1) / std::sqrt(var + eps);
    const T g = gamma[c], bta = beta[c];
    for (std::size_t b = 0; b < batch; ++b) {
      const T* xrow = x + (b * ch + c) * len;
      T* yrow = y + (b * ch + c) * len;
      for (std::size_t i = 0; i < len; ++i) yrow[i] = g * (xrow[i] - mean) * invstd + bta;
    }
  });
}

template <class T>
inline void batchnorm_backward(std::size_t batch, std::size_t ch, std::size_t len, const T* x,
                               const T* gamma, const T* mean, const T* var, T eps, bool training,
                               const T* gy, T* gx, T* ggamma, T* gbeta) {
  const T cnt = static_cast<T>(batch * len);
  detail::parallel_for(ch, [&](std::size_t c) {
    const T invstd = T(1) / std::sqrt(var[c] + eps);
    const T mu = mean[c];
    T sum_gy = 0, sum_gy_xhat = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const T* xrow = x + (b * ch + c) * len;
      const T* grow = gy + (b * ch + c) * len;
      for (std::size_t i = 0; i < len; ++i) {
        sum_gy += grow[i];
        sum_gy_xhat += grow[i] * (xrow[i] - mu) * invstd;
      }
    }
    if (gbeta) gbeta[c] += sum_gy;
    if (ggamma) ggamma[c] += sum_gy_xhat;
    if (gx) {
      const T g = gamma[c];
      if (training) {
        const T mean_gy = sum_gy / cnt;
        const T mean_gy_xhat = sum_gy_xhat / cnt;
        for (std::size_t b = 0; b < batch; ++b) {
          const T* xrow = x + (b * ch + c) * len;
          const T* grow = gy + (b * ch + c) * len;
          T* gxrow = gx + (b * ch + c) * len;
          for (std::size_t i = 0; i < len; ++i) {
            const T xhat = (xrow[i] - mu) * invstd;
            gxrow[i] += g * invstd * (grow[i] - mean_gy - xhat * mean_gy_xhat);
          }
        }
      } else {
        for (std::size_t b = 0; b < batch; ++b) {
          const T* grow = gy + (b * ch + c) * len;
          T* gxrow = gx + (b * ch + c) * len;
          for (std::size_t i = 0; i < len; ++i) gxrow[i] += g * invstd * grow[i];
        }
      }
    }
  });
}

}  // namespace aed::kernels
