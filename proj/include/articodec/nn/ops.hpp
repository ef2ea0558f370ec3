// Copyright (c) 2026 The articodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "articodec/nn/autograd.hpp"

// Differentiable tensor ops. Sequence tensors are [batch, channels, time];
// dense tensors are [batch, features].
namespace articodec::nn {

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw usage_error(what);
}

}  // namespace detail

struct Conv1dSpec {
  int stride = 1;
  int dilation = 1;
  int pad_left = 0;
  int pad_right = 0;
  int groups = 1;

  // "same" padding for odd kernels at stride 1.
  static Conv1dSpec same(int kernel, int dilation = 1) {
    const int p = dilation * (kernel - 1) / 2;
    return {1, dilation, p, p, 1};
  }
};

inline int conv1d_out_len(int len, int kernel, const Conv1dSpec& s) {
  return (len + s.pad_left + s.pad_right - s.dilation * (kernel - 1) - 1) / s.stride + 1;
}

// x [B, Cin, L], w [Cout, Cin/groups, K], b [Cout].
template <std::floating_point T>
Var<T> conv1d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
              const Conv1dSpec& spec) {
  const int batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const int cout = w.dim(0), cig = w.dim(1), k = w.dim(2);
  const int g = spec.groups;
  detail::require(cin == cig * g && cout % g == 0 && b.dim(0) == cout,
                  "conv1d: channel mismatch, input " + shape_str(x.shape()) +
                      " weight " + shape_str(w.shape()));
  const int lout = conv1d_out_len(len, k, spec);
  detail::require(lout >= 1, "conv1d: input too short");
  const int cog = cout / g;
  const int s = spec.stride, d = spec.dilation, pl = spec.pad_left;

  // Valid output range for tap kk: 0 <= t*s + kk*d - pl < len.
  auto range = [=](int kk, int& lo, int& hi) {
    const int off = kk * d - pl;
    lo = off >= 0 ? 0 : (-off + s - 1) / s;
    hi = (len - 1 - off) < 0 ? -1 : std::min(lout - 1, (len - 1 - off) / s);
  };

  Tensor<T> y({batch, cout, lout});
  const T* xp = x.data().data();
  const T* wp = w.data().data();
  const T* bp = b.data().data();
  for (int bi = 0; bi < batch; ++bi) {
    for (int co = 0; co < cout; ++co) {
      T* yr = &y.data[(static_cast<std::size_t>(bi) * cout + co) * lout];
      std::fill(yr, yr + lout, bp[co]);
      const int gi = co / cog;
      for (int c = 0; c < cig; ++c) {
        const T* xr = xp + (static_cast<std::size_t>(bi) * cin + gi * cig + c) * len;
        const T* wr = wp + (static_cast<std::size_t>(co) * cig + c) * k;
        for (int kk = 0; kk < k; ++kk) {
          int lo, hi;
          range(kk, lo, hi);
          const T wv = wr[kk];
          const T* xs = xr + kk * d - pl;
          if (s == 1) {
            for (int t = lo; t <= hi; ++t) yr[t] += wv * xs[t];
          } else {
            for (int t = lo; t <= hi; ++t) yr[t] += wv * xs[t * s];
          }
        }
      }
    }
  }
  return make_result<T>(std::move(y), {x, w, b}, [=](Node<T>& n) {
    const T* gy = n.grad.data();
    T* gx = grad_of(n, 0);
    T* gw = grad_of(n, 1);
    T* gb = grad_of(n, 2);
    const T* xv = n.parents[0]->value.data.data();
    const T* wv = n.parents[1]->value.data.data();
    for (int bi = 0; bi < batch; ++bi) {
      for (int co = 0; co < cout; ++co) {
        const T* gr = gy + (static_cast<std::size_t>(bi) * cout + co) * lout;
        if (gb) {
          T acc = 0;
          for (int t = 0; t < lout; ++t) acc += gr[t];
          gb[co] += acc;
        }
        const int gi = co / cog;
        for (int c = 0; c < cig; ++c) {
          const std::size_t xoff = (static_cast<std::size_t>(bi) * cin + gi * cig + c) * len;
          const std::size_t woff = (static_cast<std::size_t>(co) * cig + c) * k;
          for (int kk = 0; kk < k; ++kk) {
            int lo, hi;
            range(kk, lo, hi);
            const int off = kk * d - pl;
            if (gw) {
              const T* xs = xv + xoff + off;
              T acc = 0;
              if (s == 1) {
                for (int t = lo; t <= hi; ++t) acc += gr[t] * xs[t];
              } else {
                for (int t = lo; t <= hi; ++t) acc += gr[t] * xs[t * s];
              }
              gw[woff + kk] += acc;
            }
            if (gx) {
              const T wk = wv[woff + kk];
              T* gs = gx + xoff + off;
              if (s == 1) {
                for (int t = lo; t <= hi; ++t) gs[t] += wk * gr[t];
              } else {
                for (int t = lo; t <= hi; ++t) gs[t * s] += wk * gr[t];
              }
            }
          }
        }
      }
    }
  });
}

// Transposed convolution. x [B, Cin, L], w [Cin, Cout, K], b [Cout];
// input frame i writes output positions i*stride + k - padding, cropped to
// [0, out_len).
template <std::floating_point T>
Var<T> conv_transpose1d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        int stride, int padding, int out_len) {
  const int batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const int cout = w.dim(1), k = w.dim(2);
  detail::require(w.dim(0) == cin && b.dim(0) == cout,
                  "conv_transpose1d: channel mismatch");
  auto range = [=](int kk, int& lo, int& hi) {
    const int off = kk - padding;  // o = i*stride + off
    lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    hi = (out_len - 1 - off) < 0 ? -1 : std::min(len - 1, (out_len - 1 - off) / stride);
  };
  Tensor<T> y({batch, cout, out_len});
  const T* xp = x.data().data();
  const T* wp = w.data().data();
  for (int bi = 0; bi < batch; ++bi) {
    for (int co = 0; co < cout; ++co) {
      T* yr = &y.data[(static_cast<std::size_t>(bi) * cout + co) * out_len];
      std::fill(yr, yr + out_len, b.data()[co]);
      for (int ci = 0; ci < cin; ++ci) {
        const T* xr = xp + (static_cast<std::size_t>(bi) * cin + ci) * len;
        const T* wr = wp + (static_cast<std::size_t>(ci) * cout + co) * k;
        for (int kk = 0; kk < k; ++kk) {
          int lo, hi;
          range(kk, lo, hi);
          const T wv = wr[kk];
          T* ys = yr + kk - padding;
          for (int i = lo; i <= hi; ++i) ys[i * stride] += wv * xr[i];
        }
      }
    }
  }
  return make_result<T>(std::move(y), {x, w, b}, [=](Node<T>& n) {
    const T* gy = n.grad.data();
    T* gx = grad_of(n, 0);
    T* gw = grad_of(n, 1);
    T* gb = grad_of(n, 2);
    const T* xv = n.parents[0]->value.data.data();
    const T* wv = n.parents[1]->value.data.data();
    for (int bi = 0; bi < batch; ++bi) {
      for (int co = 0; co < cout; ++co) {
        const T* gr = gy + (static_cast<std::size_t>(bi) * cout + co) * out_len;
        if (gb) {
          T acc = 0;
          for (int t = 0; t < out_len; ++t) acc += gr[t];
          gb[co] += acc;
        }
        for (int ci = 0; ci < cin; ++ci) {
          const std::size_t xoff = (static_cast<std::size_t>(bi) * cin + ci) * len;
          const std::size_t woff = (static_cast<std::size_t>(ci) * cout + co) * k;
          for (int kk = 0; kk < k; ++kk) {
            int lo, hi;
            range(kk, lo, hi);
            const T* gs = gr + kk - padding;
            if (gw) {
              T acc = 0;
              for (int i = lo; i <= hi; ++i) acc += gs[i * stride] * xv[xoff + i];
              gw[woff + kk] += acc;
            }
            if (gx) {
              const T wk = wv[woff + kk];
              for (int i = lo; i <= hi; ++i) gx[xoff + i] += wk * gs[i * stride];
            }
          }
        }
      }
    }
  });
}

// Elementwise map with derivative expressed through input and output.
template <std::floating_point T, typename F, typename DF>
Var<T> unary(const Var<T>& x, F f, DF df) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = f(x.data()[i]);
  return make_result<T>(std::move(y), {x}, [df](Node<T>& n) {
    T* gx = grad_of(n, 0);
    if (!gx) return;
    const auto& xv = n.parents[0]->value.data;
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      gx[i] += n.grad[i] * df(xv[i], n.value.data[i]);
    }
  });
}

template <std::floating_point T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  return unary(
      x, [slope](T v) { return v > 0 ? v : slope * v; },
      [slope](T v, T) { return v > 0 ? T(1) : slope; });
}

template <std::floating_point T>
Var<T> relu(const Var<T>& x) {
  return leaky_relu(x, T(0));
}

template <std::floating_point T>
Var<T> tanh(const Var<T>& x) {
  return unary(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

// Exact (erf) GELU.
template <std::floating_point T>
Var<T> gelu(const Var<T>& x) {
  constexpr T inv_sqrt2 = T(0.70710678118654752440);
  constexpr T inv_sqrt2pi = T(0.39894228040143267794);
  return unary(
      x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
      [](T v, T) {
        return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) +
               v * inv_sqrt2pi * std::exp(T(-0.5) * v * v);
      });
}

template <std::floating_point T>
Var<T> scale(const Var<T>& x, T factor) {
  return unary(
      x, [factor](T v) { return factor * v; }, [factor](T, T) { return factor; });
}

template <std::floating_point T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::require(a.shape() == b.shape(), "add: shape mismatch " +
                                              shape_str(a.shape()) + " vs " +
                                              shape_str(b.shape()));
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = a.data()[i] + b.data()[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& n) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (T* g = grad_of(n, p)) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
      }
    }
  });
}

// Inverted dropout; identity when !training or p == 0.
template <std::floating_point T, typename Rng>
Var<T> dropout(const Var<T>& x, T p, bool training, Rng& rng) {
  if (!training || p <= T(0)) return x;
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  std::vector<T> mask(x.size());
  const T s = T(1) / (T(1) - p);
  for (auto& m : mask) m = keep(rng) ? s : T(0);
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = x.data()[i] * mask[i];
  return make_result<T>(std::move(y), {x}, [mask = std::move(mask)](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * mask[i];
    }
  });
}

// x [B, Din] -> [B, Dout] with w [Dout, Din], b [Dout].
template <std::floating_point T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  const int batch = x.dim(0), din = x.dim(1), dout = w.dim(0);
  detail::require(w.dim(1) == din && b.dim(0) == dout,
                  "linear: dimension mismatch, input " + shape_str(x.shape()) +
                      " weight " + shape_str(w.shape()));
  Tensor<T> y({batch, dout});
  for (int bi = 0; bi < batch; ++bi) {
    const T* xr = &x.data()[static_cast<std::size_t>(bi) * din];
    for (int o = 0; o < dout; ++o) {
      const T* wr = &w.data()[static_cast<std::size_t>(o) * din];
      T acc = b.data()[o];
      for (int i = 0; i < din; ++i) acc += wr[i] * xr[i];
      y.data[static_cast<std::size_t>(bi) * dout + o] = acc;
    }
  }
  return make_result<T>(std::move(y), {x, w, b}, [=](Node<T>& n) {
    T* gx = grad_of(n, 0);
    T* gw = grad_of(n, 1);
    T* gb = grad_of(n, 2);
    const T* xv = n.parents[0]->value.data.data();
    const T* wv = n.parents[1]->value.data.data();
    for (int bi = 0; bi < batch; ++bi) {
      for (int o = 0; o < dout; ++o) {
        const T g = n.grad[static_cast<std::size_t>(bi) * dout + o];
        if (g == T(0)) continue;
        if (gb) gb[o] += g;
        const T* xr = xv + static_cast<std::size_t>(bi) * din;
        if (gw) {
          T* gwr = gw + static_cast<std::size_t>(o) * din;
          for (int i = 0; i < din; ++i) gwr[i] += g * xr[i];
        }
        if (gx) {
          const T* wr = wv + static_cast<std::size_t>(o) * din;
          T* gxr = gx + static_cast<std::size_t>(bi) * din;
          for (int i = 0; i < din; ++i) gxr[i] += g * wr[i];
        }
      }
    }
  });
}

// Feature-wise affine: y[b, c, t] = x[b, c, t] * scale[b, c] + shift[b, c].
template <std::floating_point T>
Var<T> channel_affine(const Var<T>& x, const Var<T>& scale, const Var<T>& shift) {
  const int batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  detail::require(scale.shape() == Shape{batch, ch} && shift.shape() == Shape{batch, ch},
                  "channel_affine: expected scale/shift of shape " +
                      shape_str({batch, ch}) + ", got " + shape_str(scale.shape()));
  Tensor<T> y(x.shape());
  for (int r = 0; r < batch * ch; ++r) {
    const T a = scale.data()[r], c = shift.data()[r];
    const T* xr = &x.data()[static_cast<std::size_t>(r) * len];
    T* yr = &y.data[static_cast<std::size_t>(r) * len];
    for (int t = 0; t < len; ++t) yr[t] = a * xr[t] + c;
  }
  return make_result<T>(std::move(y), {x, scale, shift}, [=](Node<T>& n) {
    T* gx = grad_of(n, 0);
    T* ga = grad_of(n, 1);
    T* gc = grad_of(n, 2);
    const auto& xv = n.parents[0]->value.data;
    const auto& av = n.parents[1]->value.data;
    for (int r = 0; r < batch * ch; ++r) {
      const T* gr = &n.grad[static_cast<std::size_t>(r) * len];
      const T* xr = &xv[static_cast<std::size_t>(r) * len];
      T sa = 0, sc = 0;
      for (int t = 0; t < len; ++t) {
        sa += gr[t] * xr[t];
        sc += gr[t];
      }
      if (ga) ga[r] += sa;
      if (gc) gc[r] += sc;
      if (gx) {
        T* gxr = gx + static_cast<std::size_t>(r) * len;
        for (int t = 0; t < len; ++t) gxr[t] += av[r] * gr[t];
      }
    }
  });
}

// Columns [begin, end) of a [B, D] tensor.
template <std::floating_point T>
Var<T> slice_features(const Var<T>& x, int begin, int end) {
  const int batch = x.dim(0), d = x.dim(1), w = end - begin;
  detail::require(0 <= begin && begin < end && end <= d, "slice_features: bad range");
  Tensor<T> y({batch, w});
  for (int bi = 0; bi < batch; ++bi) {
    for (int j = 0; j < w; ++j) y.data[bi * w + j] = x.data()[bi * d + begin + j];
  }
  return make_result<T>(std::move(y), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (int bi = 0; bi < batch; ++bi) {
        for (int j = 0; j < w; ++j) g[bi * d + begin + j] += n.grad[bi * w + j];
      }
    }
  });
}

// Nearest-neighbour upsampling along time by an integer factor.
template <std::floating_point T>
Var<T> repeat_time(const Var<T>& x, int factor) {
  const int rows = x.dim(0) * x.dim(1), len = x.dim(2);
  Tensor<T> y({x.dim(0), x.dim(1), len * factor});
  for (int r = 0; r < rows; ++r) {
    for (int t = 0; t < len; ++t) {
      for (int j = 0; j < factor; ++j) {
        y.data[(static_cast<std::size_t>(r) * len + t) * factor + j] =
            x.data()[static_cast<std::size_t>(r) * len + t];
      }
    }
  }
  return make_result<T>(std::move(y), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * len; ++i) {
        for (int j = 0; j < factor; ++j) g[i] += n.grad[i * factor + j];
      }
    }
  });
}

// Right-pads along time by reflection (x[L-2], x[L-3], ...).
template <std::floating_point T>
Var<T> reflect_pad_right(const Var<T>& x, int pad) {
  const int rows = x.dim(0) * x.dim(1), len = x.dim(2);
  detail::require(pad < len, "reflect_pad_right: pad must be shorter than input");
  if (pad == 0) return x;
  const int out_len = len + pad;
  auto src = [len](int t) { return t < len ? t : 2 * (len - 1) - t; };
  Tensor<T> y({x.dim(0), x.dim(1), out_len});
  for (int r = 0; r < rows; ++r) {
    for (int t = 0; t < out_len; ++t) {
      y.data[static_cast<std::size_t>(r) * out_len + t] =
          x.data()[static_cast<std::size_t>(r) * len + src(t)];
    }
  }
  return make_result<T>(std::move(y), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (int r = 0; r < rows; ++r) {
        for (int t = 0; t < out_len; ++t) {
          g[static_cast<std::size_t>(r) * len + src(t)] +=
              n.grad[static_cast<std::size_t>(r) * out_len + t];
        }
      }
    }
  });
}

// [B, C, L] with L % period == 0 -> [B * period, C, L / period]; row
// b * period + j holds samples j, j + period, j + 2 * period, ...
template <std::floating_point T>
Var<T> fold_period(const Var<T>& x, int period) {
  const int batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  detail::require(len % period == 0, "fold_period: length not a multiple of period");
  const int h = len / period;
  auto src = [=](int b, int j, int c, int i) {
    return (static_cast<std::size_t>(b) * ch + c) * len + static_cast<std::size_t>(i) * period + j;
  };
  Tensor<T> y({batch * period, ch, h});
  for (int b = 0; b < batch; ++b) {
    for (int j = 0; j < period; ++j) {
      for (int c = 0; c < ch; ++c) {
        for (int i = 0; i < h; ++i) {
          y.data[((static_cast<std::size_t>(b) * period + j) * ch + c) * h + i] =
              x.data()[src(b, j, c, i)];
        }
      }
    }
  }
  return make_result<T>(std::move(y), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (int b = 0; b < batch; ++b) {
        for (int j = 0; j < period; ++j) {
          for (int c = 0; c < ch; ++c) {
            for (int i = 0; i < h; ++i) {
              g[src(b, j, c, i)] +=
                  n.grad[((static_cast<std::size_t>(b) * period + j) * ch + c) * h + i];
            }
          }
        }
      }
    }
  });
}

// Average pooling with kernel == stride == factor; the trailing partial
// window averages the samples it covers, so output length is ceil(L / factor).
template <std::floating_point T>
Var<T> avg_pool(const Var<T>& x, int factor) {
  if (factor == 1) return x;
  const int rows = x.dim(0) * x.dim(1), len = x.dim(2);
  const int out_len = (len + factor - 1) / factor;
  Tensor<T> y({x.dim(0), x.dim(1), out_len});
  for (int r = 0; r < rows; ++r) {
    for (int o = 0; o < out_len; ++o) {
      const int lo = o * factor, hi = std::min(len, lo + factor);
      T acc = 0;
      for (int t = lo; t < hi; ++t) acc += x.data()[static_cast<std::size_t>(r) * len + t];
      y.data[static_cast<std::size_t>(r) * out_len + o] = acc / T(hi - lo);
    }
  }
  return make_result<T>(std::move(y), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      for (int r = 0; r < rows; ++r) {
        for (int o = 0; o < out_len; ++o) {
          const int lo = o * factor, hi = std::min(len, lo + factor);
          const T v = n.grad[static_cast<std::size_t>(r) * out_len + o] / T(hi - lo);
          for (int t = lo; t < hi; ++t) g[static_cast<std::size_t>(r) * len + t] += v;
        }
      }
    }
  });
}

// mean((x - target)^2) as a scalar.
template <std::floating_point T>
Var<T> mse_to(const Var<T>& x, T target) {
  const auto n_el = static_cast<T>(x.size());
  T acc = 0;
  for (T v : x.data()) acc += (v - target) * (v - target);
  return make_result<T>(Tensor<T>({1}, {acc / n_el}), {x}, [=](Node<T>& n) {
    if (T* g = grad_of(n, 0)) {
      const auto& xv = n.parents[0]->value.data;
      const T s = n.grad[0] * T(2) / n_el;
      for (std::size_t i = 0; i < xv.size(); ++i) g[i] += s * (xv[i] - target);
    }
  });
}

// mean(|a - b|) as a scalar.
template <std::floating_point T>
Var<T> l1(const Var<T>& a, const Var<T>& b) {
  detail::require(a.shape() == b.shape(), "l1: shape mismatch " +
                                             shape_str(a.shape()) + " vs " +
                                             shape_str(b.shape()));
  const auto n_el = static_cast<T>(a.size());
  T acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a.data()[i] - b.data()[i]);
  return make_result<T>(Tensor<T>({1}, {acc / n_el}), {a, b}, [=](Node<T>& n) {
    const auto& av = n.parents[0]->value.data;
    const auto& bv = n.parents[1]->value.data;
    const T s = n.grad[0] / n_el;
    T* ga = grad_of(n, 0);
    T* gb = grad_of(n, 1);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const T d = av[i] - bv[i];
      const T sg = d > 0 ? s : (d < 0 ? -s : T(0));
      if (ga) ga[i] += sg;
      if (gb) gb[i] -= sg;
    }
  });
}

// Weighted sum of scalars.
template <std::floating_point T>
Var<T> weighted_sum(const std::vector<Var<T>>& terms, const std::vector<T>& weights) {
  detail::require(terms.size() == weights.size() && !terms.empty(),
                  "weighted_sum: size mismatch");
  Var<T> acc = scale(terms[0], weights[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, scale(terms[i], weights[i]));
  return acc;
}

}  // namespace articodec::nn
