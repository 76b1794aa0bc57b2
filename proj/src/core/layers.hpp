#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "core/tensor.hpp"

namespace grasplab::learn {

// All layers are free functions: forward takes values, backward takes the
// saved forward inputs plus the upstream gradient. Parameter gradients are
// accumulated (+=) so one batch can sum over samples; input gradients are
// overwritten. Shapes: images are [C,H,W], vectors are [N].

// ---- conv2d, 3x3 kernel, stride 1, zero padding 1 ----

template <class T>
TensorT<T> pad1(const TensorT<T>& in) {
  const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
  TensorT<T> out({c, h + 2, w + 2});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y) {
      const T* src = &in.at(ci, y, 0);
      T* dst = &out.at(ci, y + 1, 1);
      std::copy(src, src + w, dst);
    }
  return out;
}

template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& b) {
  if (in.shape.size() != 3 || w.shape.size() != 4 || w.shape[1] != in.shape[0] ||
      w.shape[2] != 3 || w.shape[3] != 3 || b.shape != std::vector<int>{w.shape[0]})
    throw ShapeMismatch("conv2d operand shapes do not conform");
  const int ci_n = in.shape[0], h = in.shape[1], wd = in.shape[2], co_n = w.shape[0];
  TensorT<T> pad = pad1(in);
  TensorT<T> out({co_n, h, wd});
  for (int co = 0; co < co_n; ++co) {
    for (int y = 0; y < h; ++y) {
      T* orow = &out.at(co, y, 0);
      std::fill(orow, orow + wd, b[co]);
    }
    for (int ci = 0; ci < ci_n; ++ci) {
      const T* k = &w[(static_cast<int64_t>(co) * ci_n + ci) * 9];
      for (int y = 0; y < h; ++y) {
        const T* r0 = &pad.at(ci, y + 0, 0);
        const T* r1 = &pad.at(ci, y + 1, 0);
        const T* r2 = &pad.at(ci, y + 2, 0);
        T* orow = &out.at(co, y, 0);
        for (int x = 0; x < wd; ++x) {
          orow[x] += k[0] * r0[x] + k[1] * r0[x + 1] + k[2] * r0[x + 2] +
                     k[3] * r1[x] + k[4] * r1[x + 1] + k[5] * r1[x + 2] +
                     k[6] * r2[x] + k[7] * r2[x + 1] + k[8] * r2[x + 2];
        }
      }
    }
  }
  return out;
}

// gin may be null when the input is a leaf (first layer) and its gradient is
// not needed. gw/gb are accumulated into.
template <class T>
void conv2d_backward(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& gout,
                     TensorT<T>* gin, TensorT<T>& gw, TensorT<T>& gb) {
  const int ci_n = in.shape[0], h = in.shape[1], wd = in.shape[2], co_n = w.shape[0];
  TensorT<T> pad = pad1(in);
  for (int co = 0; co < co_n; ++co) {
    T bsum = T(0);
    for (int y = 0; y < h; ++y) {
      const T* grow = &gout.at(co, y, 0);
      for (int x = 0; x < wd; ++x) bsum += grow[x];
    }
    gb[co] += bsum;
    for (int ci = 0; ci < ci_n; ++ci) {
      // Nine kernel-tap dot products accumulated in one sweep per row.
      T s[9] = {};
      for (int y = 0; y < h; ++y) {
        const T* r0 = &pad.at(ci, y + 0, 0);
        const T* r1 = &pad.at(ci, y + 1, 0);
        const T* r2 = &pad.at(ci, y + 2, 0);
        const T* grow = &gout.at(co, y, 0);
        T a0{}, a1{}, a2{}, a3{}, a4{}, a5{}, a6{}, a7{}, a8{};
        for (int x = 0; x < wd; ++x) {
          const T g = grow[x];
          a0 += g * r0[x];
          a1 += g * r0[x + 1];
          a2 += g * r0[x + 2];
          a3 += g * r1[x];
          a4 += g * r1[x + 1];
          a5 += g * r1[x + 2];
          a6 += g * r2[x];
          a7 += g * r2[x + 1];
          a8 += g * r2[x + 2];
        }
        s[0] += a0; s[1] += a1; s[2] += a2;
        s[3] += a3; s[4] += a4; s[5] += a5;
        s[6] += a6; s[7] += a7; s[8] += a8;
      }
      T* gk = &gw[(static_cast<int64_t>(co) * ci_n + ci) * 9];
      for (int t = 0; t < 9; ++t) gk[t] += s[t];
    }
  }
  if (gin) {
    // dIn is the same-size correlation of the padded upstream gradient with
    // the 180-degree rotated kernel, so it reuses the forward stencil shape.
    TensorT<T> gp = pad1(gout);
    *gin = TensorT<T>({ci_n, h, wd});
    for (int ci = 0; ci < ci_n; ++ci) {
      for (int co = 0; co < co_n; ++co) {
        const T* k = &w[(static_cast<int64_t>(co) * ci_n + ci) * 9];
        for (int y = 0; y < h; ++y) {
          const T* r0 = &gp.at(co, y + 0, 0);
          const T* r1 = &gp.at(co, y + 1, 0);
          const T* r2 = &gp.at(co, y + 2, 0);
          T* grow = &gin->at(ci, y, 0);
          for (int x = 0; x < wd; ++x) {
            grow[x] += k[8] * r0[x] + k[7] * r0[x + 1] + k[6] * r0[x + 2] +
                       k[5] * r1[x] + k[4] * r1[x + 1] + k[3] * r1[x + 2] +
                       k[2] * r2[x] + k[1] * r2[x + 1] + k[0] * r2[x + 2];
          }
        }
      }
    }
  }
}

// ---- relu ----

template <class T>
TensorT<T> relu_forward(const TensorT<T>& in) {
  TensorT<T> out(in.shape);
  for (int64_t i = 0; i < in.numel(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  return out;
}

template <class T>
TensorT<T> relu_backward(const TensorT<T>& in, const TensorT<T>& gout) {
  TensorT<T> gin(in.shape);
  for (int64_t i = 0; i < in.numel(); ++i) gin[i] = in[i] > T(0) ? gout[i] : T(0);
  return gin;
}

// ---- maxpool 2x2, stride 2 (trailing odd row/col dropped) ----

template <class T>
TensorT<T> maxpool2_forward(const TensorT<T>& in, std::vector<int32_t>& argmax) {
  const int c = in.shape[0], h = in.shape[1] / 2, w = in.shape[2] / 2;
  TensorT<T> out({c, h, w});
  argmax.resize(static_cast<size_t>(out.numel()));
  int64_t o = 0;
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x, ++o) {
        int by = 2 * y, bx = 2 * x;
        T best = in.at(ci, by, bx);
        int32_t bidx = static_cast<int32_t>((static_cast<int64_t>(ci) * in.shape[1] + by) * in.shape[2] + bx);
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            T v = in.at(ci, by + dy, bx + dx);
            if (v > best) {
              best = v;
              bidx = static_cast<int32_t>(
                  (static_cast<int64_t>(ci) * in.shape[1] + by + dy) * in.shape[2] + bx + dx);
            }
          }
        out[o] = best;
        argmax[static_cast<size_t>(o)] = bidx;
      }
  return out;
}

template <class T>
TensorT<T> maxpool2_backward(const std::vector<int>& in_shape, const std::vector<int32_t>& argmax,
                             const TensorT<T>& gout) {
  TensorT<T> gin(in_shape);
  for (int64_t o = 0; o < gout.numel(); ++o) gin[argmax[static_cast<size_t>(o)]] += gout[o];
  return gin;
}

// ---- global average pool: [C,H,W] -> [C] ----

template <class T>
TensorT<T> gap_forward(const TensorT<T>& in) {
  const int c = in.shape[0];
  const int64_t hw = static_cast<int64_t>(in.shape[1]) * in.shape[2];
  TensorT<T> out({c});
  for (int ci = 0; ci < c; ++ci) {
    T s = T(0);
    const T* p = &in.at(ci, 0, 0);
    for (int64_t i = 0; i < hw; ++i) s += p[i];
    out[ci] = s / static_cast<T>(hw);
  }
  return out;
}

template <class T>
TensorT<T> gap_backward(const std::vector<int>& in_shape, const TensorT<T>& gout) {
  TensorT<T> gin(in_shape);
  const int c = in_shape[0];
  const int64_t hw = static_cast<int64_t>(in_shape[1]) * in_shape[2];
  for (int ci = 0; ci < c; ++ci) {
    T g = gout[ci] / static_cast<T>(hw);
    T* p = &gin.at(ci, 0, 0);
    for (int64_t i = 0; i < hw; ++i) p[i] = g;
  }
  return gin;
}

// ---- linear: in [N], w [M,N], b [M] -> out [M] ----

template <class T>
TensorT<T> linear_forward(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& b) {
  if (w.shape.size() != 2 || in.shape != std::vector<int>{w.shape[1]} ||
      b.shape != std::vector<int>{w.shape[0]})
    throw ShapeMismatch("linear operand shapes do not conform");
  const int m = w.shape[0], n = w.shape[1];
  TensorT<T> out({m});
  for (int i = 0; i < m; ++i) {
    T s = b[i];
    const T* wr = &w[static_cast<int64_t>(i) * n];
    for (int j = 0; j < n; ++j) s += wr[j] * in[j];
    out[i] = s;
  }
  return out;
}

template <class T>
void linear_backward(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& gout,
                     TensorT<T>* gin, TensorT<T>& gw, TensorT<T>& gb) {
  const int m = w.shape[0], n = w.shape[1];
  if (gin) {
    *gin = TensorT<T>({n});
    for (int i = 0; i < m; ++i) {
      const T g = gout[i];
      const T* wr = &w[static_cast<int64_t>(i) * n];
      for (int j = 0; j < n; ++j) (*gin)[j] += wr[j] * g;
    }
  }
  for (int i = 0; i < m; ++i) {
    const T g = gout[i];
    gb[i] += g;
    T* gwr = &gw[static_cast<int64_t>(i) * n];
    for (int j = 0; j < n; ++j) gwr[j] += g * in[j];
  }
}

// ---- sigmoid ----

template <class T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  T e = std::exp(z);
  return e / (T(1) + e);
}

template <class T>
TensorT<T> sigmoid_forward(const TensorT<T>& in) {
  TensorT<T> out(in.shape);
  for (int64_t i = 0; i < in.numel(); ++i) out[i] = sigmoid(in[i]);
  return out;
}

template <class T>
TensorT<T> sigmoid_backward(const TensorT<T>& out, const TensorT<T>& gout) {
  TensorT<T> gin(out.shape);
  for (int64_t i = 0; i < out.numel(); ++i) gin[i] = gout[i] * out[i] * (T(1) - out[i]);
  return gin;
}

// ---- binary cross-entropy, fused with the final sigmoid for stability ----

template <class T>
T bce_with_logit(T z, T y) {
  return std::max(z, T(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
}

template <class T>
T bce_with_logit_grad(T z, T y) {
  return sigmoid(z) - y;
}

}  // namespace grasplab::learn
