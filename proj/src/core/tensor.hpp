#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "core/errors.hpp"

namespace grasplab::learn {

// Dense row-major array. Templated on the scalar so the same layer code runs
// in float for training and in double for finite-difference checks.
template <class T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }

  T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Channel-major image indexing for [C,H,W] tensors.
  T& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  template <class U>
  TensorT<U> cast() const {
    TensorT<U> out(shape);
    for (int64_t i = 0; i < numel(); ++i) out[i] = static_cast<U>(data[i]);
    return out;
  }
};

using Tensor = TensorT<float>;

template <class T>
void require_shape(const TensorT<T>& t, const std::vector<int>& shape, const char* what) {
  if (t.shape != shape) throw ShapeMismatch(std::string("unexpected shape for ") + what);
}

}  // namespace grasplab::learn
