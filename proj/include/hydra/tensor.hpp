// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hydra/common.hpp"

namespace hydra {

// Dense CHW tensor of doubles. Images are (3, H, W) with values in [0, 1];
// score maps are (1, H, W).
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_) {
    v.assign(static_cast<std::size_t>(c_) * h_ * w_, 0.0);
  }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

  double& at(int ci, int y, int x) {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double at(int ci, int y, int x) const {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }

  double* plane(int ci) { return v.data() + static_cast<std::size_t>(ci) * h * w; }
  const double* plane(int ci) const {
    return v.data() + static_cast<std::size_t>(ci) * h * w;
  }
  double* row(int ci, int y) { return plane(ci) + static_cast<std::size_t>(y) * w; }
  const double* row(int ci, int y) const {
    return plane(ci) + static_cast<std::size_t>(y) * w;
  }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
  void zero() { fill(0.0); }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeMismatch(what);
}

inline double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double x : t.v) m = std::max(m, std::fabs(x));
  return m;
}

inline bool all_finite(const Tensor& t) {
  for (double x : t.v)
    if (!std::isfinite(x)) return false;
  return true;
}

// a += s * b
inline void add_scaled(Tensor& a, const Tensor& b, double s) {
  check_same_shape(a, b, "add_scaled");
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += s * b.v[i];
}

inline double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double x : t.v) s += x * x;
  return std::sqrt(s);
}

inline double dot_flat(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::uint64_t hash_tensor(const Tensor& t, std::uint64_t h = 0xCBF29CE484222325ULL) {
  h = fnv1a64(&t.c, sizeof t.c, h);
  h = fnv1a64(&t.h, sizeof t.h, h);
  h = fnv1a64(&t.w, sizeof t.w, h);
  return fnv1a64(t.v.data(), t.v.size() * sizeof(double), h);
}

}  // namespace hydra
