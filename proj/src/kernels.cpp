// Copyright 2026 The yahtzee-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <vector>

namespace yahtzee::kernels {

namespace {

template <typename T>
void matmul_nt_ref(const T* a, const T* b, T* c, int m, int n, int k,
                   bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<size_t>(j) * k;
      T acc = 0;
      for (int kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
      T* cij = c + static_cast<size_t>(i) * n + j;
      *cij = accumulate ? *cij + acc : acc;
    }
  }
}

template <typename T>
void matmul_nn_ref(const T* a, const T* b, T* c, int m, int n, int k,
                   bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* ci = c + static_cast<size_t>(i) * n;
    if (!accumulate)
      for (int j = 0; j < n; ++j) ci[j] = 0;
    const T* ai = a + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const T av = ai[kk];
      const T* bk = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
}

template <typename T>
void matmul_tn_ref(const T* a, const T* b, T* c, int m, int n, int r,
                   bool accumulate) {
  if (!accumulate)
    std::memset(c, 0, sizeof(T) * static_cast<size_t>(m) * n);
  for (int rr = 0; rr < r; ++rr) {
    const T* ar = a + static_cast<size_t>(rr) * m;
    const T* br = b + static_cast<size_t>(rr) * n;
    for (int i = 0; i < m; ++i) {
      const T av = ar[i];
      if (av == T(0)) continue;
      T* ci = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * br[j];
    }
  }
}

template <typename T>
void add_bias_rows_ref(T* y, const T* bias, int rows, int n) {
  for (int i = 0; i < rows; ++i) {
    T* yi = y + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) yi[j] += bias[j];
  }
}

template <typename T>
void sum_rows_ref(const T* y, T* out, int rows, int n, bool accumulate) {
  std::vector<double> acc(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < rows; ++i) {
    const T* yi = y + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc[j] += static_cast<double>(yi[j]);
  }
  for (int j = 0; j < n; ++j) {
    const T v = static_cast<T>(acc[j]);
    out[j] = accumulate ? out[j] + v : v;
  }
}

template <typename T>
void dropout_apply_ref(const T* x, const uint8_t* keep, T scale, T* y,
                       size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = keep[i] ? x[i] * scale : T(0);
}

template <typename T>
void adam_update_ref(T* p, T* m, T* v, const T* g, size_t n, T lr, T beta1,
                     T beta2, T eps, T inv_bc1, T inv_bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] * inv_bc1;
    const T vhat = v[i] * inv_bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <typename T>
double squared_norm_ref(const T* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    acc += static_cast<double>(x[i]) * static_cast<double>(x[i]);
  return acc;
}

template <typename T>
void scale_ref(T* x, T factor, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= factor;
}

template <typename T>
Ops<T> make_scalar_ops() {
  Ops<T> ops;
  ops.matmul_nt = matmul_nt_ref<T>;
  ops.matmul_nn = matmul_nn_ref<T>;
  ops.matmul_tn = matmul_tn_ref<T>;
  ops.add_bias_rows = add_bias_rows_ref<T>;
  ops.sum_rows = sum_rows_ref<T>;
  ops.dropout_apply = dropout_apply_ref<T>;
  ops.adam_update = adam_update_ref<T>;
  ops.squared_norm = squared_norm_ref<T>;
  ops.scale = scale_ref<T>;
  return ops;
}

bool simd_enabled_by_env() {
  const char* env = std::getenv("YAHTZEE_SIMD");
  if (env == nullptr) return true;
  return std::strcmp(env, "scalar") != 0;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

template <>
const Ops<float>& scalar_ops<float>() {
  static const Ops<float> ops = make_scalar_ops<float>();
  return ops;
}

template <>
const Ops<double>& scalar_ops<double>() {
  static const Ops<double> ops = make_scalar_ops<double>();
  return ops;
}

template <typename T>
const Ops<T>& active_ops() {
  static const Ops<T>& chosen =
      (avx2_supported() && simd_enabled_by_env()) ? avx2_ops<T>()
                                                  : scalar_ops<T>();
  return chosen;
}

template const Ops<float>& active_ops<float>();
template const Ops<double>& active_ops<double>();

const char* active_isa_name() {
  return (avx2_supported() && simd_enabled_by_env()) ? "avx2" : "scalar";
}

}  // namespace yahtzee::kernels
