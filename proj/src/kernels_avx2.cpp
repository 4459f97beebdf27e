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
//
// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must not be entered unless avx2_supported().

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <type_traits>
#include <vector>

#include "kernels.hpp"

namespace yahtzee::kernels {

namespace {

// Minimal type-generic wrapper over the 256-bit lane.
template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using Reg = __m256;
  static constexpr int kWidth = 8;
  static Reg zero() { return _mm256_setzero_ps(); }
  static Reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, Reg v) { _mm256_storeu_ps(p, v); }
  static Reg broadcast(float x) { return _mm256_set1_ps(x); }
  static Reg fma(Reg a, Reg b, Reg c) { return _mm256_fmadd_ps(a, b, c); }
  static Reg add(Reg a, Reg b) { return _mm256_add_ps(a, b); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_ps(a, b); }
  static float hsum(Reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    return _mm_cvtss_f32(lo);
  }
};

template <>
struct Vec<double> {
  using Reg = __m256d;
  static constexpr int kWidth = 4;
  static Reg zero() { return _mm256_setzero_pd(); }
  static Reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, Reg v) { _mm256_storeu_pd(p, v); }
  static Reg broadcast(double x) { return _mm256_set1_pd(x); }
  static Reg fma(Reg a, Reg b, Reg c) { return _mm256_fmadd_pd(a, b, c); }
  static Reg add(Reg a, Reg b) { return _mm256_add_pd(a, b); }
  static Reg mul(Reg a, Reg b) { return _mm256_mul_pd(a, b); }
  static double hsum(Reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    lo = _mm_hadd_pd(lo, lo);
    return _mm_cvtsd_f64(lo);
  }
};

// Dot-product form: every C entry is an independent k-dot of two contiguous
// rows. Two A rows x four B rows per pass, one accumulator chain each.
template <typename T>
void matmul_nt_avx2(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate) {
  using V = Vec<T>;
  using Reg = typename V::Reg;
  constexpr int W = V::kWidth;
  const int k_vec = k - k % W;
  int i = 0;
  for (; i + 2 <= m; i += 2) {
    const T* a0 = a + static_cast<size_t>(i) * k;
    const T* a1 = a0 + k;
    T* c0 = c + static_cast<size_t>(i) * n;
    T* c1 = c0 + n;
    int j = 0;
    for (; j + 4 <= n; j += 4) {
      const T* b0 = b + static_cast<size_t>(j) * k;
      const T* b1 = b0 + k;
      const T* b2 = b1 + k;
      const T* b3 = b2 + k;
      Reg p00 = V::zero(), p01 = V::zero(), p02 = V::zero(), p03 = V::zero();
      Reg p10 = V::zero(), p11 = V::zero(), p12 = V::zero(), p13 = V::zero();
      for (int kk = 0; kk < k_vec; kk += W) {
        const Reg av0 = V::load(a0 + kk);
        const Reg av1 = V::load(a1 + kk);
        const Reg bv0 = V::load(b0 + kk);
        const Reg bv1 = V::load(b1 + kk);
        const Reg bv2 = V::load(b2 + kk);
        const Reg bv3 = V::load(b3 + kk);
        p00 = V::fma(av0, bv0, p00);
        p01 = V::fma(av0, bv1, p01);
        p02 = V::fma(av0, bv2, p02);
        p03 = V::fma(av0, bv3, p03);
        p10 = V::fma(av1, bv0, p10);
        p11 = V::fma(av1, bv1, p11);
        p12 = V::fma(av1, bv2, p12);
        p13 = V::fma(av1, bv3, p13);
      }
      T d00 = V::hsum(p00), d01 = V::hsum(p01), d02 = V::hsum(p02),
        d03 = V::hsum(p03);
      T d10 = V::hsum(p10), d11 = V::hsum(p11), d12 = V::hsum(p12),
        d13 = V::hsum(p13);
      for (int kk = k_vec; kk < k; ++kk) {
        d00 += a0[kk] * b0[kk];
        d01 += a0[kk] * b1[kk];
        d02 += a0[kk] * b2[kk];
        d03 += a0[kk] * b3[kk];
        d10 += a1[kk] * b0[kk];
        d11 += a1[kk] * b1[kk];
        d12 += a1[kk] * b2[kk];
        d13 += a1[kk] * b3[kk];
      }
      if (accumulate) {
        c0[j] += d00;
        c0[j + 1] += d01;
        c0[j + 2] += d02;
        c0[j + 3] += d03;
        c1[j] += d10;
        c1[j + 1] += d11;
        c1[j + 2] += d12;
        c1[j + 3] += d13;
      } else {
        c0[j] = d00;
        c0[j + 1] = d01;
        c0[j + 2] = d02;
        c0[j + 3] = d03;
        c1[j] = d10;
        c1[j + 1] = d11;
        c1[j + 2] = d12;
        c1[j + 3] = d13;
      }
    }
    for (; j < n; ++j) {
      const T* bj = b + static_cast<size_t>(j) * k;
      Reg q0 = V::zero(), q1 = V::zero();
      for (int kk = 0; kk < k_vec; kk += W) {
        const Reg bv = V::load(bj + kk);
        q0 = V::fma(V::load(a0 + kk), bv, q0);
        q1 = V::fma(V::load(a1 + kk), bv, q1);
      }
      T d0 = V::hsum(q0), d1 = V::hsum(q1);
      for (int kk = k_vec; kk < k; ++kk) {
        d0 += a0[kk] * bj[kk];
        d1 += a1[kk] * bj[kk];
      }
      c0[j] = accumulate ? c0[j] + d0 : d0;
      c1[j] = accumulate ? c1[j] + d1 : d1;
    }
  }
  for (; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<size_t>(j) * k;
      Reg acc0 = V::zero();
      for (int kk = 0; kk < k_vec; kk += W)
        acc0 = V::fma(V::load(ai + kk), V::load(bj + kk), acc0);
      T dot = V::hsum(acc0);
      for (int kk = k_vec; kk < k; ++kk) dot += ai[kk] * bj[kk];
      T* cij = c + static_cast<size_t>(i) * n + j;
      *cij = accumulate ? *cij + dot : dot;
    }
  }
}

// Register-blocked saxpy form shared by nn (sum over A columns) and tn (sum
// over A rows transposed). Four C rows x two j-vectors stay in registers
// across the whole reduction, so B streams once per four output rows.
template <typename T, bool kTransposedA>
void matmul_saxpy_avx2(const T* a, const T* b, T* c, int m, int n, int red,
                       int a_cols, bool accumulate) {
  using V = Vec<T>;
  using Reg = typename V::Reg;
  constexpr int W = V::kWidth;
  constexpr int kRows = 4;
  const int jv2 = n - n % (2 * W);
  const int jv1 = n - n % W;

  auto a_at = [&](int i, int t) -> T {
    // nn: A is [m x red], element (i, t); tn: A is [red x m], element (t, i).
    return kTransposedA ? a[static_cast<size_t>(t) * a_cols + i]
                        : a[static_cast<size_t>(i) * a_cols + t];
  };

  for (int i0 = 0; i0 < m; i0 += kRows) {
    const int rows = std::min(kRows, m - i0);
    T* crow[kRows];
    for (int t = 0; t < kRows; ++t)
      crow[t] = c + static_cast<size_t>(i0 + std::min(t, rows - 1)) * n;
    int j = 0;
    if (rows == kRows) {
      for (; j < jv2; j += 2 * W) {
        Reg acc[kRows][2];
        for (int t = 0; t < kRows; ++t) {
          acc[t][0] = accumulate ? V::load(crow[t] + j) : V::zero();
          acc[t][1] = accumulate ? V::load(crow[t] + j + W) : V::zero();
        }
        for (int r = 0; r < red; ++r) {
          const T* br = b + static_cast<size_t>(r) * n + j;
          const Reg bv0 = V::load(br);
          const Reg bv1 = V::load(br + W);
          for (int t = 0; t < kRows; ++t) {
            const Reg av = V::broadcast(a_at(i0 + t, r));
            acc[t][0] = V::fma(av, bv0, acc[t][0]);
            acc[t][1] = V::fma(av, bv1, acc[t][1]);
          }
        }
        for (int t = 0; t < kRows; ++t) {
          V::store(crow[t] + j, acc[t][0]);
          V::store(crow[t] + j + W, acc[t][1]);
        }
      }
    }
    // Remaining columns (and short row blocks) one vector or scalar at a
    // time, row by row.
    for (int t = 0; t < rows; ++t) {
      T* ct = c + static_cast<size_t>(i0 + t) * n;
      int jj = rows == kRows ? j : 0;
      for (; jj < jv1; jj += W) {
        Reg acc0 = accumulate ? V::load(ct + jj) : V::zero();
        for (int r = 0; r < red; ++r)
          acc0 = V::fma(V::broadcast(a_at(i0 + t, r)),
                        V::load(b + static_cast<size_t>(r) * n + jj), acc0);
        V::store(ct + jj, acc0);
      }
      for (; jj < n; ++jj) {
        T acc0 = accumulate ? ct[jj] : T(0);
        for (int r = 0; r < red; ++r)
          acc0 += a_at(i0 + t, r) * b[static_cast<size_t>(r) * n + jj];
        ct[jj] = acc0;
      }
    }
  }
}

template <typename T>
void matmul_nn_avx2(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate) {
  matmul_saxpy_avx2<T, false>(a, b, c, m, n, k, k, accumulate);
}

template <typename T>
void matmul_tn_avx2(const T* a, const T* b, T* c, int m, int n, int r,
                    bool accumulate) {
  matmul_saxpy_avx2<T, true>(a, b, c, m, n, r, m, accumulate);
}

template <typename T>
void add_bias_rows_avx2(T* y, const T* bias, int rows, int n) {
  using V = Vec<T>;
  constexpr int W = V::kWidth;
  const int jv = n - n % W;
  for (int i = 0; i < rows; ++i) {
    T* yi = y + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j < jv; j += W)
      V::store(yi + j, V::add(V::load(yi + j), V::load(bias + j)));
    for (; j < n; ++j) yi[j] += bias[j];
  }
}

template <typename T>
void sum_rows_avx2(const T* y, T* out, int rows, int n, bool accumulate) {
  // Column sums with double accumulation, vectorized over columns.
  std::vector<double> acc(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < rows; ++i) {
    const T* yi = y + static_cast<size_t>(i) * n;
    int j = 0;
    if constexpr (std::is_same_v<T, double>) {
      for (; j + 4 <= n; j += 4) {
        __m256d s = _mm256_loadu_pd(acc.data() + j);
        s = _mm256_add_pd(s, _mm256_loadu_pd(yi + j));
        _mm256_storeu_pd(acc.data() + j, s);
      }
    } else {
      for (; j + 4 <= n; j += 4) {
        __m256d s = _mm256_loadu_pd(acc.data() + j);
        s = _mm256_add_pd(s, _mm256_cvtps_pd(_mm_loadu_ps(yi + j)));
        _mm256_storeu_pd(acc.data() + j, s);
      }
    }
    for (; j < n; ++j) acc[j] += static_cast<double>(yi[j]);
  }
  for (int j = 0; j < n; ++j) {
    const T v = static_cast<T>(acc[j]);
    out[j] = accumulate ? out[j] + v : v;
  }
}

template <typename T>
void dropout_apply_avx2(const T* x, const uint8_t* keep, T scale, T* y,
                        size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = keep[i] ? x[i] * scale : T(0);
}

template <typename T>
void adam_update_avx2(T* p, T* m, T* v, const T* g, size_t n, T lr, T beta1,
                      T beta2, T eps, T inv_bc1, T inv_bc2);

template <>
void adam_update_avx2<float>(float* p, float* m, float* v, const float* g,
                             size_t n, float lr, float beta1, float beta2,
                             float eps, float inv_bc1, float inv_bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1), vomb1 = _mm256_set1_ps(1 - beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2), vomb2 = _mm256_set1_ps(1 - beta2);
  const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
  const __m256 vbc1 = _mm256_set1_ps(inv_bc1), vbc2 = _mm256_set1_ps(inv_bc2);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_fmadd_ps(vomb1, gv, _mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)));
    __m256 vv = _mm256_fmadd_ps(vomb2, _mm256_mul_ps(gv, gv),
                                _mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(mv, vbc1);
    const __m256 denom =
        _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vv, vbc2)), veps);
    const __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

template <>
void adam_update_avx2<double>(double* p, double* m, double* v, const double* g,
                              size_t n, double lr, double beta1, double beta2,
                              double eps, double inv_bc1, double inv_bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1), vomb1 = _mm256_set1_pd(1 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vomb2 = _mm256_set1_pd(1 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(inv_bc1), vbc2 = _mm256_set1_pd(inv_bc2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_fmadd_pd(vomb1, gv, _mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)));
    __m256d vv = _mm256_fmadd_pd(vomb2, _mm256_mul_pd(gv, gv),
                                 _mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_mul_pd(mv, vbc1);
    const __m256d denom =
        _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vbc2)), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

template <typename T>
double squared_norm_avx2(const T* x, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  if constexpr (std::is_same_v<T, double>) {
    for (; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(x + i);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
  } else {
    for (; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
      acc = _mm256_fmadd_pd(v, v, acc);
    }
  }
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_hadd_pd(lo, lo);
  double total = _mm_cvtsd_f64(lo);
  for (; i < n; ++i)
    total += static_cast<double>(x[i]) * static_cast<double>(x[i]);
  return total;
}

template <typename T>
void scale_avx2(T* x, T factor, size_t n) {
  using V = Vec<T>;
  constexpr size_t W = V::kWidth;
  const typename V::Reg f = V::broadcast(factor);
  size_t i = 0;
  for (; i + W <= n; i += W) V::store(x + i, V::mul(V::load(x + i), f));
  for (; i < n; ++i) x[i] *= factor;
}

template <typename T>
Ops<T> make_avx2_ops() {
  Ops<T> ops;
  ops.matmul_nt = matmul_nt_avx2<T>;
  ops.matmul_nn = matmul_nn_avx2<T>;
  ops.matmul_tn = matmul_tn_avx2<T>;
  ops.add_bias_rows = add_bias_rows_avx2<T>;
  ops.sum_rows = sum_rows_avx2<T>;
  ops.dropout_apply = dropout_apply_avx2<T>;
  ops.adam_update = adam_update_avx2<T>;
  ops.squared_norm = squared_norm_avx2<T>;
  ops.scale = scale_avx2<T>;
  return ops;
}

}  // namespace

template <>
const Ops<float>& avx2_ops<float>() {
  static const Ops<float> ops = make_avx2_ops<float>();
  return ops;
}

template <>
const Ops<double>& avx2_ops<double>() {
  static const Ops<double> ops = make_avx2_ops<double>();
  return ops;
}

}  // namespace yahtzee::kernels
