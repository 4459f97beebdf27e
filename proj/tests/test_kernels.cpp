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
// Equivalence tests between the scalar reference kernels and the AVX2
// variants, over shapes that exercise all vector-width tails.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "rng.hpp"

using namespace yahtzee;

namespace {

template <typename T>
std::vector<T> random_vec(size_t n, Rng& rng, double scale = 1.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(scale * (rng.uniform01() * 2 - 1));
  return v;
}

template <typename T>
double max_rel_diff(const std::vector<T>& a, const std::vector<T>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i], db = b[i];
    const double denom = std::max({std::abs(da), std::abs(db), 1.0});
    worst = std::max(worst, std::abs(da - db) / denom);
  }
  return worst;
}

template <typename T>
constexpr double tol() {
  return std::is_same_v<T, double> ? 1e-12 : 1e-4;
}

struct Shape {
  int m, n, k;
};
const Shape kShapes[] = {{1, 1, 1},   {3, 5, 7},    {8, 8, 8},
                         {20, 61, 13}, {17, 600, 9}, {33, 130, 600}};

template <typename T>
void check_matmuls() {
  if (!kernels::avx2_supported()) return;
  const auto& ref = kernels::scalar_ops<T>();
  const auto& simd = kernels::avx2_ops<T>();
  Rng rng(123);
  for (const Shape& s : kShapes) {
    for (bool accumulate : {false, true}) {
      const auto a = random_vec<T>(static_cast<size_t>(s.m) * s.k, rng);
      const auto b_nt = random_vec<T>(static_cast<size_t>(s.n) * s.k, rng);
      auto c0 = random_vec<T>(static_cast<size_t>(s.m) * s.n, rng);
      auto c1 = c0;
      ref.matmul_nt(a.data(), b_nt.data(), c0.data(), s.m, s.n, s.k,
                    accumulate);
      simd.matmul_nt(a.data(), b_nt.data(), c1.data(), s.m, s.n, s.k,
                     accumulate);
      CHECK(max_rel_diff(c0, c1) < tol<T>());

      const auto b_nn = random_vec<T>(static_cast<size_t>(s.k) * s.n, rng);
      auto d0 = random_vec<T>(static_cast<size_t>(s.m) * s.n, rng);
      auto d1 = d0;
      ref.matmul_nn(a.data(), b_nn.data(), d0.data(), s.m, s.n, s.k,
                    accumulate);
      simd.matmul_nn(a.data(), b_nn.data(), d1.data(), s.m, s.n, s.k,
                     accumulate);
      CHECK(max_rel_diff(d0, d1) < tol<T>());

      // tn: reduce over s.k rows of A[k x m], B[k x n].
      const auto a_t = random_vec<T>(static_cast<size_t>(s.k) * s.m, rng);
      auto e0 = random_vec<T>(static_cast<size_t>(s.m) * s.n, rng);
      auto e1 = e0;
      ref.matmul_tn(a_t.data(), b_nn.data(), e0.data(), s.m, s.n, s.k,
                    accumulate);
      simd.matmul_tn(a_t.data(), b_nn.data(), e1.data(), s.m, s.n, s.k,
                     accumulate);
      CHECK(max_rel_diff(e0, e1) < tol<T>());
    }
  }
}

}  // namespace

TEST_CASE("scalar matmul_nt agrees with a naive triple loop") {
  const auto& ref = kernels::scalar_ops<double>();
  Rng rng(7);
  const int m = 5, n = 9, k = 11;
  const auto a = random_vec<double>(m * k, rng);
  const auto b = random_vec<double>(n * k, rng);
  std::vector<double> c(m * n);
  ref.matmul_nt(a.data(), b.data(), c.data(), m, n, k, false);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double expect = 0;
      for (int kk = 0; kk < k; ++kk) expect += a[i * k + kk] * b[j * k + kk];
      CHECK(c[i * n + j] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("avx2 matmuls match scalar (double)") { check_matmuls<double>(); }
TEST_CASE("avx2 matmuls match scalar (float)") { check_matmuls<float>(); }

TEST_CASE("avx2 elementwise kernels match scalar") {
  if (!kernels::avx2_supported()) return;
  Rng rng(99);
  for (const size_t n : {size_t(1), size_t(7), size_t(64), size_t(601)}) {
    for (bool is_double : {false, true}) {
      (void)is_double;
    }
    // double
    {
      const auto& ref = kernels::scalar_ops<double>();
      const auto& simd = kernels::avx2_ops<double>();
      auto x = random_vec<double>(n, rng);
      auto bias = random_vec<double>(n, rng);
      auto y0 = x, y1 = x;
      ref.add_bias_rows(y0.data(), bias.data(), 1, static_cast<int>(n));
      simd.add_bias_rows(y1.data(), bias.data(), 1, static_cast<int>(n));
      CHECK(max_rel_diff(y0, y1) == 0.0);

      const auto rows = random_vec<double>(5 * n, rng);
      std::vector<double> s0(n), s1(n);
      ref.sum_rows(rows.data(), s0.data(), 5, static_cast<int>(n), false);
      simd.sum_rows(rows.data(), s1.data(), 5, static_cast<int>(n), false);
      CHECK(max_rel_diff(s0, s1) < 1e-15);

      CHECK(std::abs(ref.squared_norm(x.data(), n) -
                     simd.squared_norm(x.data(), n)) < 1e-12);

      auto sc0 = x, sc1 = x;
      ref.scale(sc0.data(), 0.37, n);
      simd.scale(sc1.data(), 0.37, n);
      CHECK(max_rel_diff(sc0, sc1) == 0.0);
    }
  }
}

TEST_CASE("avx2 adam matches scalar over many steps") {
  if (!kernels::avx2_supported()) return;
  for (int type_pass = 0; type_pass < 2; ++type_pass) {
    Rng rng(1234);
    const size_t n = 133;
    if (type_pass == 0) {
      auto run = [&](const kernels::Ops<double>& ops) {
        Rng local(55);
        std::vector<double> p(n, 0.5), m(n, 0.0), v(n, 0.0);
        for (int t = 1; t <= 20; ++t) {
          const auto g = random_vec<double>(n, local);
          const double bc1 = 1.0 / (1.0 - std::pow(0.9, t));
          const double bc2 = 1.0 / (1.0 - std::pow(0.999, t));
          ops.adam_update(p.data(), m.data(), v.data(), g.data(), n, 1e-3,
                          0.9, 0.999, 1e-8, bc1, bc2);
        }
        return p;
      };
      const auto p_ref = run(kernels::scalar_ops<double>());
      const auto p_simd = run(kernels::avx2_ops<double>());
      CHECK(max_rel_diff(p_ref, p_simd) < 1e-12);
    } else {
      auto run = [&](const kernels::Ops<float>& ops) {
        Rng local(55);
        std::vector<float> p(n, 0.5f), m(n, 0.0f), v(n, 0.0f);
        for (int t = 1; t <= 20; ++t) {
          const auto g = random_vec<float>(n, local);
          const float bc1 = 1.0f / (1.0f - std::pow(0.9f, t));
          const float bc2 = 1.0f / (1.0f - std::pow(0.999f, t));
          ops.adam_update(p.data(), m.data(), v.data(), g.data(), n, 1e-3f,
                          0.9f, 0.999f, 1e-8f, bc1, bc2);
        }
        return p;
      };
      const auto p_ref = run(kernels::scalar_ops<float>());
      const auto p_simd = run(kernels::avx2_ops<float>());
      CHECK(max_rel_diff(p_ref, p_simd) < 2e-4);
    }
  }
}

TEST_CASE("dropout kernel zeroes and rescales") {
  const auto& ops = kernels::active_ops<double>();
  const size_t n = 100;
  Rng rng(5);
  const auto x = random_vec<double>(n, rng);
  std::vector<uint8_t> keep(n);
  for (auto& k : keep) k = rng.uniform_int(2) ? 1 : 0;
  std::vector<double> y(n);
  ops.dropout_apply(x.data(), keep.data(), 2.0, y.data(), n);
  for (size_t i = 0; i < n; ++i)
    CHECK(y[i] == (keep[i] ? x[i] * 2.0 : 0.0));
}
