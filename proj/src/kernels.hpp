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

#ifndef YAHTZEE_RL_SRC_KERNELS_HPP_
#define YAHTZEE_RL_SRC_KERNELS_HPP_

#include <cstddef>
#include <cstdint>

namespace yahtzee::kernels {

// Data-parallel inner loops of the network, in two interchangeable variants:
// a portable scalar reference and an AVX2+FMA implementation. The active
// table is picked once at startup from CPU support; YAHTZEE_SIMD=scalar in
// the environment forces the reference path. All matrices are row-major.
//
// Scalar and SIMD variants accumulate in different orders, so results agree
// to rounding, not bitwise; within one process the selection is fixed, which
// keeps runs bit-reproducible.
template <typename T>
struct Ops {
  // C[m x n] = A[m x k] * B[n x k]^T, optionally accumulating into C.
  void (*matmul_nt)(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate);
  // C[m x n] = A[m x k] * B[k x n].
  void (*matmul_nn)(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate);
  // C[m x n] = A[r x m]^T * B[r x n].
  void (*matmul_tn)(const T* a, const T* b, T* c, int m, int n, int r,
                    bool accumulate);
  // y[i][:] += bias for every row.
  void (*add_bias_rows)(T* y, const T* bias, int rows, int n);
  // out[j] = sum over rows of y[i][j]; 64-bit accumulation.
  void (*sum_rows)(const T* y, T* out, int rows, int n, bool accumulate);
  // y = keep[i] ? x * scale : 0.
  void (*dropout_apply)(const T* x, const uint8_t* keep, T scale, T* y,
                        size_t n);
  // Adam with precomputed bias-correction reciprocals.
  void (*adam_update)(T* p, T* m, T* v, const T* g, size_t n, T lr, T beta1,
                      T beta2, T eps, T inv_bc1, T inv_bc2);
  // sum of squares, accumulated in double.
  double (*squared_norm)(const T* x, size_t n);
  void (*scale)(T* x, T factor, size_t n);
};

bool avx2_supported();
const char* active_isa_name();

template <typename T>
const Ops<T>& scalar_ops();
template <typename T>
const Ops<T>& avx2_ops();  // only callable when avx2_supported()
template <typename T>
const Ops<T>& active_ops();

}  // namespace yahtzee::kernels

#endif  // YAHTZEE_RL_SRC_KERNELS_HPP_
