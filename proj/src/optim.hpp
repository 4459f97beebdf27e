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

#ifndef YAHTZEE_RL_SRC_OPTIM_HPP_
#define YAHTZEE_RL_SRC_OPTIM_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "net.hpp"

namespace yahtzee {

class TrainingAbortError : public std::runtime_error {
 public:
  explicit TrainingAbortError(const std::string& what)
      : std::runtime_error(what) {}
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  int64_t step = 0;  // completed updates

  static AdamState zeros(size_t n) {
    AdamState s;
    s.m.assign(n, T(0));
    s.v.assign(n, T(0));
    return s;
  }
};

// One Adam update with bias correction. Throws TrainingAbortError on
// non-finite gradients. Refreshes the params' derived weight copies.
template <typename T>
void adam_step(Params<T>* params, const std::vector<T>& grads,
               AdamState<T>* state, double lr);

// Warmup for the first 5% of steps, plateau to 75%, then linear decay to
// min_ratio * alpha_max at step == total_steps.
double lr_at(int64_t step, int64_t total_steps, double alpha_max,
             double min_ratio);

// Global-norm clipping; thresh <= 0 disables. Returns the pre-clip norm.
template <typename T>
struct ClipResult {
  double norm = 0.0;
  bool was_clipped = false;
};
template <typename T>
ClipResult<T> clip_gradients(std::vector<T>* grads, double thresh);

extern template void adam_step<float>(Params<float>*,
                                      const std::vector<float>&,
                                      AdamState<float>*, double);
extern template void adam_step<double>(Params<double>*,
                                       const std::vector<double>&,
                                       AdamState<double>*, double);
extern template ClipResult<float> clip_gradients<float>(std::vector<float>*,
                                                        double);
extern template ClipResult<double> clip_gradients<double>(
    std::vector<double>*, double);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_OPTIM_HPP_
