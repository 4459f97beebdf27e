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

#include "optim.hpp"

#include <cmath>

#include "kernels.hpp"

namespace yahtzee {

template <typename T>
void adam_step(Params<T>* params, const std::vector<T>& grads,
               AdamState<T>* state, double lr) {
  if (grads.size() != params->data.size() ||
      state->m.size() != grads.size() || state->v.size() != grads.size())
    throw std::invalid_argument("optimizer state / gradient size mismatch");
  const auto& ops = kernels::active_ops<T>();
  const double norm_sq = ops.squared_norm(grads.data(), grads.size());
  if (!std::isfinite(norm_sq))
    throw TrainingAbortError("non-finite gradients in optimizer step");

  state->step += 1;
  const double t = static_cast<double>(state->step);
  const T inv_bc1 = static_cast<T>(1.0 / (1.0 - std::pow(kAdamBeta1, t)));
  const T inv_bc2 = static_cast<T>(1.0 / (1.0 - std::pow(kAdamBeta2, t)));
  ops.adam_update(params->data.data(), state->m.data(), state->v.data(),
                  grads.data(), grads.size(), static_cast<T>(lr),
                  static_cast<T>(kAdamBeta1), static_cast<T>(kAdamBeta2),
                  static_cast<T>(kAdamEps), inv_bc1, inv_bc2);
  params->sync_derived();
}

double lr_at(int64_t step, int64_t total_steps, double alpha_max,
             double min_ratio) {
  if (total_steps <= 0) return alpha_max;
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("lr_at: step outside [0, total_steps]");
  const double frac = static_cast<double>(step) / total_steps;
  constexpr double kWarmupEnd = 0.05;
  constexpr double kDecayStart = 0.75;
  if (frac <= kWarmupEnd) return alpha_max * (frac / kWarmupEnd);
  if (frac <= kDecayStart) return alpha_max;
  const double t = (frac - kDecayStart) / (1.0 - kDecayStart);
  return alpha_max * (1.0 + t * (min_ratio - 1.0));
}

template <typename T>
ClipResult<T> clip_gradients(std::vector<T>* grads, double thresh) {
  const auto& ops = kernels::active_ops<T>();
  ClipResult<T> result;
  result.norm = std::sqrt(ops.squared_norm(grads->data(), grads->size()));
  if (thresh <= 0.0) return result;
  if (result.norm > thresh) {
    ops.scale(grads->data(), static_cast<T>(thresh / result.norm),
              grads->size());
    result.was_clipped = true;
  }
  return result;
}

template void adam_step<float>(Params<float>*, const std::vector<float>&,
                               AdamState<float>*, double);
template void adam_step<double>(Params<double>*, const std::vector<double>&,
                                AdamState<double>*, double);
template ClipResult<float> clip_gradients<float>(std::vector<float>*, double);
template ClipResult<double> clip_gradients<double>(std::vector<double>*,
                                                   double);

}  // namespace yahtzee
