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

#ifndef YAHTZEE_RL_SRC_NET_HPP_
#define YAHTZEE_RL_SRC_NET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "game.hpp"
#include "rng.hpp"

namespace yahtzee {

enum class RollHeadMode : uint8_t {
  kCategorical32,  // one action per keep mask
  kBernoulli5,     // independent per-die hold decisions
};

const char* to_string(RollHeadMode mode);
RollHeadMode roll_head_from_string(const std::string& s);

// Policy-value network topology: a shared feedforward trunk
// (Linear -> Swish -> LayerNorm -> Dropout per layer) and four heads, each a
// hidden layer of the same shape plus a linear output:
//   roll   32-way softmax or 5 sigmoids        (dropout on hidden)
//   score  13-way masked softmax               (dropout on hidden)
//   value  scalar, ELU                         (no dropout)
//   upper  scalar, linear                      (no dropout)
struct NetConfig {
  int hidden = 600;
  int layers = 3;
  double dropout = 0.1;
  RollHeadMode roll_head = RollHeadMode::kCategorical32;
  bool layer_norm = true;

  bool operator==(const NetConfig&) const = default;
  void validate() const;
  int roll_dim() const {
    return roll_head == RollHeadMode::kCategorical32 ? kNumKeepMasks
                                                     : kNumDice;
  }
};

// One named parameter tensor inside the flat arena. Weight tensors are
// stored input-major: w[in][out].
struct TensorView {
  std::string name;
  size_t offset = 0;
  int rows = 0;  // in (weights) or 1 (vectors)
  int cols = 0;  // out
  enum class Kind : uint8_t { kWeight, kBias, kNormGain, kNormBias } kind;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// Indices of one Linear(+Norm) block's tensors in the view list.
struct BlockRef {
  int w = -1, b = -1, gain = -1, nbias = -1;
  int in = 0, out = 0;
};

template <typename T>
struct Params {
  NetConfig cfg;
  int input_dim = 0;

  std::vector<TensorView> views;
  std::vector<T> data;      // canonical parameters, concatenated by view
  std::vector<T> w_cross;   // derived output-major copies of every weight
  std::vector<size_t> w_cross_offset;  // per view (weights only)

  std::vector<BlockRef> trunk;
  BlockRef roll_hidden, score_hidden, value_hidden, upper_hidden;
  BlockRef roll_out, score_out, value_out, upper_out;

  static Params build(const NetConfig& cfg, int input_dim);

  void init(uint64_t master_seed);
  // Refreshes the transposed weight copies; must be called after any direct
  // modification of `data` (optimizer steps, checkpoint loads).
  void sync_derived();

  T* tensor(int view_index) { return data.data() + views[view_index].offset; }
  const T* tensor(int view_index) const {
    return data.data() + views[view_index].offset;
  }
  const T* tensor_cross(int view_index) const {
    return w_cross.data() + w_cross_offset[view_index];
  }
  size_t param_count() const { return data.size(); }
  int find_view(const std::string& name) const;
};

// Per-site dropout keep masks for one batch (1 = keep). Sites are the trunk
// layers followed by the roll and score head hidden layers.
struct DropoutMasks {
  std::vector<std::vector<uint8_t>> keep;
};

template <typename T>
struct BlockTrace {
  std::vector<T> u;     // pre-activation
  std::vector<T> sig;   // sigmoid(u)
  std::vector<T> s;     // swish output
  std::vector<T> xhat;  // normalized pre-gain activations (layer_norm only)
  std::vector<T> inv_std;
  std::vector<T> out;   // block output (post dropout), input to next layer
};

template <typename T>
struct ForwardTrace {
  int n = 0;
  const T* features = nullptr;  // borrowed; must outlive the backward pass
  std::vector<BlockTrace<T>> blocks;  // trunk layers, then the 4 head hiddens
  std::vector<T> value_pre;           // pre-ELU value output
  DropoutMasks masks;                 // empty in eval mode
  std::vector<uint16_t> score_masks;
};

template <typename T>
struct PolicyOut {
  int n = 0;
  int roll_dim = 0;
  std::vector<T> roll_probs;   // n x roll_dim; Bernoulli: P(hold die i)
  std::vector<T> score_probs;  // n x 13, exactly 0 where masked
  std::vector<T> value;        // n, >= -1
  std::vector<T> upper;        // n
};

// Runs the network on `n` feature rows. In train mode dropout is active:
// masks come from `reuse_masks` if given, else are drawn from `dropout_rng`.
// Eval mode is deterministic and ignores both. `trace` may be null when no
// backward pass is needed.
template <typename T>
void net_forward(const Params<T>& params, const T* features, int n,
                 const uint16_t* score_masks, bool train_mode,
                 Rng* dropout_rng, const DropoutMasks* reuse_masks,
                 ForwardTrace<T>* trace, PolicyOut<T>* out);

// Exact gradients of a scalar loss with the given derivatives with respect
// to the head outputs: roll/score logits (masked entries must carry zero),
// the post-ELU value, and the upper prediction. Gradients are accumulated
// into `grads`, which has the canonical arena layout.
template <typename T>
void net_backward(const Params<T>& params, const ForwardTrace<T>& trace,
                  const T* d_roll_logits, const T* d_score_logits,
                  const T* d_value, const T* d_upper, std::vector<T>* grads);

// ---- Scalar activation helpers (shared with tests and the loss code) ----

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double swish(double x) { return x * sigmoid(x); }
inline double elu(double x) { return x > 0 ? x : std::exp(x) - 1.0; }

extern template struct Params<float>;
extern template struct Params<double>;
extern template void net_forward<float>(const Params<float>&, const float*,
                                        int, const uint16_t*, bool, Rng*,
                                        const DropoutMasks*,
                                        ForwardTrace<float>*,
                                        PolicyOut<float>*);
extern template void net_forward<double>(const Params<double>&, const double*,
                                         int, const uint16_t*, bool, Rng*,
                                         const DropoutMasks*,
                                         ForwardTrace<double>*,
                                         PolicyOut<double>*);
extern template void net_backward<float>(const Params<float>&,
                                         const ForwardTrace<float>&,
                                         const float*, const float*,
                                         const float*, const float*,
                                         std::vector<float>*);
extern template void net_backward<double>(const Params<double>&,
                                          const ForwardTrace<double>&,
                                          const double*, const double*,
                                          const double*, const double*,
                                          std::vector<double>*);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_NET_HPP_
