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

#ifndef YAHTZEE_RL_SRC_CHECKPOINT_HPP_
#define YAHTZEE_RL_SRC_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include "config.hpp"
#include "optim.hpp"

namespace yahtzee {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what)
      : std::runtime_error(what) {}
};

// Versioned binary container: the resolved config, named parameter tensors,
// optimizer state, training counters and the KL-tracking snapshot. RNG
// state is implicit: every stream is derived from (seed, domain, counter),
// so the counters stored here are sufficient to resume bit-exactly.
template <typename T>
struct Checkpoint {
  RunConfig config;
  Params<T> params;
  AdamState<T> adam;
  std::vector<T> kl_snapshot;  // parameter arena at the last KL comparison
  int64_t games_played = 0;
  int64_t updates = 0;
};

template <typename T>
void save_checkpoint(const std::string& path, const Checkpoint<T>& ckpt);

// Reads only the embedded config (for precision dispatch and evaluation).
RunConfig peek_checkpoint_config(const std::string& path);

// Loads and validates shapes against the embedded config. Throws
// CheckpointError on magic/version/dtype/shape mismatches.
template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path);

extern template void save_checkpoint<float>(const std::string&,
                                            const Checkpoint<float>&);
extern template void save_checkpoint<double>(const std::string&,
                                             const Checkpoint<double>&);
extern template Checkpoint<float> load_checkpoint<float>(const std::string&);
extern template Checkpoint<double> load_checkpoint<double>(
    const std::string&);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_CHECKPOINT_HPP_
