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

#ifndef YAHTZEE_RL_SRC_PARALLEL_HPP_
#define YAHTZEE_RL_SRC_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace yahtzee {

// Worker threads for embarrassingly parallel loops; YAHTZEE_THREADS
// overrides the hardware default. Always at least 1.
int worker_thread_count();

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk_size), never on the thread
// count, so any per-chunk outputs can be merged deterministically by chunk
// index. fn runs concurrently; it must only touch chunk-local state.
void parallel_for_chunks(
    int64_t n, int64_t chunk_size,
    const std::function<void(int64_t chunk_index, int64_t begin, int64_t end)>&
        fn);

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_PARALLEL_HPP_
