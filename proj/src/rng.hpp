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

#ifndef YAHTZEE_RL_SRC_RNG_HPP_
#define YAHTZEE_RL_SRC_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace yahtzee {

// Deterministic RNG used everywhere instead of <random> distributions, whose
// output is not pinned down by the standard. xoshiro256++ seeded via
// splitmix64, integer bounds via Lemire's multiply-shift rejection method.
//
// Stream splitting: every consumer derives its own stream seed with
// derive_stream(master, domain, index), so the draw sequence of one consumer
// (a game, a dropout pass, ...) never depends on what any other consumer did.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream domains. Keep values stable: they are part of the reproducibility
// contract (checkpoints only store the master seed plus counters).
enum class StreamDomain : uint64_t {
  kInit = 1,      // parameter initialization
  kGame = 2,      // per-training-game dice/sampling, index = global game id
  kEvalGame = 3,  // per-evaluation-game, index = eval_round * 2^32 + game
  kDropout = 4,   // per-gradient-update dropout masks, index = update id
  kProbe = 5,     // KL probe-state generation
  kShuffle = 6,   // PPO minibatch shuffling, index = update id
};

inline uint64_t derive_stream(uint64_t master, StreamDomain domain,
                              uint64_t index) {
  uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x6a09e667f3bcc909ull * static_cast<uint64_t>(domain);
  (void)splitmix64(s);
  s ^= 0xbb67ae8584caa73bull * (index + 1);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    for (auto& word : s_) word = splitmix64(seed);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound). bound must be >= 1.
  uint64_t uniform_int(uint64_t bound) {
    // Lemire's method with rejection on the low word.
    uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < bound) {
      uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // One die face, 1..6.
  int roll_die() { return 1 + static_cast<int>(uniform_int(6)); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (polar-free form, cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Avoid log(0).
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace yahtzee

#endif  // YAHTZEE_RL_SRC_RNG_HPP_
