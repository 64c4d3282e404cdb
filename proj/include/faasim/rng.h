// Copyright (c) The FaaSim Authors.
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

#ifndef FAASIM_RNG_H_
#define FAASIM_RNG_H_

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace faasim {

// Counter-based generator (splitmix64 finalizer over key + counter).  The
// nth output is a pure function of (seed, stream, n), so every consumer in
// the simulator draws from its own stream and replays are exact regardless
// of event interleaving.
class CounterRng {
 public:
  CounterRng() : CounterRng(1, 0) {}
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(Mix(seed ^ Mix(stream + 0x632be59bd9b4e019ull))) {}

  uint64_t NextU64() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return Mix(key_ + counter_);
  }

  // Uniform in (0, 1]; never 0, so -log(u) stays finite.
  double NextUnit() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Exponential with the given rate (mean 1/rate), via inverse CDF.
  double NextExp(double rate) {
    if (rate <= 0) throw std::invalid_argument("NextExp: rate must be > 0");
    return -std::log(NextUnit()) / rate;
  }

  double NextUniform(double lo, double hi) {
    return lo + (hi - lo) * NextUnit();
  }

  // Uniform integer in [0, n).  Lemire reduction; bias is O(n / 2^64).
  uint64_t NextBelow(uint64_t n) {
    if (n == 0) throw std::invalid_argument("NextBelow: n must be > 0");
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(NextU64()) * n) >> 64);
  }

 private:
  static uint64_t Mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace faasim

#endif  // FAASIM_RNG_H_
