// Copyright 2026 The wmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>

namespace wmsim {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-keyed random stream.
///
/// Stream (seed, stream, index) starts from the state
///   mix64(seed ^ mix64(stream * 0x9e3779b97f4a7c15 + index))
/// and advances by the SplitMix64 recurrence. Each Monte Carlo trial owns the
/// stream keyed by its trial index, so results do not depend on how trials are
/// distributed over threads.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  constexpr StreamRng(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index)
      : state_(mix64(seed ^ mix64(stream * 0x9e3779b97f4a7c15ULL + index))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wmsim
