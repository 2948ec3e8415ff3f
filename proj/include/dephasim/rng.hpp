// Copyright 2026 The Dephasim Authors
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

#include <cmath>
#include <cstdint>

// Self-contained pseudo-random machinery. Every stream in the project is
// derived from a 64-bit seed through the fixed transformations below, so a
// (seed, index) pair always reproduces the same numbers, independent of
// platform, standard library, and thread count.

namespace dephasim {

// splitmix64 finalizer (Vigna). Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation for sub-streams. For a fixed (base, salt)
// the map index -> seed is injective: the inner affine step is a bijection
// mod 2^64 and mix64 is a bijection, so distinct indices can never collide.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt,
                                 std::uint64_t index) noexcept {
  const std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = mix64(base + golden * (salt + 1));
  return mix64(z + golden * (index + 1));
}

// Stream salts. Values are arbitrary but frozen: changing them changes every
// sampled number in the project.
namespace seed_salt {
inline constexpr std::uint64_t disorder = 0xD1503DE6A11CE001ULL;
inline constexpr std::uint64_t digital = 0x0D1617A1E6013001ULL;
inline constexpr std::uint64_t analogue = 0x0A6A106E6013E002ULL;
inline constexpr std::uint64_t tilt_member = 0x717F3EED3E6B0003ULL;
}  // namespace seed_salt

// xoshiro256++ (Blackman & Vigna, public domain reference implementation),
// seeded by running splitmix64 from the given seed.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9E3779B97F4A7C15ULL;
      word = mix64(sm);
    }
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 significant bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [-half_width, half_width].
  double uniform_symmetric(double half_width) noexcept {
    return half_width * (2.0 * uniform() - 1.0);
  }

  // Standard normal via Box-Muller on the uniform stream; the second draw of
  // each pair is cached so consecutive calls consume one uniform pair.
  double gaussian() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dephasim
