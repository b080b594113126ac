// SPDX-License-Identifier: Apache-2.0
//
// hymimo: link-level simulation of hybrid OTFS/OFDM downlink massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HYMIMO_RNG_HPP
#define HYMIMO_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace hymimo {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable RNG with hand-rolled uniform/normal mappings, so that the byte
/// stream is a pure function of the seed on every platform and thread layout.
///
/// Substreams are derived by hashing (seed, stream index); Monte Carlo loops
/// give each draw its own substream, which keeps campaigns reproducible under
/// any parallel schedule.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    /// Independent substream for draw/drop `index`.
    static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix64(master_seed ^ splitmix64(index + 0x51ed2700a1b2c3d4ULL)));
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on {0, ..., n-1} by rejection.
    int uniform_int(int n) {
        const std::uint64_t bound = ~0ULL - ~0ULL % static_cast<std::uint64_t>(n);
        std::uint64_t x;
        do { x = eng_(); } while (x >= bound);
        return static_cast<int>(x % static_cast<std::uint64_t>(n));
    }

    /// Standard normal, Box-Muller with no cached half (two uniforms per draw).
    double normal() {
        double u1;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Circularly-symmetric complex Gaussian with total variance `var`.
    std::complex<double> cnormal(double var) {
        const double s = std::sqrt(var / 2.0);
        return {s * normal(), s * normal()};
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace hymimo

#endif
