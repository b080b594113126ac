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

#ifndef HYMIMO_FRAME_HPP
#define HYMIMO_FRAME_HPP

#include <stdexcept>
#include <string>

namespace hymimo {

/// Frame geometry shared by every matrix operator in the simulator.
///
/// M delay bins / subcarriers, N Doppler bins / time slots, and the
/// cyclic-prefix length L_cp. OTFS frames prepend one CP per frame,
/// OFDM one CP per symbol, so the SE normalization is 1/(MN + L_cp).
struct FrameConfig {
    int M = 8;     // delay bins / subcarriers
    int N = 8;     // Doppler bins / time slots
    int L_cp = 3;  // cyclic prefix length, samples

    FrameConfig() = default;
    FrameConfig(int m, int n, int l_cp) : M(m), N(n), L_cp(l_cp) { validate(); }

    void validate() const {
        if (M < 1 || N < 1)
            throw std::invalid_argument("FrameConfig: M and N must be positive");
        if (L_cp < 0 || L_cp >= M)
            throw std::invalid_argument("FrameConfig: need 0 <= L_cp < M (got L_cp=" +
                                        std::to_string(L_cp) + ", M=" + std::to_string(M) + ")");
    }

    /// Data symbols per OFDM symbol.
    int L_d() const { return M - L_cp; }
    /// Samples per frame before the frame-level CP.
    int MN() const { return M * N; }
    /// OFDM symbol count per frame times data length.
    int LdN() const { return L_d() * N; }
    /// SE normalization 1/(MN + L_cp).
    double alpha_se() const { return 1.0 / static_cast<double>(M * N + L_cp); }
};

}  // namespace hymimo

#endif
