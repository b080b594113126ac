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

#ifndef HYMIMO_TRANSFORMS_HPP
#define HYMIMO_TRANSFORMS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "frame.hpp"
#include "linalg.hpp"

namespace hymimo {

/// Normalized DFT matrix: F[j,k] = exp(-i 2 pi j k / n) / sqrt(n). Unitary.
inline CMat dft_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dft_matrix: n must be >= 1");
    CMat f(n, n);
    const double w = 2.0 * std::numbers::pi / n;
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            // reduce j*k mod n first so large frames keep full phase accuracy
            const long long jk = (static_cast<long long>(j) * k) % n;
            f(j, k) = s * std::polar(1.0, -w * static_cast<double>(jk));
        }
    return f;
}

/// CP addition matrix A_cp (M x L_d): the last L_cp rows of I_{L_d} stacked
/// above I_{L_d}. CP removal matrix R_cp (L_d x M): I_M with its first L_cp
/// rows deleted. R_cp * A_cp = I_{L_d} exactly.
inline std::pair<CMat, CMat> cp_matrices(const FrameConfig& cfg) {
    cfg.validate();
    const int Ld = cfg.L_d();
    CMat a = CMat::Zero(cfg.M, Ld);
    for (int r = 0; r < cfg.L_cp; ++r) a(r, Ld - cfg.L_cp + r) = 1.0;
    a.block(cfg.L_cp, 0, Ld, Ld) = CMat::Identity(Ld, Ld);
    CMat r = CMat::Zero(Ld, cfg.M);
    for (int i = 0; i < Ld; ++i) r(i, cfg.L_cp + i) = 1.0;
    return {std::move(a), std::move(r)};
}

/// Pi^l Delta^k of size MN x MN. Pi is the forward cyclic shift
/// circ{[0,1,0,...]^T}; Delta^k = diag{exp(i 2 pi m k / MN)}, with k allowed
/// to be fractional.
inline CMat delay_doppler_operator(int mn, int l, double k) {
    if (mn < 1) throw std::invalid_argument("delay_doppler_operator: MN must be >= 1");
    if (l < 0 || l >= mn) throw std::invalid_argument("delay_doppler_operator: need 0 <= l < MN");
    const double w = 2.0 * std::numbers::pi / mn;
    CMat out = CMat::Zero(mn, mn);
    // row j of Pi^l has its 1 in column (j - l) mod MN; scale by Delta^k entry
    for (int j = 0; j < mn; ++j) {
        const int col = ((j - l) % mn + mn) % mn;
        out(j, col) = std::polar(1.0, w * k * static_cast<double>(col));
    }
    return out;
}

/// OTFS modulation (F_N^H kron I_M) vec(S) for an M x N delay-Doppler grid.
inline CVec otfs_modulate(const CMat& S, const FrameConfig& cfg) {
    if (S.rows() != cfg.M || S.cols() != cfg.N)
        throw std::invalid_argument("otfs_modulate: grid must be M x N");
    const CMat fnh = dft_matrix(cfg.N).adjoint();
    // (F_N^H kron I_M) vec(S) = vec(S F_N^T) with the adjoint absorbed
    CMat out = S * fnh.transpose();
    return Eigen::Map<CVec>(out.data(), out.size());
}

/// OTFS transmit operator (F_N^H kron I_M), materialized.
inline CMat otfs_tx_matrix(const FrameConfig& cfg) {
    return kron(dft_matrix(cfg.N).adjoint(), CMat::Identity(cfg.M, cfg.M));
}

/// OFDM transmit operator (I_N kron A_cp F_{L_d}^H), materialized.
inline CMat ofdm_tx_matrix(const FrameConfig& cfg) {
    auto [a, r] = cp_matrices(cfg);
    return kron(CMat::Identity(cfg.N, cfg.N), CMat(a * dft_matrix(cfg.L_d()).adjoint()));
}

/// OFDM modulation (I_N kron A_cp F_{L_d}^H) s for a length L_d*N symbol vector.
inline CVec ofdm_modulate(const CVec& s, const FrameConfig& cfg) {
    if (s.size() != cfg.LdN())
        throw std::invalid_argument("ofdm_modulate: symbol vector must have length L_d*N");
    return ofdm_tx_matrix(cfg) * s;
}

/// DD-domain receive operator (F_N kron I_M).
inline CMat dd_rx_matrix(const FrameConfig& cfg) {
    return kron(dft_matrix(cfg.N), CMat::Identity(cfg.M, cfg.M));
}

/// TF-domain receive operator (I_N kron F_{L_d} R_cp).
inline CMat tf_rx_matrix(const FrameConfig& cfg) {
    auto [a, r] = cp_matrices(cfg);
    return kron(CMat::Identity(cfg.N, cfg.N), CMat(dft_matrix(cfg.L_d()) * r));
}

inline CVec receive_transform_dd(const CVec& y, const FrameConfig& cfg) {
    if (y.size() != cfg.MN())
        throw std::invalid_argument("receive_transform_dd: vector must have length MN");
    return dd_rx_matrix(cfg) * y;
}

inline CVec receive_transform_tf(const CVec& y, const FrameConfig& cfg) {
    if (y.size() != cfg.MN())
        throw std::invalid_argument("receive_transform_tf: vector must have length MN");
    return tf_rx_matrix(cfg) * y;
}

}  // namespace hymimo

#endif
