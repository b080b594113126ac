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

#ifndef HYMIMO_CHANNEL_HPP
#define HYMIMO_CHANNEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "frame.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "transforms.hpp"

namespace hymimo {

enum class Mobility { HM, LM };

/// Static per-user description: mobility group, position in the square, the
/// large-scale fading coefficient, and the delay/Doppler index bounds used
/// for path generation.
struct UserProfile {
    Mobility group = Mobility::HM;
    double x = 0.0, y = 0.0;  // meters
    double beta = 1.0;        // linear scale
    int l_max = 3;
    double k_max = 5.0;
};

/// One multipath realization: per-path complex gain, integer delay index,
/// real (possibly fractional) Doppler index and angle of arrival.
struct PathSet {
    std::vector<cd> gain;
    std::vector<int> delay;
    std::vector<double> doppler;
    std::vector<double> angle;  // radians

    int count() const { return static_cast<int>(gain.size()); }
};

/// ULA steering row vector, theta[n] = exp(-i pi n sin(phi)), n = 0..N_t-1.
inline Eigen::RowVectorXcd steering_vector(double phi, int n_t) {
    if (n_t < 1) throw std::invalid_argument("steering_vector: N_t must be >= 1");
    Eigen::RowVectorXcd v(n_t);
    const double s = std::sin(phi);
    for (int n = 0; n < n_t; ++n) v(n) = std::polar(1.0, -std::numbers::pi * n * s);
    return v;
}

/// Draws P paths: delay uniform on {0..l_max}, Doppler uniform on
/// [-k_max, k_max] (or on the integer grid when integer_doppler is set),
/// gains CN(0, 1/P), and sin(phi) uniform on [-1, 1].
inline PathSet draw_paths(const UserProfile& profile, int p, Rng& rng,
                          bool integer_doppler = false) {
    if (p < 1) throw std::invalid_argument("draw_paths: P must be >= 1");
    PathSet ps;
    ps.gain.reserve(p);
    ps.delay.reserve(p);
    ps.doppler.reserve(p);
    ps.angle.reserve(p);
    for (int i = 0; i < p; ++i) {
        ps.gain.push_back(rng.cnormal(1.0 / p));
        ps.delay.push_back(rng.uniform_int(profile.l_max + 1));
        if (integer_doppler) {
            const int span = 2 * static_cast<int>(std::floor(profile.k_max)) + 1;
            ps.doppler.push_back(rng.uniform_int(span) - std::floor(profile.k_max));
        } else {
            ps.doppler.push_back(rng.uniform(-profile.k_max, profile.k_max));
        }
        ps.angle.push_back(std::asin(rng.uniform(-1.0, 1.0)));
    }
    return ps;
}

/// Time-domain channel H^TD = sqrt(beta) sum_i theta_i kron (h_i Pi^l_i Delta^k_i),
/// of size MN x N_t*MN.
inline CMat time_domain_channel(const PathSet& paths, double beta, const FrameConfig& cfg,
                                int n_t) {
    const int mn = cfg.MN();
    if (static_cast<std::uint64_t>(mn) * n_t * mn > (1ULL << 28))
        throw std::runtime_error("time_domain_channel: matrix too large to materialize");
    CMat h = CMat::Zero(mn, static_cast<Eigen::Index>(n_t) * mn);
    const double sb = std::sqrt(beta);
    for (int i = 0; i < paths.count(); ++i) {
        const CMat op = delay_doppler_operator(mn, paths.delay[i], paths.doppler[i]);
        const Eigen::RowVectorXcd th = steering_vector(paths.angle[i], n_t);
        for (int a = 0; a < n_t; ++a)
            h.middleCols(static_cast<Eigen::Index>(a) * mn, mn) +=
                (sb * paths.gain[i] * th(a)) * op;
    }
    require_finite(h, "time_domain_channel");
    return h;
}

/// H^DD = (F_N kron I_M) H^TD (I_Nt kron F_N^H kron I_M).
inline CMat dd_channel(const CMat& h_td, const FrameConfig& cfg, int n_t) {
    const int mn = cfg.MN();
    if (h_td.rows() != mn || h_td.cols() != static_cast<Eigen::Index>(n_t) * mn)
        throw std::invalid_argument("dd_channel: H^TD must be MN x N_t*MN");
    const CMat rx = dd_rx_matrix(cfg);
    const CMat tx = otfs_tx_matrix(cfg);
    CMat out(mn, h_td.cols());
    for (int a = 0; a < n_t; ++a)
        out.middleCols(static_cast<Eigen::Index>(a) * mn, mn) =
            rx * h_td.middleCols(static_cast<Eigen::Index>(a) * mn, mn) * tx;
    return out;
}

/// H^TF = (I_N kron F_M) H^TD (I_Nt kron I_N kron F_M^H).
inline CMat tf_channel(const CMat& h_td, const FrameConfig& cfg, int n_t) {
    const int mn = cfg.MN();
    if (h_td.rows() != mn || h_td.cols() != static_cast<Eigen::Index>(n_t) * mn)
        throw std::invalid_argument("tf_channel: H^TD must be MN x N_t*MN");
    const CMat fm = dft_matrix(cfg.M);
    const CMat rx = kron(CMat::Identity(cfg.N, cfg.N), fm);
    const CMat tx = kron(CMat::Identity(cfg.N, cfg.N), CMat(fm.adjoint()));
    CMat out(mn, h_td.cols());
    for (int a = 0; a < n_t; ++a)
        out.middleCols(static_cast<Eigen::Index>(a) * mn, mn) =
            rx * h_td.middleCols(static_cast<Eigen::Index>(a) * mn, mn) * tx;
    return out;
}

/// Per-user channel realization; the TD matrix is materialized eagerly, the
/// DD/TF views on demand.
struct ChannelRealization {
    PathSet paths;
    double beta = 1.0;
    CMat h_td;

    ChannelRealization() = default;
    ChannelRealization(PathSet ps, double b, const FrameConfig& cfg, int n_t)
        : paths(std::move(ps)), beta(b), h_td(time_domain_channel(paths, beta, cfg, n_t)) {}

    CMat dd(const FrameConfig& cfg, int n_t) const { return dd_channel(h_td, cfg, n_t); }
    CMat tf(const FrameConfig& cfg, int n_t) const { return tf_channel(h_td, cfg, n_t); }
};

}  // namespace hymimo

#endif
