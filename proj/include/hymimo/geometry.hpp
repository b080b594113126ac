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

#ifndef HYMIMO_GEOMETRY_HPP
#define HYMIMO_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace hymimo {

/// Drop geometry and large-scale fading parameters. Distances are in meters;
/// the square is wrapped around its edges (8 neighbor copies) for both path
/// loss and shadowing correlation.
struct Geometry {
    double D = 250.0;         // square side, m
    double d0 = 10.0;         // inner path-loss breakpoint, m
    double d1 = 50.0;         // outer path-loss breakpoint, m
    double d_decorr = 100.0;  // shadowing decorrelation distance, m
    double delta = 0.5;       // BS/user shadowing weight
    double sigma_sh_db = 8.0; // shadowing std, dB
    double f_mhz = 2000.0;    // carrier, MHz
    double h_bs = 15.0;       // BS antenna height, m
    double h_u = 1.65;        // user antenna height, m

    void validate() const {
        if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("Geometry: need 0 <= delta <= 1");
        if (!(d0 < d1 && d1 < D)) throw std::invalid_argument("Geometry: need d0 < d1 < D");
    }

    /// Constant term L of the three-slope model, dB.
    double path_loss_constant_db() const {
        const double lf = std::log10(f_mhz);
        return 46.3 + 33.9 * lf - 13.82 * std::log10(h_bs) - (1.1 * lf - 0.7) * h_u +
               (1.56 * lf - 0.8);
    }

    /// Three-slope path loss, dB (negative gain).
    double path_loss_db(double d) const {
        const double L = path_loss_constant_db();
        if (d > d1) return -L - 35.0 * std::log10(d);
        if (d > d0) return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d);
        return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
    }

    /// Minimum distance over the 9 wrapped copies of the square.
    double wrap_distance(double x1, double y1, double x2, double y2) const {
        double best = std::numeric_limits<double>::infinity();
        for (int sx = -1; sx <= 1; ++sx)
            for (int sy = -1; sy <= 1; ++sy) {
                const double dx = x1 - (x2 + sx * D), dy = y1 - (y2 + sy * D);
                best = std::min(best, std::hypot(dx, dy));
            }
        return best;
    }
};

struct LargeScaleFading {
    std::vector<double> beta;  // linear
    bool psd_projected = false;  // covariance needed a nearest-PSD fallback
};

/// Correlated shadowing + three-slope path loss per Table-II style geometry.
///
/// Users beyond d1 share a BS shadowing term and get user terms b_k with
/// E{b_k b_k'} = 2^(-d(k,k')/d_decorr); users within d1 get i.i.d. standard
/// normal shadowing. The BS sits at the square center.
inline LargeScaleFading large_scale_fading(const std::vector<UserProfile>& users,
                                           const Geometry& geom, Rng& rng) {
    geom.validate();
    const int k = static_cast<int>(users.size());
    const double cx = geom.D / 2.0, cy = geom.D / 2.0;

    std::vector<double> dist(k);
    std::vector<int> correlated;  // indices with d > d1
    for (int i = 0; i < k; ++i) {
        dist[i] = geom.wrap_distance(users[i].x, users[i].y, cx, cy);
        if (dist[i] > geom.d1) correlated.push_back(i);
    }

    LargeScaleFading out;
    out.beta.resize(k);

    // correlated block: covariance from pairwise wrap-around distances
    const int nc = static_cast<int>(correlated.size());
    std::vector<double> b(nc, 0.0);
    if (nc > 0) {
        RMat cov(nc, nc);
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < nc; ++j) {
                const auto &ui = users[correlated[i]], &uj = users[correlated[j]];
                cov(i, j) = std::pow(2.0, -geom.wrap_distance(ui.x, ui.y, uj.x, uj.y) /
                                              geom.d_decorr);
            }
        // symmetric square root; the covariance is only semidefinite when
        // users coincide, so clamp tiny negative eigenvalues instead of LLT
        Eigen::SelfAdjointEigenSolver<RMat> es(cov);
        if (es.eigenvalues().minCoeff() < -1e-9) out.psd_projected = true;
        const RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const RMat chol = es.eigenvectors() * ev.asDiagonal();
        RVec g(nc);
        for (int i = 0; i < nc; ++i) g(i) = rng.normal();
        Eigen::Map<RVec>(b.data(), nc) = chol * g;
    }
    const double a_bs = rng.normal();

    for (int i = 0; i < k; ++i) {
        double z;
        if (dist[i] > geom.d1) {
            const auto it = std::find(correlated.begin(), correlated.end(), i);
            z = std::sqrt(geom.delta) * a_bs +
                std::sqrt(1.0 - geom.delta) * b[it - correlated.begin()];
        } else {
            z = rng.normal();
        }
        const double pl_db = geom.path_loss_db(dist[i]);
        out.beta[i] = std::pow(10.0, pl_db / 10.0) * std::pow(10.0, geom.sigma_sh_db * z / 10.0);
    }
    return out;
}

/// Uniform user drop over the D x D square with HM/LM tagging and the
/// default mobility bounds (l_max = 3; k_max = 5 for HM, 3 for LM).
inline std::vector<UserProfile> drop_users(int k_h, int k_l, const Geometry& geom, Rng& rng) {
    if (k_h + k_l < 1) throw std::invalid_argument("drop_users: need at least one user");
    std::vector<UserProfile> users;
    users.reserve(k_h + k_l);
    for (int i = 0; i < k_h + k_l; ++i) {
        UserProfile u;
        u.group = i < k_h ? Mobility::HM : Mobility::LM;
        u.x = rng.uniform(0.0, geom.D);
        u.y = rng.uniform(0.0, geom.D);
        u.l_max = 3;
        u.k_max = u.group == Mobility::HM ? 5.0 : 3.0;
        users.push_back(u);
    }
    return users;
}

}  // namespace hymimo

#endif
