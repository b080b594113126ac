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

#ifndef HYMIMO_PRECODING_HPP
#define HYMIMO_PRECODING_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "system.hpp"

namespace hymimo {

enum class PrecodingScheme { FZF, PZF };

struct SingularChannelError : std::runtime_error {
    double condition;
    explicit SingularChannelError(double cond)
        : std::runtime_error("channel Gram matrix near-singular (condition estimate " +
                             std::to_string(cond) + ")"),
          condition(cond) {}
};

/// 0/1 block selector B_k of size K*MN x MN picking out block k.
inline CMat selection_matrix(int num_blocks, int k, int mn) {
    if (k < 0 || k >= num_blocks) throw std::invalid_argument("selection_matrix: block out of range");
    CMat b = CMat::Zero(static_cast<Eigen::Index>(num_blocks) * mn, mn);
    b.block(static_cast<Eigen::Index>(k) * mn, 0, mn, mn) = CMat::Identity(mn, mn);
    return b;
}

/// Row-block concatenation of the selected users' time-domain channels.
inline CMat stack_channels(const std::vector<ChannelRealization>& chans,
                           const std::vector<int>& indices) {
    if (indices.empty()) throw std::invalid_argument("stack_channels: empty user set");
    const Eigen::Index rows = chans[indices[0]].h_td.rows();
    const Eigen::Index cols = chans[indices[0]].h_td.cols();
    CMat h(rows * static_cast<Eigen::Index>(indices.size()), cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const CMat& hk = chans[indices[i]].h_td;
        if (hk.rows() != rows || hk.cols() != cols)
            throw std::invalid_argument("stack_channels: inconsistent dimensions");
        h.middleRows(static_cast<Eigen::Index>(i) * rows, rows) = hk;
    }
    return h;
}

inline std::vector<int> all_indices(int k) {
    std::vector<int> v(k);
    for (int i = 0; i < k; ++i) v[i] = i;
    return v;
}

inline std::vector<int> hm_indices(const SystemSpec& spec) {
    std::vector<int> v;
    for (int i = 0; i < spec.K(); ++i)
        if (spec.users[i].group == Mobility::HM) v.push_back(i);
    return v;
}

/// Shared zero-forcing factorization: holds H and the Cholesky factor of
/// G = H H^H so per-user precoders and Tr[G^-1] reuse one decomposition.
///
/// G is Hermitian PSD by construction; a condition estimate above the
/// threshold raises SingularChannelError (this happens whenever the stack has
/// more rows than N_t*MN columns, i.e. K > N_t).
class ZfFactorization {
  public:
    explicit ZfFactorization(CMat h_stacked, double cond_threshold = 1e12)
        : h_(std::move(h_stacked)) {
        const CMat g = h_ * h_.adjoint();
        llt_.compute(g);
        const RVec d = llt_.matrixLLT().diagonal().real();
        const double dmax = d.maxCoeff(), dmin = d.minCoeff();
        const double cond = dmin > 0.0 ? (dmax / dmin) * (dmax / dmin)
                                       : std::numeric_limits<double>::infinity();
        if (llt_.info() != Eigen::Success || cond > cond_threshold)
            throw SingularChannelError(cond);
    }

    Eigen::Index block_size(int num_blocks) const { return h_.rows() / num_blocks; }

    /// W_k = alpha * H^H (H H^H)^-1 B_k.
    CMat precoder(int num_blocks, int k, double alpha) const {
        const Eigen::Index mn = block_size(num_blocks);
        CMat b = CMat::Zero(h_.rows(), mn);
        b.block(static_cast<Eigen::Index>(k) * mn, 0, mn, mn) = CMat::Identity(mn, mn);
        return alpha * (h_.adjoint() * llt_.solve(b));
    }

    double trace_inverse() const {
        const Eigen::Index n = h_.rows();
        return llt_.solve(CMat::Identity(n, n)).real().trace();
    }

    const CMat& stacked() const { return h_; }

  private:
    CMat h_;
    Eigen::LLT<CMat> llt_;
};

inline double alpha_mrt(double beta, int n_t) {
    if (!(beta > 0.0)) throw std::invalid_argument("alpha_mrt: beta must be > 0");
    return 1.0 / std::sqrt(beta * n_t);
}

/// MRT precoder W = alpha_mrt * (H^TD)^H.
inline CMat mrt_precoder(const CMat& h_td, double beta, int n_t) {
    return alpha_mrt(beta, n_t) * h_td.adjoint();
}

/// Monte Carlo estimate of an ensemble normalization constant with its
/// standard error; `redraws` counts singular draws that were replaced.
struct AlphaEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int redraws = 0;
};

namespace detail {

/// alpha = sqrt(numer / E{Tr[(H H^H)^-1]}) over N_mc channel draws.
inline AlphaEstimate estimate_alpha(const SystemSpec& spec, const std::vector<int>& members,
                                    double numer, int n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw std::invalid_argument("estimate_alpha: N_mc must be >= 1");
    double sum = 0.0, sumsq = 0.0;
    int redraws = 0;
    for (int i = 0; i < n_mc; ++i) {
        double t = 0.0;
        std::uint64_t attempt = 0;
        for (;;) {
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i) + (attempt << 32));
            auto chans = spec.draw_realizations(rng);
            try {
                t = ZfFactorization(stack_channels(chans, members)).trace_inverse();
                break;
            } catch (const SingularChannelError&) {
                ++redraws;
                ++attempt;
                if (attempt > 64) throw;
            }
        }
        sum += t;
        sumsq += t * t;
    }
    const double mean = sum / n_mc;
    const double var = n_mc > 1 ? std::max(0.0, (sumsq - n_mc * mean * mean) / (n_mc - 1)) : 0.0;
    const double se_mean = std::sqrt(var / n_mc);
    AlphaEstimate est;
    est.value = std::sqrt(numer / mean);
    // delta method: d alpha / d mean = -alpha / (2 mean)
    est.std_error = est.value / (2.0 * mean) * se_mean;
    est.redraws = redraws;
    return est;
}

}  // namespace detail

/// alpha_FZF = sqrt(K*MN / E{Tr[(H_fzf H_fzf^H)^-1]}).
inline AlphaEstimate estimate_alpha_fzf(const SystemSpec& spec, int n_mc, std::uint64_t seed) {
    return detail::estimate_alpha(spec, all_indices(spec.K()),
                                  static_cast<double>(spec.K()) * spec.frame.MN(), n_mc, seed);
}

/// alpha_PZF = sqrt(K_h*MN / E{Tr[(H_pzf H_pzf^H)^-1]}), HM-only stack.
inline AlphaEstimate estimate_alpha_pzf(const SystemSpec& spec, int n_mc, std::uint64_t seed) {
    const auto hm = hm_indices(spec);
    if (hm.empty()) throw std::invalid_argument("estimate_alpha_pzf: no HM users");
    return detail::estimate_alpha(spec, hm,
                                  static_cast<double>(hm.size()) * spec.frame.MN(), n_mc, seed);
}

/// Per-user precoding matrices for one channel realization set.
struct PrecoderSet {
    PrecodingScheme scheme = PrecodingScheme::FZF;
    std::vector<CMat> w;  // per user, N_t*MN x MN
};

/// Builds W_k for every user from the same realizations used in SE
/// evaluation (perfect CSI). For FZF all users share the full-stack ZF; for
/// PZF the HM users get HM-stack ZF and LM users get MRT.
inline PrecoderSet build_precoders(const SystemSpec& spec,
                                   const std::vector<ChannelRealization>& chans,
                                   PrecodingScheme scheme, double alpha_zf) {
    PrecoderSet set;
    set.scheme = scheme;
    set.w.resize(spec.K());
    if (scheme == PrecodingScheme::FZF) {
        ZfFactorization zf(stack_channels(chans, all_indices(spec.K())));
        for (int k = 0; k < spec.K(); ++k) set.w[k] = zf.precoder(spec.K(), k, alpha_zf);
    } else {
        const auto hm = hm_indices(spec);
        if (!hm.empty()) {
            ZfFactorization zf(stack_channels(chans, hm));
            for (std::size_t i = 0; i < hm.size(); ++i)
                set.w[hm[i]] = zf.precoder(static_cast<int>(hm.size()), static_cast<int>(i),
                                           alpha_zf);
        }
        for (int k = 0; k < spec.K(); ++k)
            if (spec.users[k].group == Mobility::LM)
                set.w[k] = mrt_precoder(chans[k].h_td, spec.users[k].beta, spec.n_t);
    }
    return set;
}

}  // namespace hymimo

#endif
