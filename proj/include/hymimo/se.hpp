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

#ifndef HYMIMO_SE_HPP
#define HYMIMO_SE_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "precoding.hpp"
#include "system.hpp"
#include "transforms.hpp"

namespace hymimo {

// ---------------------------------------------------------------- link budget

struct LinkBudget {
    double tx_power_w = 0.2;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;
};

constexpr double k_boltzmann = 1.381e-23;  // J/K
constexpr double t0_kelvin = 290.0;

/// Thermal noise power BW * k_B * T0 * NF, watts.
inline double noise_power(double bandwidth_hz, double noise_figure_db) {
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("noise_power: bandwidth must be > 0");
    return bandwidth_hz * k_boltzmann * t0_kelvin * std::pow(10.0, noise_figure_db / 10.0);
}

/// Normalized transmit SNR (linear).
inline double rho_linear(const LinkBudget& link) {
    return link.tx_power_w / noise_power(link.bandwidth_hz, link.noise_figure_db);
}

// ------------------------------------------------------------ effective gains

/// Cached transmit/receive domain operators for one frame configuration.
struct DomainOps {
    CMat dd_rx;    // MN x MN
    CMat tf_rx;    // L_d N x MN
    CMat otfs_tx;  // MN x MN
    CMat ofdm_tx;  // MN x L_d N

    explicit DomainOps(const FrameConfig& cfg)
        : dd_rx(dd_rx_matrix(cfg)),
          tf_rx(tf_rx_matrix(cfg)),
          otfs_tx(otfs_tx_matrix(cfg)),
          ofdm_tx(ofdm_tx_matrix(cfg)) {}

    const CMat& rx(Mobility g) const { return g == Mobility::HM ? dd_rx : tf_rx; }
    const CMat& tx(Mobility g) const { return g == Mobility::HM ? otfs_tx : ofdm_tx; }
};

/// D_{k k'} sample: sqrt(rho eta_k') R_k H_k^TD W_k' T_k', with the receive
/// transform matched to k's modulation domain and the transmit transform to
/// k''s.
inline CMat effective_gain(const DomainOps& ops, const SystemSpec& spec,
                           const std::vector<ChannelRealization>& chans,
                           const PrecoderSet& precoders, int k, int kp,
                           const std::vector<double>& eta, double rho) {
    const double scale = std::sqrt(rho * eta[kp]);
    return scale * (ops.rx(spec.users[k].group) *
                    (chans[k].h_td * precoders.w[kp]) * ops.tx(spec.users[kp].group));
}

// ------------------------------------------------------------------ log-det SE

struct PsiNotPdError : std::runtime_error {
    double min_eigenvalue;
    explicit PsiNotPdError(double ev)
        : std::runtime_error("interference covariance not positive definite (min eigenvalue " +
                             std::to_string(ev) + ")"),
          min_eigenvalue(ev) {}
};

/// alpha_se * log2 det(I + D_bar^H Psi^-1 D_bar), via Cholesky log-det
/// accumulation.
inline double mmse_sic_se(const CMat& d_bar, const CMat& psi, double alpha_se) {
    CMat p = 0.5 * (psi + psi.adjoint());
    Eigen::LLT<CMat> llt(p);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<CMat> es(p, Eigen::EigenvaluesOnly);
        throw PsiNotPdError(es.eigenvalues().minCoeff());
    }
    const CMat x = llt.matrixL().solve(d_bar);
    CMat g = CMat::Identity(d_bar.cols(), d_bar.cols()) + x.adjoint() * x;
    Eigen::LLT<CMat> lltg(g);
    if (lltg.info() != Eigen::Success) throw PsiNotPdError(-1.0);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        logdet += 2.0 * std::log2(lltg.matrixLLT()(i, i).real());
    return alpha_se * logdet;
}

// ------------------------------------------------------------- SE evaluation

enum class SeMethod { Numerical, MatrixProp, ClosedForm };

inline const char* se_method_name(SeMethod m) {
    switch (m) {
        case SeMethod::Numerical: return "numerical";
        case SeMethod::MatrixProp: return "prop";
        case SeMethod::ClosedForm: return "corollary";
    }
    return "?";
}

struct SEReport {
    std::vector<double> se;         // bit/s/Hz per user
    std::vector<double> std_error;  // MC error bar where applicable, else 0
    SeMethod method = SeMethod::Numerical;
};

/// Fully empirical SE per Monte Carlo estimation of the mean effective gain
/// and the interference-plus-noise covariance; error bars by batch means.
inline SEReport numerical_se(const SystemSpec& spec, PrecodingScheme scheme,
                             const std::vector<double>& eta, double rho, double alpha_zf,
                             int n_mc, std::uint64_t seed, int n_batches = 4) {
    spec.validate();
    if (n_mc < 2) throw std::invalid_argument("numerical_se: N_mc must be >= 2");
    n_batches = std::min(n_batches, n_mc);
    const DomainOps ops(spec.frame);
    const int k_total = spec.K();
    const int mn = spec.frame.MN();
    const int ldn = spec.frame.LdN();
    const auto dim = [&](int k) { return spec.users[k].group == Mobility::HM ? mn : ldn; };

    // Per-batch accumulators: D_kk, the cross-term second moments, and the
    // self term centered on the first draw. The centering matters: at high
    // SNR, E{D D^H} and D_bar D_bar^H agree to ~11 digits, and forming their
    // difference directly leaves only rounding noise in Psi. Accumulating
    // (D - R)(D - R)^H with a fixed reference R keeps the small difference
    // exact while remaining algebraically identical.
    std::vector<std::vector<CMat>> dsum(n_batches), csum(n_batches), ssum(n_batches);
    std::vector<CMat> ref(k_total);
    std::vector<int> counts(n_batches, 0);
    for (int b = 0; b < n_batches; ++b) {
        dsum[b].resize(k_total);
        csum[b].resize(k_total);
        ssum[b].resize(k_total);
        for (int k = 0; k < k_total; ++k) {
            dsum[b][k] = CMat::Zero(dim(k), dim(k));
            csum[b][k] = CMat::Zero(dim(k), dim(k));
            ssum[b][k] = CMat::Zero(dim(k), dim(k));
        }
    }

    for (int i = 0; i < n_mc; ++i) {
        Rng rng = Rng::substream(seed, i);
        std::vector<ChannelRealization> chans;
        PrecoderSet pre;
        try {
            chans = spec.draw_realizations(rng);
            pre = build_precoders(spec, chans, scheme, alpha_zf);
        } catch (const SingularChannelError& e) {
            throw std::runtime_error("numerical_se: singular draw at index " + std::to_string(i) +
                                     ": " + e.what());
        }
        const int b = i * n_batches / n_mc;
        ++counts[b];
        for (int k = 0; k < k_total; ++k) {
            for (int kp = 0; kp < k_total; ++kp) {
                const CMat d = effective_gain(ops, spec, chans, pre, k, kp, eta, rho);
                if (kp == k) {
                    if (i == 0) ref[k] = d;
                    dsum[b][k] += d;
                    const CMat dev = d - ref[k];
                    ssum[b][k] += dev * dev.adjoint();
                } else {
                    csum[b][k] += d * d.adjoint();
                }
            }
        }
    }

    // Psi = I + cross + E{(D-R)(D-R)^H} - (D_bar - R)(D_bar - R)^H
    const auto se_from = [&](const CMat& dbar, const CMat& cbar, const CMat& sbar, int k) {
        const CMat dc = dbar - ref[k];
        CMat psi = CMat::Identity(dim(k), dim(k)) + cbar + sbar - dc * dc.adjoint();
        return mmse_sic_se(dbar, psi, spec.frame.alpha_se());
    };

    SEReport rep;
    rep.method = SeMethod::Numerical;
    rep.se.resize(k_total);
    rep.std_error.resize(k_total);
    for (int k = 0; k < k_total; ++k) {
        CMat dbar = CMat::Zero(dim(k), dim(k)), cbar = CMat::Zero(dim(k), dim(k)),
             sbar = CMat::Zero(dim(k), dim(k));
        for (int b = 0; b < n_batches; ++b) {
            dbar += dsum[b][k];
            cbar += csum[b][k];
            sbar += ssum[b][k];
        }
        dbar /= n_mc;
        cbar /= n_mc;
        sbar /= n_mc;
        rep.se[k] = se_from(dbar, cbar, sbar, k);

        // batch means
        double bsum = 0.0, bsumsq = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            const double v = se_from(dsum[b][k] / counts[b], csum[b][k] / counts[b],
                                     ssum[b][k] / counts[b], k);
            bsum += v;
            bsumsq += v * v;
        }
        const double bm = bsum / n_batches;
        const double bvar =
            n_batches > 1 ? std::max(0.0, (bsumsq - n_batches * bm * bm) / (n_batches - 1)) : 0.0;
        rep.std_error[k] = std::sqrt(bvar / n_batches);
    }
    return rep;
}

// -------------------------------------------------------------- closed forms

/// FZF closed form: alpha_se * c * log2(1 + alpha_fzf^2 rho eta), with
/// prelog c = MN for HM users and L_d N for LM users.
inline double closed_form_fzf(double eta, double rho, double alpha_fzf, const FrameConfig& cfg,
                              Mobility group) {
    if (eta < 0.0) throw std::invalid_argument("closed_form_fzf: eta must be >= 0");
    const double c = group == Mobility::HM ? cfg.MN() : cfg.LdN();
    return cfg.alpha_se() * c * std::log2(1.0 + alpha_fzf * alpha_fzf * rho * eta);
}

/// PZF closed form for HM user k_h: interference only from the LM/MRT group.
inline double closed_form_pzf_hm(const SystemSpec& spec, const std::vector<double>& eta,
                                 double rho, double alpha_pzf, int k_h) {
    if (spec.users[k_h].group != Mobility::HM)
        throw std::invalid_argument("closed_form_pzf_hm: user is not HM");
    const double beta_h = spec.users[k_h].beta;
    double interf = 0.0;
    for (int k = 0; k < spec.K(); ++k) {
        if (spec.users[k].group != Mobility::LM) continue;
        const double am = alpha_mrt(spec.users[k].beta, spec.n_t);
        interf += am * am * beta_h * spec.users[k].beta * rho * eta[k] * spec.n_t;
    }
    const double sinr = alpha_pzf * alpha_pzf * rho * eta[k_h] / (1.0 + interf);
    return spec.frame.alpha_se() * spec.frame.MN() * std::log2(1.0 + sinr);
}

/// Interference-plus-self term Psi_{k_l} of the LM closed form.
inline double psi_lm_closed_form(const SystemSpec& spec, const std::vector<double>& eta,
                                 double rho, int k_l) {
    const double beta_l = spec.users[k_l].beta;
    const double am_self = alpha_mrt(beta_l, spec.n_t);
    double psi = 0.0;
    for (int k = 0; k < spec.K(); ++k) {
        if (k == k_l) continue;
        if (spec.users[k].group == Mobility::HM) {
            psi += rho * eta[k] * beta_l;
        } else {
            const double am = alpha_mrt(spec.users[k].beta, spec.n_t);
            psi += am * am * rho * eta[k] * beta_l * spec.users[k].beta * spec.n_t;
        }
    }
    psi += rho * eta[k_l] * am_self * am_self * beta_l * beta_l * spec.n_t *
           (spec.n_t + 1.0 + (spec.n_t - 1.0) / spec.p);
    return psi;
}

/// PZF/MRT closed form for LM user k_l.
inline double closed_form_pzf_lm(const SystemSpec& spec, const std::vector<double>& eta,
                                 double rho, int k_l) {
    if (spec.users[k_l].group != Mobility::LM)
        throw std::invalid_argument("closed_form_pzf_lm: user is not LM");
    const double beta_l = spec.users[k_l].beta;
    const double sig = beta_l * spec.n_t * rho * eta[k_l];
    const double denom = 1.0 + psi_lm_closed_form(spec, eta, rho, k_l) - sig;
    if (!(denom > 0.0))
        throw std::runtime_error("closed_form_pzf_lm: non-positive effective denominator " +
                                 std::to_string(denom) + " (approximation out of range)");
    return spec.frame.alpha_se() * spec.frame.LdN() * std::log2(1.0 + sig / denom);
}

/// Closed-form SE for every user under the given scheme.
inline SEReport closed_form_se(const SystemSpec& spec, PrecodingScheme scheme,
                               const std::vector<double>& eta, double rho, double alpha_zf) {
    SEReport rep;
    rep.method = SeMethod::ClosedForm;
    rep.se.resize(spec.K());
    rep.std_error.assign(spec.K(), 0.0);
    for (int k = 0; k < spec.K(); ++k) {
        if (scheme == PrecodingScheme::FZF)
            rep.se[k] = closed_form_fzf(eta[k], rho, alpha_zf, spec.frame, spec.users[k].group);
        else
            rep.se[k] = spec.users[k].group == Mobility::HM
                            ? closed_form_pzf_hm(spec, eta, rho, alpha_zf, k)
                            : closed_form_pzf_lm(spec, eta, rho, k);
    }
    return rep;
}

// ------------------------------------------------- matrix-form PZF SE (props)

/// PZF SE via the matrix forms: MC expectations of the interference terms,
/// analytic desired-signal matrices. Sits between numerical_se and the scalar
/// closed forms.
inline SEReport matrix_se_pzf(const SystemSpec& spec, const std::vector<double>& eta, double rho,
                              double alpha_pzf, int n_mc, std::uint64_t seed) {
    spec.validate();
    if (n_mc < 2) throw std::invalid_argument("matrix_se_pzf: N_mc must be >= 2");
    const DomainOps ops(spec.frame);
    const int k_total = spec.K();
    const int mn = spec.frame.MN();
    const int ldn = spec.frame.LdN();
    const auto dim = [&](int k) { return spec.users[k].group == Mobility::HM ? mn : ldn; };

    // interference expectations: HM rx <- LM tx; LM rx <- everyone but itself
    std::vector<CMat> interf(k_total);
    for (int k = 0; k < k_total; ++k) interf[k] = CMat::Zero(dim(k), dim(k));

    for (int i = 0; i < n_mc; ++i) {
        Rng rng = Rng::substream(seed, i);
        auto chans = spec.draw_realizations(rng);
        auto pre = build_precoders(spec, chans, PrecodingScheme::PZF, alpha_pzf);
        for (int k = 0; k < k_total; ++k) {
            for (int kp = 0; kp < k_total; ++kp) {
                const bool hm_rx = spec.users[k].group == Mobility::HM;
                if (hm_rx && spec.users[kp].group == Mobility::HM) continue;  // ZF exact
                if (!hm_rx && kp == k) continue;  // desired handled analytically
                const CMat d = effective_gain(ops, spec, chans, pre, k, kp, eta, rho);
                interf[k] += d * d.adjoint();
            }
        }
        // LM self term enters Psi through E{D D^H} minus the analytic mean
        for (int k = 0; k < k_total; ++k) {
            if (spec.users[k].group != Mobility::LM) continue;
            const CMat d = effective_gain(ops, spec, chans, pre, k, k, eta, rho);
            interf[k] += d * d.adjoint();
        }
    }
    for (int k = 0; k < k_total; ++k) interf[k] /= n_mc;

    SEReport rep;
    rep.method = SeMethod::MatrixProp;
    rep.se.resize(k_total);
    rep.std_error.assign(k_total, 0.0);
    for (int k = 0; k < k_total; ++k) {
        if (spec.users[k].group == Mobility::HM) {
            const double g = alpha_pzf * std::sqrt(rho * eta[k]);
            const CMat dbar = g * CMat::Identity(mn, mn);
            const CMat psi = CMat::Identity(mn, mn) + interf[k];
            rep.se[k] = mmse_sic_se(dbar, psi, spec.frame.alpha_se());
        } else {
            const double beta = spec.users[k].beta;
            const double g =
                alpha_mrt(beta, spec.n_t) * std::sqrt(rho * eta[k]) * beta * spec.n_t;
            const CMat dbar = g * CMat::Identity(ldn, ldn);
            const CMat psi = CMat::Identity(ldn, ldn) + interf[k] - dbar * dbar.adjoint();
            rep.se[k] = mmse_sic_se(dbar, psi, spec.frame.alpha_se());
        }
    }
    return rep;
}

// ------------------------------------------------------------ NMSE diagnostic

struct NmseResult {
    RMat nmse;             // entrywise |E - target|^2 / |E|^2
    double mean_diag_rel;  // mean over the diagonal of |E_ii - t| / |E_ii|
};

/// Tightness diagnostic for the PZF-tx / LM-rx cross-gain approximation
/// E{D D^H} ~ rho eta beta I.
inline NmseResult nmse_diagnostic(const SystemSpec& spec, const std::vector<double>& eta,
                                  double rho, double alpha_pzf, int n_mc, std::uint64_t seed,
                                  int rx_lm = -1, int tx_hm = 0) {
    spec.validate();
    if (rx_lm < 0) {
        for (int k = 0; k < spec.K(); ++k)
            if (spec.users[k].group == Mobility::LM) { rx_lm = k; break; }
    }
    if (rx_lm < 0 || spec.users[rx_lm].group != Mobility::LM)
        throw std::invalid_argument("nmse_diagnostic: need an LM receiver");
    if (spec.users[tx_hm].group != Mobility::HM)
        throw std::invalid_argument("nmse_diagnostic: need an HM transmitter");

    const DomainOps ops(spec.frame);
    const int ldn = spec.frame.LdN();
    CMat e = CMat::Zero(ldn, ldn);
    for (int i = 0; i < n_mc; ++i) {
        Rng rng = Rng::substream(seed, i);
        auto chans = spec.draw_realizations(rng);
        auto pre = build_precoders(spec, chans, PrecodingScheme::PZF, alpha_pzf);
        const CMat d = effective_gain(ops, spec, chans, pre, rx_lm, tx_hm, eta, rho);
        e += d * d.adjoint();
    }
    e /= n_mc;

    const double target = rho * eta[tx_hm] * spec.users[rx_lm].beta;
    NmseResult res;
    res.nmse.resize(ldn, ldn);
    double diag_sum = 0.0;
    for (int i = 0; i < ldn; ++i) {
        for (int j = 0; j < ldn; ++j) {
            const cd t = i == j ? cd(target, 0.0) : cd(0.0, 0.0);
            const double num = std::norm(e(i, j) - t);
            const double den = std::norm(e(i, j));
            res.nmse(i, j) = den > 0.0 ? num / den : 0.0;
        }
        diag_sum += std::abs(e(i, i) - target) / std::abs(e(i, i));
    }
    res.mean_diag_rel = diag_sum / ldn;
    return res;
}

}  // namespace hymimo

#endif
