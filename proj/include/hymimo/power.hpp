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

#ifndef HYMIMO_POWER_HPP
#define HYMIMO_POWER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "se.hpp"
#include "solvers.hpp"
#include "system.hpp"

namespace hymimo {

struct PowerAllocation {
    std::vector<double> eta;

    double total() const {
        double s = 0.0;
        for (double e : eta) s += e;
        return s;
    }
    void validate() const {
        for (double e : eta)
            if (e < 0.0) throw std::runtime_error("PowerAllocation: negative coefficient");
        if (total() > 1.0 + 1e-9)
            throw std::runtime_error("PowerAllocation: budget exceeded");
    }
};

/// Equal power allocation eta_k = 1/K.
inline PowerAllocation epa(int k) {
    if (k < 1) throw std::invalid_argument("epa: K must be >= 1");
    PowerAllocation pa;
    pa.eta.assign(k, 1.0 / k);
    return pa;
}

struct MaxMinResult {
    PowerAllocation eta;
    double t_star = 0.0;  // achieved min SE, bit/s/Hz
    int iterations = 0;
    std::vector<std::pair<double, double>> trace;  // (t_min, t_max) per step
};

// ------------------------------------------------------------- FZF max-min

/// Max-min power control under FZF. The per-user feasibility constraints
/// decouple: for target t the minimal power is
/// eta_k(t) = (2^(t / (alpha_se c_k)) - 1) / (alpha_fzf^2 rho), so feasibility
/// is the one-line budget check sum_k eta_k(t) <= 1.
inline MaxMinResult maxmin_fzf(double alpha_fzf, double rho, const FrameConfig& cfg,
                               const std::vector<Mobility>& groups, double eps = 1e-3,
                               double t_max_multiplier = 4.0) {
    if (!(alpha_fzf > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("maxmin_fzf: alpha and rho must be > 0");
    const int k = static_cast<int>(groups.size());
    const double g = alpha_fzf * alpha_fzf * rho;
    std::vector<double> prelog(k);
    for (int i = 0; i < k; ++i)
        prelog[i] = cfg.alpha_se() * (groups[i] == Mobility::HM ? cfg.MN() : cfg.LdN());

    const auto min_power = [&](double t) {
        std::vector<double> eta(k);
        for (int i = 0; i < k; ++i) eta[i] = std::expm1(std::numbers::ln2 * t / prelog[i]) / g;
        return eta;
    };
    const auto feasible = [&](double t) {
        double s = 0.0;
        for (double e : min_power(t)) s += e;
        return s <= 1.0;
    };

    // t_max: multiple of the EPA SE, grown until infeasible
    double t_hi = 0.0;
    for (int i = 0; i < k; ++i)
        t_hi = std::max(t_hi, prelog[i] * std::log2(1.0 + g / k));
    t_hi *= t_max_multiplier;
    while (feasible(t_hi)) t_hi *= 2.0;

    MaxMinResult res;
    double t_lo = 0.0;
    while (t_hi - t_lo >= eps) {
        const double t = 0.5 * (t_lo + t_hi);
        if (feasible(t)) t_lo = t; else t_hi = t;
        res.trace.emplace_back(t_lo, t_hi);
        ++res.iterations;
    }
    res.t_star = t_lo;
    res.eta.eta = min_power(t_lo);
    // budget saturation: scale the slack onto all users proportionally
    const double total = res.eta.total();
    if (total > 0.0 && total < 1.0)
        for (double& e : res.eta.eta) e /= total;
    res.eta.validate();
    return res;
}

// ------------------------------------------------------------- PZF max-min

/// Per-pair interference coefficient of the PZF closed forms:
/// q[k][l] multiplies eta_l in user k's interference sum.
struct PzfCoeffs {
    double rho = 0.0;
    double alpha_pzf = 0.0;
    std::vector<std::vector<double>> q;   // cross terms, K x K (0 where n/a)
    std::vector<double> self_lm;          // LM self term coefficient on eta_k
    std::vector<double> signal;           // desired-signal coefficient on eta_k
    std::vector<double> prelog;           // alpha_se * c_k

    PzfCoeffs(const SystemSpec& spec, double rho_, double alpha_pzf_)
        : rho(rho_), alpha_pzf(alpha_pzf_) {
        const int k = spec.K();
        q.assign(k, std::vector<double>(k, 0.0));
        self_lm.assign(k, 0.0);
        signal.assign(k, 0.0);
        prelog.assign(k, 0.0);
        for (int i = 0; i < k; ++i) {
            const auto& u = spec.users[i];
            prelog[i] = spec.frame.alpha_se() *
                        (u.group == Mobility::HM ? spec.frame.MN() : spec.frame.LdN());
            if (u.group == Mobility::HM) {
                signal[i] = alpha_pzf * alpha_pzf * rho;
                for (int j = 0; j < k; ++j) {
                    if (spec.users[j].group != Mobility::LM) continue;
                    const double am = alpha_mrt(spec.users[j].beta, spec.n_t);
                    q[i][j] = am * am * u.beta * spec.users[j].beta * spec.n_t * rho;
                }
            } else {
                signal[i] = u.beta * spec.n_t * rho;
                const double am = alpha_mrt(u.beta, spec.n_t);
                self_lm[i] = am * am * u.beta * u.beta * spec.n_t *
                             (spec.n_t + 1.0 + (spec.n_t - 1.0) / spec.p) * rho;
                for (int j = 0; j < k; ++j) {
                    if (j == i) continue;
                    if (spec.users[j].group == Mobility::HM) {
                        q[i][j] = u.beta * rho;
                    } else {
                        const double amj = alpha_mrt(spec.users[j].beta, spec.n_t);
                        q[i][j] = amj * amj * u.beta * spec.users[j].beta * spec.n_t * rho;
                    }
                }
            }
        }
    }
};

/// Max-min power control under PZF/MRT via bisection over linear feasibility
/// problems; the closed-form SINR constraints are linear in eta for fixed t.
inline MaxMinResult maxmin_pzf(const SystemSpec& spec, double rho, double alpha_pzf,
                               double eps = 1e-3, double t_max_multiplier = 4.0) {
    spec.validate();
    const int k = spec.K();
    const PzfCoeffs co(spec, rho, alpha_pzf);

    const auto constraints_for = [&](double t) {
        std::vector<LinearConstraint> cons;
        for (int i = 0; i < k; ++i) {
            const double gamma = std::expm1(std::numbers::ln2 * t / co.prelog[i]);
            // gamma * (1 + interference(eta)) - signal_i * eta_i <= 0; for LM
            // users the denominator also subtracts the desired-signal term
            LinearConstraint c;
            c.a = RVec::Zero(k);
            for (int j = 0; j < k; ++j) c.a(j) = gamma * co.q[i][j];
            const bool lm = spec.users[i].group == Mobility::LM;
            c.a(i) += gamma * (co.self_lm[i] - (lm ? co.signal[i] : 0.0)) - co.signal[i];
            c.b = -gamma;
            cons.push_back(std::move(c));
        }
        LinearConstraint budget;
        budget.a = RVec::Ones(k);
        budget.b = 1.0;
        cons.push_back(std::move(budget));
        return cons;
    };
    const RVec lo = RVec::Zero(k), hi = RVec::Ones(k);
    const auto check = [&](double t) { return lp_feasible(constraints_for(t), lo, hi); };

    // t_max from the EPA point
    const auto epa_eta = epa(k).eta;
    double t_hi = 0.0;
    for (int i = 0; i < k; ++i) {
        double interf = co.self_lm[i] * epa_eta[i];
        if (spec.users[i].group == Mobility::LM) interf -= co.signal[i] * epa_eta[i];
        for (int j = 0; j < k; ++j) interf += co.q[i][j] * epa_eta[j];
        t_hi = std::max(t_hi, co.prelog[i] *
                                  std::log2(1.0 + co.signal[i] * epa_eta[i] / (1.0 + interf)));
    }
    t_hi *= t_max_multiplier;
    while (check(t_hi).feasible) t_hi *= 2.0;

    MaxMinResult res;
    double t_lo = 0.0;
    RVec witness = RVec::Constant(k, 1.0 / k);
    while (t_hi - t_lo >= eps) {
        const double t = 0.5 * (t_lo + t_hi);
        const LpResult r = check(t);
        if (r.feasible) {
            t_lo = t;
            witness = r.x;
        } else {
            t_hi = t;
        }
        res.trace.emplace_back(t_lo, t_hi);
        ++res.iterations;
    }
    res.t_star = t_lo;
    res.eta.eta.assign(witness.data(), witness.data() + k);
    for (double& e : res.eta.eta) e = std::max(0.0, e);
    const double total = res.eta.total();
    if (total > 0.0 && total < 1.0)
        for (double& e : res.eta.eta) e /= total;  // saturate the budget
    res.eta.validate();
    return res;
}

// --------------------------------------------------- SCA bound and helpers

/// Convex upper bound on the product x*y around anchors (x_n, y_n):
/// xy <= 1/4 [(x+y)^2 - 2(x_n - y_n)(x - y) + (x_n - y_n)^2],
/// tight when x = x_n and y = y_n.
inline double sca_bound(double x, double y, double x_n, double y_n) {
    const double d = x_n - y_n;
    const double s = x + y;
    return 0.25 * (s * s - 2.0 * d * (x - y) + d * d);
}

// ------------------------------------------------- weighted max-min (SCA)

struct WeightedMaxMinOptions {
    double eps1 = 1e-3;      // outer bisection tolerance, bit/s/Hz
    double eps2 = 1e-3;      // inner SCA relative anchor tolerance
    int inner_cap = 30;
    double t_max_multiplier = 4.0;
    bool literal_paper_prelog = false;  // 2^{t_h}-1 <= T_h as printed
    bool warm_start = false;            // keep anchors across outer steps
};

struct WeightedMaxMinResult {
    PowerAllocation eta;
    double objective = 0.0;  // alpha_w (w_h t_h + w_l t_l), bit/s/Hz
    double t_h = 0.0, t_l = 0.0;
    int outer_iterations = 0;
    std::vector<std::pair<double, double>> trace;
    std::vector<std::vector<double>> anchor_history;  // [T_h, T_l] per inner pass
};

/// Weighted max-min for PZF: outer bisection on the weighted objective, inner
/// successive convex approximation of the bilinear SINR constraints, each
/// feasibility subproblem solved by a log-barrier interior method.
inline WeightedMaxMinResult weighted_maxmin_pzf(const SystemSpec& spec, double w_h, double w_l,
                                                double rho, double alpha_pzf,
                                                const WeightedMaxMinOptions& opt = {}) {
    spec.validate();
    if (!(w_h > 0.0) || !(w_l > 0.0))
        throw std::invalid_argument("weighted_maxmin_pzf: weights must be > 0");
    const int k = spec.K();
    const int kh = spec.K_h(), kl = spec.K_l();
    if (kh == 0 || kl == 0)
        throw std::invalid_argument("weighted_maxmin_pzf: needs both HM and LM users");
    const PzfCoeffs co(spec, rho, alpha_pzf);
    const double aw = 1.0 / (w_h + w_l);

    // variable layout: x = (eta_0..eta_{K-1}, T_h, T_l, t_h, t_l)
    const int n = k + 4;
    const int iTh = k, iTl = k + 1, ith = k + 2, itl = k + 3;
    const double ph = opt.literal_paper_prelog ? 1.0
                                               : spec.frame.alpha_se() * spec.frame.MN();
    const double pl = opt.literal_paper_prelog ? spec.frame.alpha_se()
                                               : spec.frame.alpha_se() * spec.frame.LdN();

    // EPA anchors: group-min SINRs at equal power
    const auto epa_eta = epa(k).eta;
    const auto sinr_at = [&](const std::vector<double>& eta, int i) {
        double interf = co.self_lm[i] * eta[i];
        if (spec.users[i].group == Mobility::LM) interf -= co.signal[i] * eta[i];
        for (int j = 0; j < k; ++j) interf += co.q[i][j] * eta[j];
        return co.signal[i] * eta[i] / (1.0 + interf);
    };
    const auto group_min_sinr = [&](const std::vector<double>& eta, Mobility g) {
        double v = std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i)
            if (spec.users[i].group == g) v = std::min(v, sinr_at(eta, i));
        return v;
    };
    const double Th0 = group_min_sinr(epa_eta, Mobility::HM);
    const double Tl0 = group_min_sinr(epa_eta, Mobility::LM);

    // quadratic SCA term q * C(eta_j, T) added into constraint `c`
    struct QuadTerm {
        int j;        // eta index
        int iT;       // T variable index
        double coef;
        double anchor_d;  // eta_n - T_n
    };
    const auto add_sca_terms = [&](std::vector<QuadTerm>& terms, RVec& lin, double& cst) {
        // contributes coef * 1/4 [(eta+T)^2 - 2 d (eta-T) + d^2]
        for (const auto& t : terms) {
            lin(t.j) += t.coef * (-0.5 * t.anchor_d);
            lin(t.iT) += t.coef * (0.5 * t.anchor_d);
            cst += t.coef * 0.25 * t.anchor_d * t.anchor_d;
        }
    };

    WeightedMaxMinResult res;
    std::vector<double> eta_anchor = epa_eta;
    double Th_anchor = Th0, Tl_anchor = Tl0;

    // feasibility of the SCA-convexified program at weighted target t
    const auto check = [&](double t, std::vector<double>& eta_n, double& Th_n, double& Tl_n,
                           RVec& witness) {
        for (int inner = 0; inner < opt.inner_cap; ++inner) {
            std::vector<ConvexConstraint> cons;

            // objective coupling: t - aw (w_h t_h + w_l t_l) <= 0
            {
                RVec a = RVec::Zero(n);
                a(ith) = -aw * w_h;
                a(itl) = -aw * w_l;
                cons.push_back(linear_con(a, -t));
            }
            // HM constraints: sum_l q C(eta_l, T_h) + T_h - signal*eta_kh <= 0
            for (int i = 0; i < k; ++i) {
                if (spec.users[i].group != Mobility::HM) continue;
                RVec lin = RVec::Zero(n);
                double cst = 0.0;
                std::vector<QuadTerm> quads;
                for (int j = 0; j < k; ++j)
                    if (co.q[i][j] != 0.0)
                        quads.push_back({j, iTh, co.q[i][j], eta_n[j] - Th_n});
                add_sca_terms(quads, lin, cst);
                lin(iTh) += 1.0;
                lin(i) += -co.signal[i];
                auto quads_copy = quads;
                cons.push_back(ConvexConstraint{
                    [quads_copy, lin, cst](const RVec& x) {
                        double v = lin.dot(x) + cst;
                        for (const auto& qt : quads_copy)
                            v += qt.coef * 0.25 * (x(qt.j) + x(qt.iT)) * (x(qt.j) + x(qt.iT));
                        return v;
                    },
                    [quads_copy, lin](const RVec& x) {
                        RVec g = lin;
                        for (const auto& qt : quads_copy) {
                            const double s = 0.5 * qt.coef * (x(qt.j) + x(qt.iT));
                            g(qt.j) += s;
                            g(qt.iT) += s;
                        }
                        return g;
                    },
                    [quads_copy, n](const RVec&) {
                        RMat h = RMat::Zero(n, n);
                        for (const auto& qt : quads_copy) {
                            const double c = 0.5 * qt.coef;
                            h(qt.j, qt.j) += c;
                            h(qt.j, qt.iT) += c;
                            h(qt.iT, qt.j) += c;
                            h(qt.iT, qt.iT) += c;
                        }
                        return h;
                    }});
            }
            // LM constraints: Psi~ - beta Nt rho C'(eta_kl, T_l) + T_l
            //                 - beta Nt rho eta_kl <= 0
            for (int i = 0; i < k; ++i) {
                if (spec.users[i].group != Mobility::LM) continue;
                RVec lin = RVec::Zero(n);
                double cst = 0.0;
                std::vector<QuadTerm> quads;
                for (int j = 0; j < k; ++j)
                    if (co.q[i][j] != 0.0)
                        quads.push_back({j, iTl, co.q[i][j], eta_n[j] - Tl_n});
                if (co.self_lm[i] != 0.0)
                    quads.push_back({i, iTl, co.self_lm[i], eta_n[i] - Tl_n});
                add_sca_terms(quads, lin, cst);
                // minus signal * C'(eta_i, T_l): linearized concave part
                {
                    const double sn = eta_n[i] + Tl_n;
                    const double d = eta_n[i] - Tl_n;
                    // C' = 1/4 [ sn (2(eta+T) - sn) - 2 d (eta - T) + d^2 ]
                    lin(i) += -co.signal[i] * 0.25 * (2.0 * sn - 2.0 * d);
                    lin(iTl) += -co.signal[i] * 0.25 * (2.0 * sn + 2.0 * d);
                    cst += -co.signal[i] * 0.25 * (-sn * sn + d * d);
                }
                lin(iTl) += 1.0;
                lin(i) += -co.signal[i];
                auto quads_copy = quads;
                cons.push_back(ConvexConstraint{
                    [quads_copy, lin, cst](const RVec& x) {
                        double v = lin.dot(x) + cst;
                        for (const auto& qt : quads_copy)
                            v += qt.coef * 0.25 * (x(qt.j) + x(qt.iT)) * (x(qt.j) + x(qt.iT));
                        return v;
                    },
                    [quads_copy, lin](const RVec& x) {
                        RVec g = lin;
                        for (const auto& qt : quads_copy) {
                            const double s = 0.5 * qt.coef * (x(qt.j) + x(qt.iT));
                            g(qt.j) += s;
                            g(qt.iT) += s;
                        }
                        return g;
                    },
                    [quads_copy, n](const RVec&) {
                        RMat h = RMat::Zero(n, n);
                        for (const auto& qt : quads_copy) {
                            const double c = 0.5 * qt.coef;
                            h(qt.j, qt.j) += c;
                            h(qt.j, qt.iT) += c;
                            h(qt.iT, qt.j) += c;
                            h(qt.iT, qt.iT) += c;
                        }
                        return h;
                    }});
            }
            // exponential rate couplings 2^{t/p} - 1 - T <= 0
            for (const auto& [it_, iT_, p_] : {std::tuple{ith, iTh, ph}, std::tuple{itl, iTl, pl}}) {
                const int it_i = it_, iT_i = iT_;
                const double p = p_;
                cons.push_back(ConvexConstraint{
                    [it_i, iT_i, p](const RVec& x) {
                        return std::exp2(x(it_i) / p) - 1.0 - x(iT_i);
                    },
                    [it_i, iT_i, p, n](const RVec& x) {
                        RVec g = RVec::Zero(n);
                        g(it_i) = std::numbers::ln2 / p * std::exp2(x(it_i) / p);
                        g(iT_i) = -1.0;
                        return g;
                    },
                    [it_i, p, n](const RVec& x) {
                        RMat h = RMat::Zero(n, n);
                        const double l2p = std::numbers::ln2 / p;
                        h(it_i, it_i) = l2p * l2p * std::exp2(x(it_i) / p);
                        return h;
                    }});
            }
            // budget and nonnegativity
            {
                RVec a = RVec::Zero(n);
                a.head(k).setOnes();
                cons.push_back(linear_con(a, 1.0));
            }
            for (int j = 0; j < n; ++j) {
                RVec a = RVec::Zero(n);
                a(j) = -1.0;
                cons.push_back(linear_con(a, 0.0));
            }

            // start from the anchor point
            RVec x0 = RVec::Zero(n);
            for (int j = 0; j < k; ++j) x0(j) = eta_n[j];
            x0(iTh) = Th_n;
            x0(iTl) = Tl_n;
            x0(ith) = ph * std::log2(1.0 + Th_n);
            x0(itl) = pl * std::log2(1.0 + Tl_n);

            const BarrierResult br = convex_feasible(cons, x0, 1e-7);
            if (!br.feasible) return false;

            const double Th_new = br.x(iTh), Tl_new = br.x(iTl);
            res.anchor_history.push_back({Th_new, Tl_new});
            const double dif_h = std::abs(Th_new - Th_n) / std::max(std::abs(Th_new), 1e-12);
            const double dif_l = std::abs(Tl_new - Tl_n) / std::max(std::abs(Tl_new), 1e-12);
            Th_n = Th_new;
            Tl_n = Tl_new;
            for (int j = 0; j < k; ++j) eta_n[j] = std::max(0.0, br.x(j));
            if (dif_h <= opt.eps2 && dif_l <= opt.eps2) {
                witness = br.x;
                return true;
            }
            witness = br.x;
        }
        return witness.size() == n;  // cap reached with a feasible iterate
    };

    // outer bisection; t range from the EPA objective
    const double obj_epa = aw * (w_h * ph * std::log2(1.0 + Th0) +
                                 w_l * pl * std::log2(1.0 + Tl0));
    double t_lo = 0.0, t_hi = std::max(obj_epa, 1e-6) * opt.t_max_multiplier;
    {
        std::vector<double> en = eta_anchor;
        double th = Th_anchor, tl = Tl_anchor;
        RVec w;
        while (check(t_hi, en, th, tl, w)) {
            t_hi *= 2.0;
            if (!opt.warm_start) { en = epa_eta; th = Th0; tl = Tl0; }
        }
    }

    RVec best = RVec::Zero(n);
    {
        // t = 0 is always feasible (EPA satisfies the relaxed constraints)
        std::vector<double> en = eta_anchor;
        double th = Th_anchor, tl = Tl_anchor;
        RVec w;
        if (!check(0.0, en, th, tl, w))
            throw std::runtime_error("weighted_maxmin_pzf: inner solver failed at t=0");
        best = w;
        if (opt.warm_start) { eta_anchor = en; Th_anchor = th; Tl_anchor = tl; }
    }

    while (t_hi - t_lo >= opt.eps1) {
        const double t = 0.5 * (t_lo + t_hi);
        std::vector<double> en = opt.warm_start ? eta_anchor : epa_eta;
        double th = opt.warm_start ? Th_anchor : Th0;
        double tl = opt.warm_start ? Tl_anchor : Tl0;
        RVec w;
        if (check(t, en, th, tl, w)) {
            t_lo = t;
            best = w;
            if (opt.warm_start) { eta_anchor = en; Th_anchor = th; Tl_anchor = tl; }
        } else {
            t_hi = t;
        }
        res.trace.emplace_back(t_lo, t_hi);
        ++res.outer_iterations;
    }

    res.eta.eta.resize(k);
    for (int j = 0; j < k; ++j) res.eta.eta[j] = std::max(0.0, best(j));
    if (res.eta.total() > 1.0)
        for (double& e : res.eta.eta) e /= res.eta.total();
    res.t_h = best(ith);
    res.t_l = best(itl);
    res.objective = t_lo;
    res.eta.validate();
    return res;
}

// ----------------------------------------------------------- user scheduling

struct UscResult {
    SystemSpec reduced;          // K-1 users, weakest LM removed
    int dropped_index = -1;      // index in the original user list
    PowerAllocation before;      // allocation on the full set
    PowerAllocation after;       // allocation on the reduced set
};

/// Drops the LM user with the lowest closed-form SE under EPA (statistical
/// CSI), reruns the allocator on the remaining K-1 users. Ties break toward
/// the lowest user index.
inline UscResult usc_schedule(
    const SystemSpec& spec, double rho,
    const std::function<PowerAllocation(const SystemSpec&)>& allocator) {
    spec.validate();
    if (spec.K_l() < 2) throw std::invalid_argument("usc_schedule: need at least two LM users");
    const auto eta0 = epa(spec.K()).eta;
    int worst = -1;
    double worst_se = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.K(); ++i) {
        if (spec.users[i].group != Mobility::LM) continue;
        const double se = closed_form_pzf_lm(spec, eta0, rho, i);
        if (se < worst_se - 1e-15) {
            worst_se = se;
            worst = i;
        }
    }
    UscResult res;
    res.dropped_index = worst;
    res.reduced = spec;
    res.reduced.users.erase(res.reduced.users.begin() + worst);
    res.before = allocator(spec);
    res.after = allocator(res.reduced);
    return res;
}

}  // namespace hymimo

#endif
