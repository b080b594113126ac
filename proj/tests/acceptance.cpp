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
//
// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit code is nonzero when any criterion fails. Runs at the small desk
// scale so the whole suite stays in the minutes range.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hymimo/campaign.hpp"

using namespace hymimo;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %2d. %-46s %s\n", ok ? "[PASS]" : "[FAIL]", number, name, detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a, b);
    return buf;
}

const FrameConfig kDesk{4, 4, 1};

SystemSpec desk_spec(int n_t = 16) { return flat_spec(kDesk, 2, 2, n_t); }

// 1. Numerical FZF SE equals the closed form within MC error bars, and the
//    zero-forced cross gains vanish.
void criterion_1() {
    SystemSpec spec = desk_spec();
    const double rho = rho_linear(LinkBudget{});
    const std::vector<double> eta(4, 0.25);
    const double alpha = estimate_alpha_fzf(spec, 200, 101).value;
    const auto num = numerical_se(spec, PrecodingScheme::FZF, eta, rho, alpha, 200, 7);

    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double cf = closed_form_fzf(eta[k], rho, alpha, kDesk, spec.users[k].group);
        const double gap = std::abs(num.se[k] - cf);
        worst = std::max(worst, gap);
        // the 1e-9 floor covers the degenerate case where the per-draw SE is
        // deterministic and the batch-means error bar collapses to zero
        if (gap > 3.0 * num.std_error[k] + 1e-9) ok = false;
    }

    const DomainOps ops(kDesk);
    double max_cross = 0.0;
    for (int i = 0; i < 20; ++i) {
        Rng rng = Rng::substream(11, i);
        const auto chans = spec.draw_realizations(rng);
        const auto pre = build_precoders(spec, chans, PrecodingScheme::FZF, alpha);
        for (int k = 0; k < 4; ++k)
            for (int kp = 0; kp < 4; ++kp) {
                if (k == kp) continue;
                const CMat d = effective_gain(ops, spec, chans, pre, k, kp, eta, rho);
                max_cross = std::max(max_cross, d.cwiseAbs().maxCoeff());
            }
    }
    if (max_cross >= 1e-9) ok = false;
    report(1, "FZF numerical SE matches closed form", ok,
           fmt("worst gap %.1e, max cross gain %.1e", worst, max_cross));
}

// 2. PZF closed forms stay within 5% of the numerical SE across SNR.
void criterion_2() {
    SystemSpec spec = desk_spec();
    const std::vector<double> eta(4, 0.25);
    const double alpha = estimate_alpha_pzf(spec, 200, 101).value;
    bool ok = true;
    double worst = 0.0, worst_db = 0.0;
    for (double rho_db : {95.0, 105.0, 115.0}) {
        const double rho = std::pow(10.0, rho_db / 10.0);
        const auto num = numerical_se(spec, PrecodingScheme::PZF, eta, rho, alpha, 200, 7);
        const auto cf = closed_form_se(spec, PrecodingScheme::PZF, eta, rho, alpha);
        for (int k = 0; k < 4; ++k) {
            const double rel = std::abs(cf.se[k] - num.se[k]) / num.se[k];
            if (rel > worst) { worst = rel; worst_db = rho_db; }
            if (rel > 0.05) ok = false;
        }
    }
    report(2, "PZF closed forms within 5% of numerical SE", ok,
           fmt("worst rel err %.3f at %.0f dB", worst, worst_db));
}

// 3. The HM/LM prelog ratio is exactly MN / (L_d N).
void criterion_3() {
    const FrameConfig cfg{8, 8, 3};
    const double hm = closed_form_fzf(0.2, 123.0, 0.9, cfg, Mobility::HM);
    const double lm = closed_form_fzf(0.2, 123.0, 0.9, cfg, Mobility::LM);
    const double ratio = hm / lm;
    const bool ok = std::abs(ratio - 8.0 / 5.0) < 1e-12;
    report(3, "prelog ratio is exactly 8/5 at M=N=8, L_cp=3", ok,
           fmt("ratio %.15f (target %.1f/5)", ratio, 8.0));
}

// 4. The diagonal-gain approximation behind the LM closed form tightens with
//    the array size.
void criterion_4() {
    const double rho = std::pow(10.0, 10.5);
    const std::vector<double> eta(4, 0.25);
    double rel16 = 0.0, rel32 = 0.0;
    for (int n_t : {16, 32}) {
        SystemSpec spec = desk_spec(n_t);
        const double alpha = estimate_alpha_pzf(spec, 200, 13).value;
        const auto res = nmse_diagnostic(spec, eta, rho, alpha, 1000, 17);
        (n_t == 16 ? rel16 : rel32) = res.mean_diag_rel;
    }
    const bool ok = rel16 < 0.10 && rel32 < rel16;
    report(4, "gain NMSE < 10% at N_t=16, smaller at 32", ok,
           fmt("N_t=16: %.4f, N_t=32: %.4f", rel16, rel32));
}

// 5. Max-min allocations equalize the users and saturate the budget.
void criterion_5() {
    SystemSpec spec = desk_spec();
    const double rho = rho_linear(LinkBudget{});
    const double eps = 1e-3;

    const double a_fzf = estimate_alpha_fzf(spec, 200, 101).value;
    std::vector<Mobility> groups;
    for (const auto& u : spec.users) groups.push_back(u.group);
    const auto rf = maxmin_fzf(a_fzf, rho, kDesk, groups, eps);
    const auto se_f = closed_form_se(spec, PrecodingScheme::FZF, rf.eta.eta, rho, a_fzf);

    const double a_pzf = estimate_alpha_pzf(spec, 200, 101).value;
    const auto rp = maxmin_pzf(spec, rho, a_pzf, eps);
    const auto se_p = closed_form_se(spec, PrecodingScheme::PZF, rp.eta.eta, rho, a_pzf);

    const auto spread = [](const std::vector<double>& se) {
        const auto [lo, hi] = std::minmax_element(se.begin(), se.end());
        return *hi - *lo;
    };
    const double sp_f = spread(se_f.se), sp_p = spread(se_p.se);
    const bool ok = sp_f <= 2.0 * eps && sp_p <= 2.0 * eps &&
                    std::abs(rf.eta.total() - 1.0) <= 1e-6 &&
                    std::abs(rp.eta.total() - 1.0) <= 1e-6;
    report(5, "max-min equalizes SE and spends the budget", ok,
           fmt("spread FZF %.2e, PZF %.2e", sp_f, sp_p));
}

// 6. The FZF bisection agrees with an independent root of the budget equation
//    on randomized scenarios.
void criterion_6() {
    Rng rng(606);
    const double eps = 1e-3;
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = rng.uniform(0.5, 2.5);
        const double rho = rng.uniform(50.0, 5000.0);
        std::vector<Mobility> groups;
        for (int i = 0; i < 4; ++i)
            groups.push_back(rng.uniform(0.0, 1.0) < 0.5 ? Mobility::HM : Mobility::LM);

        const auto res = maxmin_fzf(alpha, rho, kDesk, groups, eps);

        const double g = alpha * alpha * rho;
        std::vector<double> prelog;
        for (auto grp : groups)
            prelog.push_back(kDesk.alpha_se() *
                             (grp == Mobility::HM ? kDesk.MN() : kDesk.LdN()));
        const auto budget = [&](double t) {
            double s = 0.0;
            for (double p : prelog) s += std::expm1(std::numbers::ln2 * t / p) / g;
            return s;
        };
        double lo = 0.0, hi = 1.0;
        while (budget(hi) < 1.0) hi *= 2.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (budget(mid) <= 1.0 ? lo : hi) = mid;
        }

        const double gap = std::abs(res.t_star - lo);
        worst = std::max(worst, gap);
        if (gap > eps) ok = false;
    }
    report(6, "FZF bisection matches the analytic root (x20)", ok,
           fmt("worst |t* - root| = %.2e (tol %.0e)", worst, eps));
}

// 7. The convex product bound is sound, and the weighted allocator beats EPA
//    in its prioritized direction.
void criterion_7() {
    bool grid_ok = true;
    for (int a = 0; a < 10 && grid_ok; ++a)
        for (int b = 0; b < 10 && grid_ok; ++b)
            for (int c = 0; c < 10 && grid_ok; ++c)
                for (int d = 0; d < 10 && grid_ok; ++d) {
                    const double x = a / 9.0, y = b / 9.0, xn = c / 9.0, yn = d / 9.0;
                    if (sca_bound(x, y, xn, yn) < x * y - 1e-12) grid_ok = false;
                    if (a == c && b == d &&
                        std::abs(sca_bound(x, y, xn, yn) - x * y) > 1e-12)
                        grid_ok = false;
                }

    SystemSpec spec = desk_spec();
    const double rho = rho_linear(LinkBudget{});
    const double alpha = estimate_alpha_pzf(spec, 200, 101).value;
    const auto epa_se = closed_form_se(spec, PrecodingScheme::PZF, epa(4).eta, rho, alpha);
    const auto group_min = [&](const std::vector<double>& se, Mobility g) {
        double v = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 4; ++k)
            if (spec.users[k].group == g) v = std::min(v, se[k]);
        return v;
    };
    const double obj_epa_h = (100.0 * group_min(epa_se.se, Mobility::HM) +
                              1.0 * group_min(epa_se.se, Mobility::LM)) /
                             101.0;
    const double obj_epa_l = (1.0 * group_min(epa_se.se, Mobility::HM) +
                              100.0 * group_min(epa_se.se, Mobility::LM)) /
                             101.0;

    const auto wh = weighted_maxmin_pzf(spec, 100.0, 1.0, rho, alpha);
    const auto wl = weighted_maxmin_pzf(spec, 1.0, 100.0, rho, alpha);
    const auto se_h = closed_form_se(spec, PrecodingScheme::PZF, wh.eta.eta, rho, alpha);
    const auto se_l = closed_form_se(spec, PrecodingScheme::PZF, wl.eta.eta, rho, alpha);

    const bool obj_ok = wh.objective >= obj_epa_h - 2e-3 && wl.objective >= obj_epa_l - 2e-3;
    const bool dir_ok =
        group_min(se_h.se, Mobility::HM) > group_min(epa_se.se, Mobility::HM) &&
        group_min(se_l.se, Mobility::LM) > group_min(epa_se.se, Mobility::LM);
    report(7, "product bound sound; weighted beats EPA", grid_ok && obj_ok && dir_ok,
           fmt("HM gain %+.3f, LM gain %+.3f bit/s/Hz",
               group_min(se_h.se, Mobility::HM) - group_min(epa_se.se, Mobility::HM),
               group_min(se_l.se, Mobility::LM) - group_min(epa_se.se, Mobility::LM)));
}

// 8. Dropping the weakest LM user lifts the 95%-likely LM SE over drops.
void criterion_8() {
    Scenario sc = desk_scenario();
    sc.flat = false;  // geometric drops so the LM users actually differ
    sc.link.tx_power_w = 2000.0;  // keep the cell-edge LM rates off the floor
    sc.n_drops = 120;
    sc.n_mc_alpha = 100;
    sc.master_seed = 33;

    Scenario with = sc;
    with.use_usc = true;

    const auto base = run_campaign(sc, 4);
    const auto usc = run_campaign(with, 4);
    const double p5_base = cdf_stats(base.lm_samples).likely95();
    const double p5_usc = cdf_stats(usc.lm_samples).likely95();
    report(8, "scheduling lifts the 95%-likely LM SE", p5_usc > p5_base,
           fmt("without %.4g, with %.4g bit/s/Hz", p5_base, p5_usc));
}

// 9. The fourth-moment constant of the LM spatial channel matches Monte Carlo.
void criterion_9() {
    const int n_t = 8, p = 3, n_draws = 10000;
    UserProfile u;
    u.group = Mobility::LM;
    u.k_max = 3.0;
    double sum = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        Rng rng = Rng::substream(909, i);
        const auto paths = draw_paths(u, p, rng);
        Eigen::RowVectorXcd g = Eigen::RowVectorXcd::Zero(n_t);
        for (int j = 0; j < p; ++j)
            g += paths.gain[j] * steering_vector(paths.angle[j], n_t);
        const double e = g.squaredNorm();
        sum += e * e;
    }
    const double mc = sum / n_draws;
    const double target = n_t * (n_t + 1.0 + (n_t - 1.0) / p);
    const double rel = std::abs(mc - target) / target;
    report(9, "spatial fourth moment within 5% of the constant", rel < 0.05,
           fmt("MC %.2f vs %.2f", mc, target));
}

// 10. The campaign output is thread-count independent.
void criterion_10() {
    Scenario sc = desk_scenario();
    sc.n_drops = 40;
    sc.master_seed = 55;
    const std::string csv1 = campaign_csv(run_campaign(sc, 1));
    const std::string csv8 = campaign_csv(run_campaign(sc, 8));
    report(10, "campaign CSV identical across 1 and 8 threads", csv1 == csv8,
           csv1 == csv8 ? "byte-identical" : "outputs differ");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
