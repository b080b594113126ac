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

#ifndef HYMIMO_CAMPAIGN_HPP
#define HYMIMO_CAMPAIGN_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scenario.hpp"

namespace hymimo {

// ------------------------------------------------------------- CDF statistics

struct CdfTable {
    std::vector<double> sorted;

    /// Linear-interpolation quantile of the order statistics:
    /// h = (n-1) q, value = x[floor(h)] + frac(h) (x[floor(h)+1] - x[floor(h)]).
    double quantile(double q) const {
        if (sorted.empty()) throw std::invalid_argument("CdfTable: empty sample set");
        if (q <= 0.0) return sorted.front();
        if (q >= 1.0) return sorted.back();
        const double h = (sorted.size() - 1) * q;
        const std::size_t i = static_cast<std::size_t>(h);
        if (i + 1 >= sorted.size()) return sorted.back();
        return sorted[i] + (h - i) * (sorted[i + 1] - sorted[i]);
    }

    /// 95%-likely value = 5th percentile.
    double likely95() const { return quantile(0.05); }
};

inline CdfTable cdf_stats(std::vector<double> samples, std::size_t min_samples = 20) {
    if (samples.size() < min_samples)
        throw std::invalid_argument("cdf_stats: need at least " + std::to_string(min_samples) +
                                    " samples, got " + std::to_string(samples.size()));
    std::sort(samples.begin(), samples.end());
    return CdfTable{std::move(samples)};
}

// ------------------------------------------------------------------ campaigns

struct DropResult {
    bool ok = false;
    std::string error;
    std::vector<Mobility> groups;   // after USC removal, if any
    std::vector<double> se;         // bit/s/Hz, per remaining user
    std::vector<double> eta;
    SeMethod method = SeMethod::ClosedForm;
    double alpha_zf = 0.0;
    int dropped_user = -1;          // original index removed by USC
};

struct CampaignFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CampaignResult {
    std::vector<DropResult> drops;
    int failures = 0;
    double seconds = 0.0;
    std::vector<double> hm_samples, lm_samples;  // per-user SEs across ok drops
};

namespace detail {

inline PowerAllocation allocate(const Scenario& sc, const SystemSpec& sys, double rho,
                                double alpha_zf) {
    switch (sc.alloc) {
        case AllocScheme::EPA:
            return epa(sys.K());
        case AllocScheme::MaxMin:
            if (sc.scheme == PrecodingScheme::FZF) {
                std::vector<Mobility> groups;
                for (const auto& u : sys.users) groups.push_back(u.group);
                return maxmin_fzf(alpha_zf, rho, sys.frame, groups).eta;
            }
            return maxmin_pzf(sys, rho, alpha_zf).eta;
        default:
            return weighted_maxmin_pzf(sys, sc.w_h, sc.w_l, rho, alpha_zf).eta;
    }
}

/// One drop: geometry -> alpha -> allocation (with optional USC) -> SE.
/// Everything derives from (master seed, drop index) only, so results do not
/// depend on which worker thread runs the drop.
inline DropResult run_drop(const Scenario& sc, int drop) {
    DropResult res;
    const double rho = rho_linear(sc.link);

    Rng geo_rng = Rng::substream(sc.master_seed, 0x6'0000'0000ULL + drop);
    std::vector<UserProfile> users;
    if (sc.flat) {
        users = sc.flat_users();
    } else {
        users = drop_users(sc.k_h, sc.k_l, sc.geometry, geo_rng);
        for (auto& u : users) {
            u.l_max = u.group == Mobility::HM ? sc.hm_l_max : sc.lm_l_max;
            u.k_max = u.group == Mobility::HM ? sc.hm_k_max : sc.lm_k_max;
        }
        const auto lsf = large_scale_fading(users, sc.geometry, geo_rng);
        for (std::size_t i = 0; i < users.size(); ++i) users[i].beta = lsf.beta[i];
    }
    SystemSpec sys = sc.to_system(users);
    sys.validate();

    const std::uint64_t alpha_seed = splitmix64(sc.master_seed ^ (0xA5EEDULL + drop));
    double alpha_zf = 0.0;
    if (sc.scheme == PrecodingScheme::FZF)
        alpha_zf = estimate_alpha_fzf(sys, sc.n_mc_alpha, alpha_seed).value;
    else if (sys.K_h() > 0)
        alpha_zf = estimate_alpha_pzf(sys, sc.n_mc_alpha, alpha_seed).value;

    SystemSpec active = sys;
    if (sc.use_usc) {
        const auto usc = usc_schedule(sys, rho, [&](const SystemSpec& s) {
            return allocate(sc, s, rho, alpha_zf);
        });
        active = usc.reduced;
        res.dropped_user = usc.dropped_index;
        res.eta = usc.after.eta;
    } else {
        res.eta = allocate(sc, active, rho, alpha_zf).eta;
    }

    const SEReport rep = closed_form_se(active, sc.scheme, res.eta, rho, alpha_zf);
    res.se = rep.se;
    res.method = rep.method;
    res.alpha_zf = alpha_zf;
    for (const auto& u : active.users) res.groups.push_back(u.group);
    res.ok = true;
    return res;
}

}  // namespace detail

/// Runs n_drops independent drops, drop-level parallel, deterministically
/// aggregated in drop order. More than 5% failed drops fails the campaign.
inline CampaignResult run_campaign(const Scenario& sc, int threads = 0) {
    sc.validate();
    if (threads <= 0) threads = sc.threads;
    const auto t0 = std::chrono::steady_clock::now();

    CampaignResult out;
    out.drops.resize(sc.n_drops);
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= sc.n_drops) return;
            try {
                out.drops[i] = detail::run_drop(sc, i);
            } catch (const std::exception& e) {
                out.drops[i].ok = false;
                out.drops[i].error = e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& d : out.drops) {
        if (!d.ok) {
            ++out.failures;
            continue;
        }
        for (std::size_t i = 0; i < d.se.size(); ++i)
            (d.groups[i] == Mobility::HM ? out.hm_samples : out.lm_samples).push_back(d.se[i]);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.failures * 20 > sc.n_drops) {
        std::string first;
        for (const auto& d : out.drops)
            if (!d.ok) { first = d.error; break; }
        throw CampaignFailure("campaign failed: " + std::to_string(out.failures) + "/" +
                              std::to_string(sc.n_drops) + " drops errored (first: " + first +
                              ")");
    }
    return out;
}

// ------------------------------------------------------------------ CSV output

namespace detail {

/// Shortest round-trip decimal; locale-independent and stable across runs.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Per-drop per-user table; byte-identical for a fixed (scenario, seed).
inline std::string campaign_csv(const CampaignResult& res) {
    std::ostringstream os;
    os << "drop,user,group,method,eta (fraction of P_tx),se (bit/s/Hz)\n";
    for (std::size_t d = 0; d < res.drops.size(); ++d) {
        const auto& dr = res.drops[d];
        if (!dr.ok) continue;
        for (std::size_t u = 0; u < dr.se.size(); ++u)
            os << d << ',' << u << ',' << (dr.groups[u] == Mobility::HM ? "HM" : "LM") << ','
               << se_method_name(dr.method) << ',' << detail::csv_num(dr.eta[u]) << ','
               << detail::csv_num(dr.se[u]) << '\n';
    }
    return os.str();
}

// ----------------------------------------------------------------------- sweep

enum class SweepAxis { Nt, Kh, M, RhoDb };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Nt: return "N_t (antennas)";
        case SweepAxis::Kh: return "K_h (users)";
        case SweepAxis::M: return "M (delay bins)";
        default: return "rho (dB)";
    }
}

struct SweepRow {
    double value = 0.0;
    double mean_hm = 0.0, mean_lm = 0.0;        // bit/s/Hz
    double likely95_hm = 0.0, likely95_lm = 0.0;
    SeMethod method = SeMethod::ClosedForm;
};

inline Scenario apply_axis(Scenario sc, SweepAxis axis, double v) {
    switch (axis) {
        case SweepAxis::Nt:
            sc.n_t = static_cast<int>(v);
            break;
        case SweepAxis::Kh: {
            const int k = sc.K();
            const int kh = static_cast<int>(v);
            if (kh < 0 || kh > k)
                throw std::invalid_argument("sweep: K_h value out of range for K=" +
                                            std::to_string(k));
            sc.k_h = kh;
            sc.k_l = k - kh;
            break;
        }
        case SweepAxis::M:
            sc.frame.M = static_cast<int>(v);
            break;
        case SweepAxis::RhoDb:
            // re-express the target SNR through the transmit power
            sc.link.tx_power_w = noise_power(sc.link.bandwidth_hz, sc.link.noise_figure_db) *
                                 std::pow(10.0, v / 10.0);
            break;
    }
    return sc;
}

inline std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                                   const std::vector<double>& values, int threads = 0) {
    std::vector<SweepRow> rows;
    for (double v : values) {
        const Scenario sc = apply_axis(base, axis, v);
        const CampaignResult res = run_campaign(sc, threads);
        SweepRow row;
        row.value = v;
        const auto mean = [](const std::vector<double>& s) {
            if (s.empty()) return 0.0;
            double t = 0.0;
            for (double x : s) t += x;
            return t / s.size();
        };
        row.mean_hm = mean(res.hm_samples);
        row.mean_lm = mean(res.lm_samples);
        if (res.hm_samples.size() >= 20) row.likely95_hm = cdf_stats(res.hm_samples).likely95();
        if (res.lm_samples.size() >= 20) row.likely95_lm = cdf_stats(res.lm_samples).likely95();
        for (const auto& d : res.drops)
            if (d.ok) { row.method = d.method; break; }
        rows.push_back(row);
    }
    return rows;
}

inline std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << sweep_axis_name(axis)
       << ",mean HM SE (bit/s/Hz),mean LM SE (bit/s/Hz),95%-likely HM SE (bit/s/Hz),"
          "95%-likely LM SE (bit/s/Hz),method\n";
    for (const auto& r : rows)
        os << detail::csv_num(r.value) << ',' << detail::csv_num(r.mean_hm) << ','
           << detail::csv_num(r.mean_lm) << ',' << detail::csv_num(r.likely95_hm) << ','
           << detail::csv_num(r.likely95_lm) << ',' << se_method_name(r.method) << '\n';
    return os.str();
}

}  // namespace hymimo

#endif
