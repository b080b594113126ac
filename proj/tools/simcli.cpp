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
// hymimo-sim: scenario-driven campaigns and figure-data emission.
// Exit codes: 0 success, 2 scenario/argument validation failure, 3 numerical
// failure (singular draws, infeasible solves, failed campaigns).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hymimo/campaign.hpp"

using namespace hymimo;

namespace {

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool desk = false;
    bool paper = false;
    bool debug_traces = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scenario", o.scenario_path, "scenario file (.scn key=value or .json)");
    cmd->add_option("--out", o.out_dir, "output directory (default: stdout)");
    cmd->add_option("--seed", o.seed, "override the master seed");
    const auto d = cmd->add_flag("--desk", o.desk, "small CI-scale defaults");
    cmd->add_flag("--paper-scale", o.paper, "full reference-scale defaults")->excludes(d);
    cmd->add_flag("--debug-traces", o.debug_traces, "emit solver trace JSON");
    cmd->add_option("--threads", o.threads, "worker threads (0 = scenario value)");
}

Scenario make_scenario(const CommonOpts& o) {
    Scenario sc;
    if (!o.scenario_path.empty()) sc = load_scenario(o.scenario_path);
    else if (o.paper) sc = paper_scenario();
    else sc = desk_scenario();
    if (o.seed) sc.master_seed = *o.seed;
    sc.validate();
    return sc;
}

/// Writes to <out>/<name> when --out was given, stdout otherwise.
void emit(const CommonOpts& o, const std::string& name, const std::string& body) {
    if (o.out_dir.empty()) {
        std::cout << body;
        return;
    }
    std::filesystem::create_directories(o.out_dir);
    const auto path = std::filesystem::path(o.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    std::cerr << "wrote " << path.string() << "\n";
}

/// One deterministic drop of the scenario (geometry included when not flat).
SystemSpec one_drop(const Scenario& sc) {
    Rng rng = Rng::substream(sc.master_seed, 0x6'0000'0000ULL);
    std::vector<UserProfile> users;
    if (sc.flat) {
        users = sc.flat_users();
    } else {
        users = drop_users(sc.k_h, sc.k_l, sc.geometry, rng);
        for (auto& u : users) {
            u.l_max = u.group == Mobility::HM ? sc.hm_l_max : sc.lm_l_max;
            u.k_max = u.group == Mobility::HM ? sc.hm_k_max : sc.lm_k_max;
        }
        const auto lsf = large_scale_fading(users, sc.geometry, rng);
        for (std::size_t i = 0; i < users.size(); ++i) users[i].beta = lsf.beta[i];
    }
    SystemSpec sys = sc.to_system(users);
    sys.validate();
    return sys;
}

double estimate_alpha(const Scenario& sc, const SystemSpec& sys) {
    if (sc.scheme == PrecodingScheme::FZF)
        return estimate_alpha_fzf(sys, sc.n_mc_alpha, splitmix64(sc.master_seed ^ 0xA5EEDULL))
            .value;
    if (sys.K_h() == 0) return 0.0;
    return estimate_alpha_pzf(sys, sc.n_mc_alpha, splitmix64(sc.master_seed ^ 0xA5EEDULL)).value;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ----------------------------------------------------------------- validate

int cmd_validate(const CommonOpts& o) {
    const Scenario sc = make_scenario(o);
    const SystemSpec sys = one_drop(sc);
    const double rho = rho_linear(sc.link);
    const double alpha = estimate_alpha(sc, sys);
    const auto eta = epa(sys.K()).eta;

    const auto nm = numerical_se(sys, sc.scheme, eta, rho, alpha, sc.n_mc, sc.master_seed);
    const auto cf = closed_form_se(sys, sc.scheme, eta, rho, alpha);

    std::ostringstream os;
    os << "user,group,numerical SE (bit/s/Hz),MC std error (bit/s/Hz),"
          "corollary SE (bit/s/Hz),rel error\n";
    for (int k = 0; k < sys.K(); ++k) {
        const double rel =
            nm.se[k] > 0.0 ? std::abs(cf.se[k] - nm.se[k]) / nm.se[k] : 0.0;
        os << k << ',' << (sys.users[k].group == Mobility::HM ? "HM" : "LM") << ','
           << num(nm.se[k]) << ',' << num(nm.std_error[k]) << ',' << num(cf.se[k]) << ','
           << num(rel) << '\n';
    }
    emit(o, "validate.csv", os.str());
    return 0;
}

// ----------------------------------------------------------------- se-sweep

int cmd_sweep(const CommonOpts& o, const std::string& axis_name,
              const std::vector<double>& values) {
    SweepAxis axis;
    if (axis_name == "nt") axis = SweepAxis::Nt;
    else if (axis_name == "kh") axis = SweepAxis::Kh;
    else if (axis_name == "m") axis = SweepAxis::M;
    else if (axis_name == "rho-db") axis = SweepAxis::RhoDb;
    else throw ScenarioError({"se-sweep: unknown axis '" + axis_name + "'"});

    const Scenario sc = make_scenario(o);
    const auto rows = sweep(sc, axis, values, o.threads);
    emit(o, "sweep.csv", sweep_csv(axis, rows));
    return 0;
}

// ---------------------------------------------------------------------- cdf

int cmd_cdf(const CommonOpts& o) {
    const Scenario sc = make_scenario(o);
    const auto res = run_campaign(sc, o.threads);
    emit(o, "campaign.csv", campaign_csv(res));

    std::ostringstream os;
    os << "group,samples,mean SE (bit/s/Hz),95%-likely SE (bit/s/Hz)\n";
    for (const auto& [name, samples] :
         {std::pair{"HM", res.hm_samples}, std::pair{"LM", res.lm_samples}}) {
        if (samples.empty()) continue;
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= samples.size();
        const double p5 = samples.size() >= 20 ? cdf_stats(samples).likely95() : 0.0;
        os << name << ',' << samples.size() << ',' << num(mean) << ',' << num(p5) << '\n';
    }
    emit(o, "cdf.csv", os.str());
    return 0;
}

// --------------------------------------------------------------------- nmse

int cmd_nmse(const CommonOpts& o, const std::vector<int>& nt_values, int n_mc) {
    const Scenario sc = make_scenario(o);
    std::ostringstream os;
    os << "N_t (antennas),mean diagonal rel error\n";
    for (int n_t : nt_values) {
        Scenario s = sc;
        s.n_t = n_t;
        s.validate();
        const SystemSpec sys = one_drop(s);
        if (sys.K_h() == 0 || sys.K_l() == 0)
            throw ScenarioError({"nmse: needs both HM and LM users"});
        const double rho = rho_linear(s.link);
        const double alpha =
            estimate_alpha_pzf(sys, s.n_mc_alpha, splitmix64(s.master_seed ^ 0xA5EEDULL)).value;
        const auto eta = epa(sys.K()).eta;
        const auto res = nmse_diagnostic(sys, eta, rho, alpha, n_mc, s.master_seed);
        os << n_t << ',' << num(res.mean_diag_rel) << '\n';
    }
    emit(o, "nmse.csv", os.str());
    return 0;
}

// -------------------------------------------------------------------- alloc

int cmd_alloc(const CommonOpts& o) {
    const Scenario sc = make_scenario(o);
    const SystemSpec sys = one_drop(sc);
    const double rho = rho_linear(sc.link);
    const double alpha = estimate_alpha(sc, sys);

    nlohmann::json traces = nlohmann::json::object();
    traces["allocator"] = alloc_scheme_name(sc.alloc);
    traces["alpha_zf"] = alpha;
    PowerAllocation pa;
    switch (sc.alloc) {
        case AllocScheme::EPA:
            pa = epa(sys.K());
            break;
        case AllocScheme::MaxMin:
            if (sc.scheme == PrecodingScheme::FZF) {
                std::vector<Mobility> groups;
                for (const auto& u : sys.users) groups.push_back(u.group);
                const auto res = maxmin_fzf(alpha, rho, sys.frame, groups);
                pa = res.eta;
                traces["bisection"] = res.trace;
                traces["t_star"] = res.t_star;
            } else {
                const auto res = maxmin_pzf(sys, rho, alpha);
                pa = res.eta;
                traces["bisection"] = res.trace;
                traces["t_star"] = res.t_star;
            }
            break;
        case AllocScheme::WeightedMaxMin: {
            const auto res = weighted_maxmin_pzf(sys, sc.w_h, sc.w_l, rho, alpha);
            pa = res.eta;
            traces["bisection"] = res.trace;
            traces["anchors"] = res.anchor_history;
            traces["objective"] = res.objective;
            traces["t_h"] = res.t_h;
            traces["t_l"] = res.t_l;
            break;
        }
    }

    const auto se = closed_form_se(sys, sc.scheme, pa.eta, rho, alpha);
    std::ostringstream os;
    os << "user,group,beta,eta (fraction of P_tx),SE (bit/s/Hz),method\n";
    for (int k = 0; k < sys.K(); ++k)
        os << k << ',' << (sys.users[k].group == Mobility::HM ? "HM" : "LM") << ','
           << num(sys.users[k].beta) << ',' << num(pa.eta[k]) << ',' << num(se.se[k]) << ','
           << se_method_name(se.method) << '\n';
    emit(o, "alloc.csv", os.str());
    if (o.debug_traces) emit(o, "traces.json", traces.dump(2) + "\n");
    return 0;
}

// ----------------------------------------------------------- paper-defaults

int cmd_paper_defaults(const CommonOpts& o) {
    std::ostringstream os;
    save_scenario(paper_scenario(), os);
    emit(o, "paper.scn", os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid OTFS/OFDM massive MIMO link simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string axis = "rho-db";
    std::vector<double> values;
    std::vector<int> nt_values{16, 32};
    int nmse_draws = 500;

    auto* validate = app.add_subcommand("validate", "closed-form vs numerical SE report");
    add_common(validate, opts);
    auto* sweep_cmd = app.add_subcommand("se-sweep", "SE vs a swept parameter");
    add_common(sweep_cmd, opts);
    sweep_cmd->add_option("--axis", axis, "nt | kh | m | rho-db");
    sweep_cmd->add_option("--values", values, "axis values")->expected(-1);
    auto* cdf = app.add_subcommand("cdf", "per-user SE distribution over drops");
    add_common(cdf, opts);
    auto* nmse = app.add_subcommand("nmse", "diagonal-gain approximation error");
    add_common(nmse, opts);
    nmse->add_option("--nt", nt_values, "antenna counts")->expected(-1);
    nmse->add_option("--n-mc", nmse_draws, "Monte Carlo draws");
    auto* alloc = app.add_subcommand("alloc", "run one power allocator");
    add_common(alloc, opts);
    auto* defaults = app.add_subcommand("paper-defaults", "emit the reference scenario file");
    add_common(defaults, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return cmd_validate(opts);
        if (*sweep_cmd) return cmd_sweep(opts, axis, values);
        if (*cdf) return cmd_cdf(opts);
        if (*nmse) return cmd_nmse(opts, nt_values, nmse_draws);
        if (*alloc) return cmd_alloc(opts);
        if (*defaults) return cmd_paper_defaults(opts);
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
