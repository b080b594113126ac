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

#ifndef HYMIMO_SCENARIO_HPP
#define HYMIMO_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "frame.hpp"
#include "geometry.hpp"
#include "power.hpp"
#include "precoding.hpp"
#include "se.hpp"

namespace hymimo {

enum class AllocScheme { EPA, MaxMin, WeightedMaxMin };

inline const char* alloc_scheme_name(AllocScheme a) {
    switch (a) {
        case AllocScheme::EPA: return "epa";
        case AllocScheme::MaxMin: return "maxmin";
        default: return "weighted-maxmin";
    }
}

inline const char* precoding_scheme_name(PrecodingScheme s) {
    return s == PrecodingScheme::FZF ? "fzf" : "pzf";
}

/// All validation problems at once, not first-error-only.
struct ScenarioError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ScenarioError(std::vector<std::string> probs)
        : std::runtime_error(join(probs)), problems(std::move(probs)) {}

  private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "scenario invalid:";
        for (const auto& e : p) s += "\n  - " + e;
        return s;
    }
};

/// Full experiment description. Defaults reproduce the reference setup:
/// M = N = 8, L_cp = 3, N_t = 100, K_h = K_l = 3, P = 3, 2 GHz / 20 MHz /
/// 200 mW link, 250 m wrap-around square.
struct Scenario {
    FrameConfig frame{8, 8, 3};
    int k_h = 3, k_l = 3;
    int n_t = 100;
    int p = 3;

    int hm_l_max = 3, lm_l_max = 3;
    double hm_k_max = 5.0, lm_k_max = 3.0;
    bool integer_doppler = false;

    bool flat = false;  // beta = 1 for everyone, no geometry draw
    Geometry geometry;
    LinkBudget link;

    PrecodingScheme scheme = PrecodingScheme::PZF;
    AllocScheme alloc = AllocScheme::EPA;
    double w_h = 1.0, w_l = 1.0;
    bool use_usc = false;

    std::uint64_t master_seed = 1;
    int n_mc = 500;        // SE Monte Carlo draws per drop
    int n_mc_alpha = 500;  // draws behind the alpha estimate
    int n_drops = 200;
    int threads = 1;

    int K() const { return k_h + k_l; }

    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        const auto need = [&](bool ok, const std::string& msg) {
            if (!ok) out.push_back(msg);
        };
        need(frame.M >= 1 && frame.N >= 1, "frame: M and N must be positive");
        need(frame.L_cp >= 0 && frame.L_cp < frame.M, "frame: need 0 <= L_cp < M");
        need(k_h >= 0 && k_l >= 0 && K() >= 1, "system: need K_h, K_l >= 0 and K >= 1");
        need(n_t >= 1, "system: N_t must be >= 1");
        need(p >= 1, "system: P must be >= 1");
        need(hm_l_max >= 0 && lm_l_max >= 0, "mobility: l_max must be >= 0");
        need(hm_k_max >= 0.0 && lm_k_max >= 0.0, "mobility: k_max must be >= 0");
        need(link.tx_power_w > 0.0, "link: tx_power_w must be > 0");
        need(link.bandwidth_hz > 0.0, "link: bandwidth_hz must be > 0");
        need(n_mc >= 1, "mc: n_mc must be >= 1");
        need(n_mc_alpha >= 1, "mc: n_mc_alpha must be >= 1");
        need(n_drops >= 1, "mc: n_drops must be >= 1");
        need(threads >= 1, "mc: threads must be >= 1");
        need(w_h > 0.0 && w_l > 0.0, "alloc: weights must be > 0");
        if (alloc == AllocScheme::WeightedMaxMin) {
            need(scheme == PrecodingScheme::PZF, "alloc: weighted max-min requires PZF");
            need(k_h >= 1 && k_l >= 1, "alloc: weighted max-min needs both groups populated");
        }
        if (use_usc) need(k_l >= 2, "alloc: USC needs at least two LM users");
        need(K() <= n_t, "system: K > N_t makes the ZF stack rank-deficient");
        if (!flat) {
            need(geometry.delta >= 0.0 && geometry.delta <= 1.0,
                 "geometry: need 0 <= delta <= 1");
            need(geometry.d0 < geometry.d1 && geometry.d1 < geometry.D,
                 "geometry: need d0 < d1 < D");
        }
        return out;
    }

    void validate() const {
        auto probs = problems();
        if (!probs.empty()) throw ScenarioError(std::move(probs));
    }

    /// SystemSpec for one drop; beta/positions from `users` (flat mode builds
    /// a unit-beta profile list internally).
    SystemSpec to_system(const std::vector<UserProfile>& users) const {
        SystemSpec s;
        s.frame = frame;
        s.n_t = n_t;
        s.p = p;
        s.integer_doppler = integer_doppler;
        s.users = users;
        return s;
    }

    std::vector<UserProfile> flat_users() const {
        std::vector<UserProfile> users;
        for (int i = 0; i < K(); ++i) {
            UserProfile u;
            u.group = i < k_h ? Mobility::HM : Mobility::LM;
            u.beta = 1.0;
            u.l_max = u.group == Mobility::HM ? hm_l_max : lm_l_max;
            u.k_max = u.group == Mobility::HM ? hm_k_max : lm_k_max;
            users.push_back(u);
        }
        return users;
    }
};

/// Small CI-friendly configuration: M = N = 4, L_cp = 1, N_t = 16,
/// K_h = K_l = 2, flat fading.
inline Scenario desk_scenario() {
    Scenario s;
    s.frame = FrameConfig{4, 4, 1};
    s.k_h = s.k_l = 2;
    s.n_t = 16;
    s.flat = true;
    s.n_mc = 100;
    s.n_mc_alpha = 100;
    s.n_drops = 50;
    return s;
}

/// Full reference-scale configuration (the struct defaults).
inline Scenario paper_scenario() { return Scenario{}; }

// ------------------------------------------------------------- serialization

namespace detail {

using KvMap = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline KvMap parse_kv(std::istream& in, std::vector<std::string>& errors) {
    KvMap kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            kv[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": key before any [section]");
            continue;
        }
        kv[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline KvMap json_to_kv(const nlohmann::json& j, std::vector<std::string>& errors) {
    KvMap kv;
    if (!j.is_object()) {
        errors.push_back("top level must be an object of sections");
        return kv;
    }
    for (const auto& [sec, body] : j.items()) {
        if (!body.is_object()) {
            errors.push_back("section '" + sec + "' must be an object");
            continue;
        }
        for (const auto& [key, val] : body.items()) {
            if (val.is_string())
                kv[sec][key] = val.get<std::string>();
            else
                kv[sec][key] = val.dump();
        }
    }
    return kv;
}

/// Applies a parsed section/key map onto a Scenario, accumulating every
/// problem (unknown keys, bad values) instead of stopping at the first.
inline Scenario apply_kv(const KvMap& kv, std::vector<std::string>& errors) {
    Scenario s;
    const auto parse_int = [&](const std::string& ctx, const std::string& v, auto& out) {
        try {
            std::size_t pos = 0;
            const long long x = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            out = static_cast<std::remove_reference_t<decltype(out)>>(x);
        } catch (const std::exception&) {
            errors.push_back(ctx + ": not an integer: '" + v + "'");
        }
    };
    const auto parse_real = [&](const std::string& ctx, const std::string& v, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            errors.push_back(ctx + ": not a number: '" + v + "'");
        }
    };
    const auto parse_bool = [&](const std::string& ctx, const std::string& v, bool& out) {
        if (v == "true" || v == "1") out = true;
        else if (v == "false" || v == "0") out = false;
        else errors.push_back(ctx + ": not a boolean: '" + v + "'");
    };

    for (const auto& [sec, body] : kv) {
        for (const auto& [key, val] : body) {
            const std::string ctx = sec + "." + key;
            if (sec == "frame") {
                if (key == "M") parse_int(ctx, val, s.frame.M);
                else if (key == "N") parse_int(ctx, val, s.frame.N);
                else if (key == "L_cp") parse_int(ctx, val, s.frame.L_cp);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "system") {
                if (key == "K_h") parse_int(ctx, val, s.k_h);
                else if (key == "K_l") parse_int(ctx, val, s.k_l);
                else if (key == "N_t") parse_int(ctx, val, s.n_t);
                else if (key == "P") parse_int(ctx, val, s.p);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "mobility") {
                if (key == "hm_l_max") parse_int(ctx, val, s.hm_l_max);
                else if (key == "lm_l_max") parse_int(ctx, val, s.lm_l_max);
                else if (key == "hm_k_max") parse_real(ctx, val, s.hm_k_max);
                else if (key == "lm_k_max") parse_real(ctx, val, s.lm_k_max);
                else if (key == "integer_doppler") parse_bool(ctx, val, s.integer_doppler);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "geometry") {
                if (key == "flat") parse_bool(ctx, val, s.flat);
                else if (key == "D_m") parse_real(ctx, val, s.geometry.D);
                else if (key == "d0_m") parse_real(ctx, val, s.geometry.d0);
                else if (key == "d1_m") parse_real(ctx, val, s.geometry.d1);
                else if (key == "d_decorr_m") parse_real(ctx, val, s.geometry.d_decorr);
                else if (key == "delta") parse_real(ctx, val, s.geometry.delta);
                else if (key == "sigma_sh_db") parse_real(ctx, val, s.geometry.sigma_sh_db);
                else if (key == "f_mhz") parse_real(ctx, val, s.geometry.f_mhz);
                else if (key == "h_bs_m") parse_real(ctx, val, s.geometry.h_bs);
                else if (key == "h_u_m") parse_real(ctx, val, s.geometry.h_u);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "link") {
                if (key == "tx_power_w") parse_real(ctx, val, s.link.tx_power_w);
                else if (key == "bandwidth_hz") parse_real(ctx, val, s.link.bandwidth_hz);
                else if (key == "noise_figure_db") parse_real(ctx, val, s.link.noise_figure_db);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "alloc") {
                if (key == "precoding") {
                    if (val == "fzf") s.scheme = PrecodingScheme::FZF;
                    else if (val == "pzf") s.scheme = PrecodingScheme::PZF;
                    else errors.push_back(ctx + ": must be fzf or pzf");
                } else if (key == "scheme") {
                    if (val == "epa") s.alloc = AllocScheme::EPA;
                    else if (val == "maxmin") s.alloc = AllocScheme::MaxMin;
                    else if (val == "weighted-maxmin") s.alloc = AllocScheme::WeightedMaxMin;
                    else errors.push_back(ctx + ": must be epa, maxmin or weighted-maxmin");
                } else if (key == "w_h") parse_real(ctx, val, s.w_h);
                else if (key == "w_l") parse_real(ctx, val, s.w_l);
                else if (key == "usc") parse_bool(ctx, val, s.use_usc);
                else errors.push_back(ctx + ": unknown key");
            } else if (sec == "mc") {
                if (key == "seed") parse_int(ctx, val, s.master_seed);
                else if (key == "n_mc") parse_int(ctx, val, s.n_mc);
                else if (key == "n_mc_alpha") parse_int(ctx, val, s.n_mc_alpha);
                else if (key == "n_drops") parse_int(ctx, val, s.n_drops);
                else if (key == "threads") parse_int(ctx, val, s.threads);
                else errors.push_back(ctx + ": unknown key");
            } else {
                errors.push_back(sec + ": unknown section");
                break;
            }
        }
    }
    return s;
}

inline std::string fmt_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in, bool json) {
    std::vector<std::string> errors;
    detail::KvMap kv;
    if (json) {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError({std::string("JSON parse error: ") + e.what()});
        }
        kv = detail::json_to_kv(j, errors);
    } else {
        kv = detail::parse_kv(in, errors);
    }
    Scenario s = detail::apply_kv(kv, errors);
    auto probs = s.problems();
    errors.insert(errors.end(), probs.begin(), probs.end());
    if (!errors.empty()) throw ScenarioError(std::move(errors));
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError({"cannot open scenario file: " + path});
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return parse_scenario(in, json);
}

/// Canonical sectioned key=value form; load(save(s)) == s.
inline void save_scenario(const Scenario& s, std::ostream& out) {
    using detail::fmt_real;
    out << "[frame]\n"
        << "M = " << s.frame.M << "\n"
        << "N = " << s.frame.N << "\n"
        << "L_cp = " << s.frame.L_cp << "\n\n"
        << "[system]\n"
        << "K_h = " << s.k_h << "\n"
        << "K_l = " << s.k_l << "\n"
        << "N_t = " << s.n_t << "\n"
        << "P = " << s.p << "\n\n"
        << "[mobility]\n"
        << "hm_l_max = " << s.hm_l_max << "\n"
        << "lm_l_max = " << s.lm_l_max << "\n"
        << "hm_k_max = " << fmt_real(s.hm_k_max) << "\n"
        << "lm_k_max = " << fmt_real(s.lm_k_max) << "\n"
        << "integer_doppler = " << (s.integer_doppler ? "true" : "false") << "\n\n"
        << "[geometry]\n"
        << "flat = " << (s.flat ? "true" : "false") << "\n"
        << "D_m = " << fmt_real(s.geometry.D) << "\n"
        << "d0_m = " << fmt_real(s.geometry.d0) << "\n"
        << "d1_m = " << fmt_real(s.geometry.d1) << "\n"
        << "d_decorr_m = " << fmt_real(s.geometry.d_decorr) << "\n"
        << "delta = " << fmt_real(s.geometry.delta) << "\n"
        << "sigma_sh_db = " << fmt_real(s.geometry.sigma_sh_db) << "\n"
        << "f_mhz = " << fmt_real(s.geometry.f_mhz) << "\n"
        << "h_bs_m = " << fmt_real(s.geometry.h_bs) << "\n"
        << "h_u_m = " << fmt_real(s.geometry.h_u) << "\n\n"
        << "[link]\n"
        << "tx_power_w = " << fmt_real(s.link.tx_power_w) << "\n"
        << "bandwidth_hz = " << fmt_real(s.link.bandwidth_hz) << "\n"
        << "noise_figure_db = " << fmt_real(s.link.noise_figure_db) << "\n\n"
        << "[alloc]\n"
        << "precoding = " << precoding_scheme_name(s.scheme) << "\n"
        << "scheme = " << alloc_scheme_name(s.alloc) << "\n"
        << "w_h = " << fmt_real(s.w_h) << "\n"
        << "w_l = " << fmt_real(s.w_l) << "\n"
        << "usc = " << (s.use_usc ? "true" : "false") << "\n\n"
        << "[mc]\n"
        << "seed = " << s.master_seed << "\n"
        << "n_mc = " << s.n_mc << "\n"
        << "n_mc_alpha = " << s.n_mc_alpha << "\n"
        << "n_drops = " << s.n_drops << "\n"
        << "threads = " << s.threads << "\n";
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError({"cannot write scenario file: " + path});
    save_scenario(s, out);
}

inline bool operator==(const Scenario& a, const Scenario& b) {
    std::ostringstream sa, sb;
    save_scenario(a, sa);
    save_scenario(b, sb);
    return sa.str() == sb.str();
}

}  // namespace hymimo

#endif
