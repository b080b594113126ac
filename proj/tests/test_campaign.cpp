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

#include <catch2/catch_amalgamated.hpp>

#include "hymimo/campaign.hpp"

using namespace hymimo;

TEST_CASE("cdf statistics") {
    SECTION("interpolated quantiles on 1..100") {
        std::vector<double> s;
        for (int i = 100; i >= 1; --i) s.push_back(i);  // unsorted on purpose
        const auto cdf = cdf_stats(std::move(s));
        CHECK(cdf.quantile(0.0) == 1.0);
        CHECK(cdf.quantile(1.0) == 100.0);
        CHECK(cdf.quantile(0.5) == Catch::Approx(50.5).epsilon(1e-12));
        CHECK(cdf.likely95() == Catch::Approx(5.95).epsilon(1e-12));
    }
    SECTION("rejects undersized sample sets") {
        CHECK_THROWS_AS(cdf_stats({1.0, 2.0, 3.0}), std::invalid_argument);
        CHECK_NOTHROW(cdf_stats({1.0, 2.0, 3.0}, 3));
    }
}

TEST_CASE("scenario serialization") {
    SECTION("save and parse round-trips") {
        Scenario s = desk_scenario();
        s.master_seed = 42;
        s.alloc = AllocScheme::MaxMin;
        s.scheme = PrecodingScheme::FZF;
        s.geometry.sigma_sh_db = 7.5;
        std::ostringstream os;
        save_scenario(s, os);
        std::istringstream is(os.str());
        const Scenario back = parse_scenario(is, false);
        CHECK(back == s);
    }
    SECTION("key=value text with comments") {
        std::istringstream in(
            "# hand-written\n"
            "[frame]\n"
            "M = 4\nN = 4\nL_cp = 1  # cyclic prefix\n"
            "[system]\n"
            "K_h = 1\nK_l = 1\nN_t = 16\n"
            "[geometry]\n"
            "flat = true\n");
        const Scenario s = parse_scenario(in, false);
        CHECK(s.frame.M == 4);
        CHECK(s.frame.L_cp == 1);
        CHECK(s.k_h == 1);
        CHECK(s.flat);
        CHECK(s.n_t == 16);
    }
    SECTION("JSON form") {
        std::istringstream in(
            R"({"frame": {"M": 4, "N": 4, "L_cp": 1},
                "system": {"K_h": 2, "K_l": 1, "N_t": 32},
                "geometry": {"flat": "true"},
                "mc": {"seed": 9}})");
        const Scenario s = parse_scenario(in, true);
        CHECK(s.frame.M == 4);
        CHECK(s.k_h == 2);
        CHECK(s.n_t == 32);
        CHECK(s.master_seed == 9);
    }
    SECTION("every problem is reported, not just the first") {
        std::istringstream in(
            "[frame]\n"
            "M = 4\nN = nope\nL_cp = 9\n"
            "[system]\n"
            "K_h = 0\nK_l = 0\n"
            "bogus = 1\n");
        try {
            parse_scenario(in, false);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(e.problems.size() >= 3);  // bad int, bad L_cp, K = 0, unknown key
        }
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_scenario("/nonexistent/path.scn"), ScenarioError);
    }
}

TEST_CASE("campaign execution") {
    Scenario sc = desk_scenario();
    sc.n_drops = 12;
    sc.n_mc_alpha = 60;
    sc.master_seed = 7;

    SECTION("closed-form EPA campaign completes") {
        const auto res = run_campaign(sc, 1);
        REQUIRE(static_cast<int>(res.drops.size()) == sc.n_drops);
        CHECK(res.failures == 0);
        for (const auto& d : res.drops) {
            REQUIRE(d.ok);
            REQUIRE(d.se.size() == 4);
            CHECK(d.alpha_zf > 0.0);
            for (double se : d.se) CHECK(se > 0.0);
            for (double e : d.eta) CHECK(e == Catch::Approx(0.25).epsilon(1e-12));
        }
        CHECK(res.hm_samples.size() == 2 * 12);
        CHECK(res.lm_samples.size() == 2 * 12);
    }
    SECTION("thread count does not change the results") {
        const std::string csv1 = campaign_csv(run_campaign(sc, 1));
        const std::string csv4 = campaign_csv(run_campaign(sc, 4));
        CHECK(csv1 == csv4);
        CHECK(csv1.find("drop,user,group,method") == 0);
    }
    SECTION("max-min campaign equalizes within each drop's groups") {
        sc.alloc = AllocScheme::MaxMin;
        sc.n_drops = 4;
        const auto res = run_campaign(sc, 1);
        for (const auto& d : res.drops) {
            REQUIRE(d.ok);
            const double lo = *std::min_element(d.se.begin(), d.se.end());
            const double hi = *std::max_element(d.se.begin(), d.se.end());
            CHECK(hi - lo < 2e-3 + 1e-6);  // twice the bisection tolerance
        }
    }
    SECTION("HM users dominate LM users under flat EPA") {
        const auto res = run_campaign(sc, 1);
        for (const auto& d : res.drops) {
            double hm_min = 1e300, lm_max = 0.0;
            for (std::size_t i = 0; i < d.se.size(); ++i) {
                if (d.groups[i] == Mobility::HM) hm_min = std::min(hm_min, d.se[i]);
                else lm_max = std::max(lm_max, d.se[i]);
            }
            CHECK(hm_min >= lm_max);
        }
    }
    SECTION("validation failures surface as ScenarioError") {
        sc.n_drops = 0;
        CHECK_THROWS_AS(run_campaign(sc, 1), ScenarioError);
    }
}

TEST_CASE("parameter sweeps") {
    Scenario sc = desk_scenario();
    sc.n_drops = 6;
    sc.n_mc_alpha = 60;

    SECTION("SNR axis raises the mean rates") {
        const auto rows = sweep(sc, SweepAxis::RhoDb, {95.0, 115.0}, 1);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].mean_hm > rows[0].mean_hm);
        CHECK(rows[1].mean_lm >= rows[0].mean_lm);
        const std::string csv = sweep_csv(SweepAxis::RhoDb, rows);
        CHECK(csv.find("rho (dB)") == 0);
    }
    SECTION("antenna axis applies to the scenario") {
        const Scenario s32 = apply_axis(sc, SweepAxis::Nt, 32.0);
        CHECK(s32.n_t == 32);
        CHECK_THROWS_AS(apply_axis(sc, SweepAxis::Kh, 99.0), std::invalid_argument);
    }
}
