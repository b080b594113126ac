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

#include "hymimo/rng.hpp"
#include "hymimo/solvers.hpp"

using namespace hymimo;

namespace {

LinearConstraint lin(std::initializer_list<double> a, double b) {
    LinearConstraint c;
    c.a = RVec::Zero(static_cast<int>(a.size()));
    int i = 0;
    for (double v : a) c.a(i++) = v;
    c.b = b;
    return c;
}

bool satisfies(const std::vector<LinearConstraint>& cons, const RVec& x, double tol = 1e-7) {
    for (const auto& c : cons)
        if (c.a.dot(x) > c.b + tol) return false;
    return true;
}

}  // namespace

TEST_CASE("linear feasibility") {
    const RVec lo = RVec::Zero(2), hi = RVec::Ones(2);

    SECTION("simple feasible box cut") {
        const std::vector<LinearConstraint> cons{lin({1.0, 1.0}, 1.0), lin({-1.0, 0.0}, -0.3),
                                                 lin({0.0, -1.0}, -0.3)};
        const auto r = lp_feasible(cons, lo, hi);
        REQUIRE(r.feasible);
        CHECK(satisfies(cons, r.x));
        CHECK(r.x.minCoeff() >= -1e-9);
        CHECK(r.x.maxCoeff() <= 1.0 + 1e-9);
    }
    SECTION("conflicting lower bounds are infeasible") {
        // x0 >= 0.6, x1 >= 0.6, x0 + x1 <= 1
        const std::vector<LinearConstraint> cons{lin({1.0, 1.0}, 1.0), lin({-1.0, 0.0}, -0.6),
                                                 lin({0.0, -1.0}, -0.6)};
        CHECK_FALSE(lp_feasible(cons, lo, hi).feasible);
    }
    SECTION("equality through opposing inequalities") {
        const std::vector<LinearConstraint> cons{lin({1.0, 1.0}, 0.8), lin({-1.0, -1.0}, -0.8)};
        const auto r = lp_feasible(cons, lo, hi);
        REQUIRE(r.feasible);
        CHECK(r.x.sum() == Catch::Approx(0.8).margin(1e-7));
    }
    SECTION("inverted variable bounds") {
        RVec bad_lo = RVec::Ones(2), bad_hi = RVec::Zero(2);
        CHECK_FALSE(lp_feasible({}, bad_lo, bad_hi).feasible);
    }
    SECTION("agrees with rejection sampling on random polytopes") {
        // draw random constraint sets; classify by dense sampling, then check
        // the simplex answer never contradicts a sampled feasible point
        const int n = 3;
        const RVec l3 = RVec::Zero(n), h3 = RVec::Ones(n);
        Rng rng(2024);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<LinearConstraint> cons;
            for (int c = 0; c < 4; ++c) {
                LinearConstraint lc;
                lc.a = RVec::Zero(n);
                for (int j = 0; j < n; ++j) lc.a(j) = rng.uniform(-1.0, 1.0);
                lc.b = rng.uniform(-0.5, 1.0);
                cons.push_back(std::move(lc));
            }
            bool sampled_feasible = false;
            for (int s = 0; s < 4000 && !sampled_feasible; ++s) {
                RVec x(n);
                for (int j = 0; j < n; ++j) x(j) = rng.uniform(0.0, 1.0);
                sampled_feasible = satisfies(cons, x, 0.0);
            }
            const auto r = lp_feasible(cons, l3, h3);
            if (sampled_feasible) {
                REQUIRE(r.feasible);  // an interior point exists, so must agree
                CHECK(satisfies(cons, r.x));
            } else if (r.feasible) {
                // sampling can miss thin feasible slivers; the witness itself
                // must still check out
                CHECK(satisfies(cons, r.x));
            }
        }
    }
}

TEST_CASE("convex feasibility") {
    SECTION("linear constraints reproduce the LP answer") {
        std::vector<ConvexConstraint> cons;
        RVec a1(2), a2(2);
        a1 << 1.0, 1.0;
        a2 << -1.0, 0.0;
        cons.push_back(linear_con(a1, 1.0));
        cons.push_back(linear_con(a2, -0.3));
        const auto r = convex_feasible(cons, RVec::Zero(2));
        REQUIRE(r.feasible);
        CHECK(r.x(0) >= 0.3 - 1e-6);
        CHECK(r.x.sum() <= 1.0 + 1e-6);
    }
    SECTION("quadratic ball intersected with a halfspace") {
        // ||x||^2 - 1 <= 0 and x0 >= 0.5
        std::vector<ConvexConstraint> cons;
        cons.push_back(ConvexConstraint{
            [](const RVec& x) { return x.squaredNorm() - 1.0; },
            [](const RVec& x) { return RVec(2.0 * x); },
            [](const RVec& x) { return RMat(2.0 * RMat::Identity(x.size(), x.size())); }});
        RVec a(2);
        a << -1.0, 0.0;
        cons.push_back(linear_con(a, -0.5));
        const auto r = convex_feasible(cons, RVec::Constant(2, 5.0));
        REQUIRE(r.feasible);
        CHECK(r.x.squaredNorm() <= 1.0 + 1e-6);
        CHECK(r.x(0) >= 0.5 - 1e-6);
    }
    SECTION("disjoint ball and halfspace are infeasible") {
        std::vector<ConvexConstraint> cons;
        cons.push_back(ConvexConstraint{
            [](const RVec& x) { return x.squaredNorm() - 1.0; },
            [](const RVec& x) { return RVec(2.0 * x); },
            [](const RVec& x) { return RMat(2.0 * RMat::Identity(x.size(), x.size())); }});
        RVec a(2);
        a << -1.0, 0.0;
        cons.push_back(linear_con(a, -2.0));  // x0 >= 2 cannot meet ||x|| <= 1
        const auto r = convex_feasible(cons, RVec::Zero(2));
        CHECK_FALSE(r.feasible);
        CHECK(r.max_violation > 0.5);
    }
    SECTION("exponential constraint") {
        // exp(x0) - 2 <= 0 and x0 >= 0: witness must land in [0, ln 2]
        std::vector<ConvexConstraint> cons;
        cons.push_back(ConvexConstraint{
            [](const RVec& x) { return std::exp(x(0)) - 2.0; },
            [](const RVec& x) {
                RVec g(1);
                g(0) = std::exp(x(0));
                return g;
            },
            [](const RVec& x) {
                RMat h(1, 1);
                h(0, 0) = std::exp(x(0));
                return h;
            }});
        RVec a(1);
        a << -1.0;
        cons.push_back(linear_con(a, 0.0));
        const auto r = convex_feasible(cons, RVec::Constant(1, 3.0));
        REQUIRE(r.feasible);
        CHECK(r.x(0) >= -1e-6);
        CHECK(r.x(0) <= std::log(2.0) + 1e-6);
    }
}
