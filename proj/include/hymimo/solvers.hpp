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

#ifndef HYMIMO_SOLVERS_HPP
#define HYMIMO_SOLVERS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"

namespace hymimo {

// ------------------------------------------------------------ LP feasibility

/// a^T x <= b.
struct LinearConstraint {
    RVec a;
    double b = 0.0;
};

struct LpResult {
    bool feasible = false;
    RVec x;
};

/// Phase-1 simplex feasibility check over {lo <= x <= hi, a_i^T x <= b_i}.
/// Bland's rule, dense tableau; sized for the small allocation problems here.
inline LpResult lp_feasible(const std::vector<LinearConstraint>& cons, const RVec& lo,
                            const RVec& hi, double tol = 1e-9, int iter_cap = 20000) {
    const int n = static_cast<int>(lo.size());
    for (int j = 0; j < n; ++j)
        if (!(lo(j) <= hi(j))) return {false, RVec()};

    // shift to y = x - lo >= 0; upper bounds become rows y_j <= hi_j - lo_j
    std::vector<LinearConstraint> rows = cons;
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(hi(j))) {
            LinearConstraint c;
            c.a = RVec::Zero(n);
            c.a(j) = 1.0;
            c.b = hi(j);
            rows.push_back(c);
        }
    }
    const int m = static_cast<int>(rows.size());

    // tableau columns: y (n) | slack (m) | artificial (up to m) | rhs
    std::vector<int> art_col(m, -1);
    int n_art = 0;
    for (int i = 0; i < m; ++i) {
        double b = rows[i].b - rows[i].a.dot(lo);
        if (b < 0.0) ++n_art;
    }
    const int cols = n + m + n_art + 1;
    RMat t = RMat::Zero(m + 1, cols);
    std::vector<int> basis(m);
    int art_used = 0;
    for (int i = 0; i < m; ++i) {
        RVec a = rows[i].a;
        double b = rows[i].b - a.dot(lo);
        double sign = 1.0;
        if (b < 0.0) { sign = -1.0; b = -b; }
        t.block(i, 0, 1, n) = sign * a.transpose();
        t(i, n + i) = sign;  // slack
        t(i, cols - 1) = b;
        if (sign > 0.0) {
            basis[i] = n + i;
        } else {
            const int ac = n + m + art_used++;
            art_col[i] = ac;
            t(i, ac) = 1.0;
            basis[i] = ac;
        }
    }
    // objective: minimize sum of artificials; express in terms of nonbasic vars
    for (int i = 0; i < m; ++i)
        if (art_col[i] >= 0) t(m, art_col[i]) = 1.0;
    for (int i = 0; i < m; ++i)
        if (art_col[i] >= 0) t.row(m) -= t.row(i);

    for (int iter = 0; iter < iter_cap; ++iter) {
        // Bland: entering = lowest-index column with negative reduced cost
        int enter = -1;
        for (int j = 0; j < cols - 1; ++j)
            if (t(m, j) < -tol) { enter = j; break; }
        if (enter < 0) break;
        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < m; ++i) {
            if (t(i, enter) > tol) {
                const double ratio = t(i, cols - 1) / t(i, enter);
                if (leave < 0 || ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
        }
        if (leave < 0) break;  // unbounded phase-1 cannot happen; bail out
        t.row(leave) /= t(leave, enter);
        for (int i = 0; i <= m; ++i)
            if (i != leave && std::abs(t(i, enter)) > 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        basis[leave] = enter;
        if (iter == iter_cap - 1)
            throw std::runtime_error("lp_feasible: iteration cap reached (possible cycling)");
    }

    const double obj = -t(m, cols - 1);
    if (obj > tol) return {false, RVec()};
    RVec y = RVec::Zero(n);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) y(basis[i]) = t(i, cols - 1);
    return {true, y + lo};
}

// ----------------------------------------------------- convex feasibility

/// Smooth convex constraint f(x) <= 0 with gradient and Hessian callbacks.
struct ConvexConstraint {
    std::function<double(const RVec&)> f;
    std::function<RVec(const RVec&)> grad;
    std::function<RMat(const RVec&)> hess;
};

inline ConvexConstraint linear_con(const RVec& a, double b) {
    const int n = static_cast<int>(a.size());
    return {[a, b](const RVec& x) { return a.dot(x) - b; },
            [a](const RVec&) { return a; },
            [n](const RVec&) { return RMat::Zero(n, n); }};
}

struct BarrierResult {
    bool feasible = false;
    RVec x;
    double max_violation = 0.0;
    int newton_iters = 0;
};

/// Log-barrier phase-1 for min-max violation: minimize s subject to
/// f_i(x) <= s, declaring feasibility when the optimum dips below feas_tol.
/// The augmented problem is always strictly feasible, so no initialization
/// constraint applies to x0.
inline BarrierResult convex_feasible(const std::vector<ConvexConstraint>& cons, RVec x0,
                                     double feas_tol = 1e-8, int max_outer = 60,
                                     int max_newton = 80) {
    const int n = static_cast<int>(x0.size());
    const int m = static_cast<int>(cons.size());
    double s = 0.0;
    for (const auto& c : cons) s = std::max(s, c.f(x0));
    s += 1.0;

    BarrierResult res;
    double t = 1.0;
    RVec x = x0;
    for (int outer = 0; outer < max_outer; ++outer) {
        for (int it = 0; it < max_newton; ++it) {
            // gradient/Hessian of t*s - sum log(s - f_i(x)) in (x, s)
            RVec g = RVec::Zero(n + 1);
            RMat h = RMat::Zero(n + 1, n + 1);
            g(n) = t;
            for (int i = 0; i < m; ++i) {
                const double fi = cons[i].f(x);
                const double d = s - fi;
                const RVec gi = cons[i].grad(x);
                g.head(n) += gi / d;
                g(n) -= 1.0 / d;
                h.topLeftCorner(n, n) += cons[i].hess(x) / d + gi * gi.transpose() / (d * d);
                h.block(0, n, n, 1) -= gi / (d * d);
                h.block(n, 0, 1, n) -= gi.transpose() / (d * d);
                h(n, n) += 1.0 / (d * d);
            }
            h.diagonal().array() += 1e-12;
            const RVec step = -h.ldlt().solve(g);
            const double lambda2 = -g.dot(step);
            if (!(lambda2 > 1e-12)) break;

            // backtracking line search keeping s - f_i(x) > 0
            double alpha = 1.0;
            const auto phi = [&](const RVec& xx, double ss) {
                double v = t * ss;
                for (const auto& c : cons) {
                    const double d = ss - c.f(xx);
                    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
                    v -= std::log(d);
                }
                return v;
            };
            const double phi0 = phi(x, s);
            while (alpha > 1e-12) {
                const RVec xn = x + alpha * step.head(n);
                const double sn = s + alpha * step(n);
                if (phi(xn, sn) <= phi0 - 1e-4 * alpha * lambda2) {
                    x = xn;
                    s = sn;
                    break;
                }
                alpha *= 0.5;
            }
            ++res.newton_iters;
            if (alpha <= 1e-12) break;
            if (lambda2 / 2.0 < 1e-10) break;
        }
        if (s < -1e-6) break;              // strictly feasible, done
        if (m / t < 1e-10) break;          // converged; s is near the optimum
        t *= 8.0;
    }

    double viol = 0.0;
    for (const auto& c : cons) viol = std::max(viol, c.f(x));
    res.x = x;
    res.max_violation = viol;
    res.feasible = viol <= feas_tol;
    return res;
}

}  // namespace hymimo

#endif
