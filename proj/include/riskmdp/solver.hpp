// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Dynamic-programming solvers on top of the Bellman operators: backward
// induction for finite horizons, value iteration with a contraction-based
// stopping rule for discounted stationary models, and policy evaluation for
// both.  All sweeps parallelize over states; the time/iteration loop is
// sequential.

#ifndef RISKMDP_SOLVER_HPP
#define RISKMDP_SOLVER_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/bellman.hpp"
#include "riskmdp/error.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/parallel.hpp"

namespace riskmdp {

/// Smallest T with gamma^T * b / (1 - gamma) <= tol: the horizon beyond
/// which the discounted tail cannot move any value by more than tol.
inline int effective_horizon(double gamma, double b, double tol) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        fail("BadArgs", "effective_horizon needs gamma in (0,1), got " +
                            std::to_string(gamma));
    if (!(b >= 0.0) || !std::isfinite(b))
        fail("BadArgs", "effective_horizon needs b >= 0");
    if (!(tol > 0.0))
        fail("BadArgs", "effective_horizon needs tol > 0");
    if (b == 0.0 || tol >= b / (1.0 - gamma)) return 0;
    // Log-space estimate, then exact power fix-up against rounding.
    const double est = std::log(tol * (1.0 - gamma) / b) / std::log(gamma);
    int T = static_cast<int>(std::ceil(est));
    if (T < 0) T = 0;
    while (std::pow(gamma, T) * b / (1.0 - gamma) > tol) ++T;
    while (T > 0 && std::pow(gamma, T - 1) * b / (1.0 - gamma) <= tol) --T;
    return T;
}

struct FiniteSolveResult {
    ValueTable values;        ///< layers t = 1..T plus scalar j0
    RandomizedPolicy policy;  ///< argmin weights per (t, state)
};

/// Backward induction: J*_T = s_op at the zero function, J*_t = s_op(J*_{t+1})
/// downward, then the scalar root value j0 = h0(J*_1).
inline FiniteSolveResult solve_finite(const Model& m,
                                      SimplexMode mode = SimplexMode::kAuto) {
    if (m.mode != Mode::kFinite)
        fail("BadArgs", "solve_finite needs a finite-horizon model");
    const int T = m.horizon;
    const auto n = static_cast<std::size_t>(m.n_states());
    FiniteSolveResult res;
    res.values.layers.assign(static_cast<std::size_t>(T), ValueLayer(n, 0.0));
    res.policy.layers.assign(static_cast<std::size_t>(T), PolicyLayer{});
    ValueLayer next(n, 0.0);
    for (int t = T; t >= 1; --t) {
        ValueLayer cur(n, 0.0);
        PolicyLayer pol;
        pol.states.assign(n, ActionWeights{});
        parallel_for(n, [&](std::size_t x) {
            SopResult r = s_op(m, next, t, static_cast<int>(x), mode);
            cur[x] = r.value;
            pol.states[x] = std::move(r.lambda);
        });
        res.values.layers[static_cast<std::size_t>(t - 1)] = cur;
        res.policy.layers[static_cast<std::size_t>(t - 1)] = std::move(pol);
        next = std::move(cur);
    }
    res.values.j0 = h0(m, res.values.layers.front());
    return res;
}

/// Backward composition of h_policy for a fixed randomized policy, then h0.
inline FiniteSolveResult evaluate_policy_finite(const Model& m,
                                                const RandomizedPolicy& policy,
                                                int T) {
    if (m.mode != Mode::kFinite)
        fail("BadArgs", "evaluate_policy_finite needs a finite-horizon model");
    if (T != m.horizon)
        fail("BadArgs", "horizon " + std::to_string(T) +
                            " does not match the model horizon " +
                            std::to_string(m.horizon));
    if (policy.layers.size() != static_cast<std::size_t>(T))
        fail("PolicyIncomplete", "policy has " + std::to_string(policy.layers.size()) +
                                     " layers for horizon " + std::to_string(T));
    const auto n = static_cast<std::size_t>(m.n_states());
    FiniteSolveResult res;
    res.policy = policy;
    res.values.layers.assign(static_cast<std::size_t>(T), ValueLayer(n, 0.0));
    ValueLayer next(n, 0.0);
    for (int t = T; t >= 1; --t) {
        ValueLayer cur = h_policy(m, next, t,
                                  policy.layers[static_cast<std::size_t>(t - 1)]);
        res.values.layers[static_cast<std::size_t>(t - 1)] = cur;
        next = std::move(cur);
    }
    res.values.j0 = h0(m, res.values.layers.front());
    return res;
}

namespace detail {

inline void require_stationary_normalized(const Model& m) {
    if (m.mode != Mode::kStationary)
        fail("NotStationary", "infinite-horizon solving needs a stationary model");
    for (const StateLayer& sl : m.layers.front().states)
        if (!is_normalized(sl.risk))
            fail("NotNormalized",
                 "infinite-horizon solving needs normalized per-state risks");
}

/// One full sweep of the given operator (s_op or h_policy semantics).
template <typename Sweep>
int iterate_to_fixed_point(const Model& m, double tol, int max_iters,
                           ValueLayer& v, double& residual,
                           std::vector<ValueLayer>* trace, Sweep&& sweep) {
    const double gamma = m.gamma;
    const double threshold = gamma > 0.0
                                 ? tol * (1.0 - gamma) / gamma
                                 : std::numeric_limits<double>::infinity();
    int iters = 0;
    residual = std::numeric_limits<double>::infinity();
    if (trace) trace->push_back(v);
    while (iters < max_iters) {
        ValueLayer next = sweep(v);
        ++iters;
        double resid = 0.0;
        for (std::size_t x = 0; x < v.size(); ++x)
            resid = std::max(resid, std::abs(next[x] - v[x]));
        v = std::move(next);
        residual = resid;
        if (trace) trace->push_back(v);
        if (resid <= threshold) break;
    }
    return iters;
}

inline int default_max_iters(const Model& m, double tol) {
    if (m.gamma <= 0.0) return 1000;
    if (m.cost_bound == 0.0) return 1000;
    const int eff = effective_horizon(m.gamma, m.cost_bound, tol);
    return std::max(1000, 10 * eff);
}

} // namespace detail

struct InfiniteSolveResult {
    ValueTable values;        ///< single stationary layer
    RandomizedPolicy policy;  ///< single layer: argmin at the final values
    int iters = 0;            ///< operator applications in the main loop
    double residual = 0.0;    ///< fixed-point residual ||S v* - v*||_inf
    bool converged = false;   ///< false when max_iters hit first
};

/// Value iteration v <- S v from the zero function.  Stops when the step
/// ||v_{k+1} - v_k|| <= tol*(1-gamma)/gamma, which by the gamma-contraction
/// guarantees ||v - J*|| <= tol and a fixed-point residual <= tol*(1-gamma).
/// On max_iters exhaustion the best iterate is returned with converged=false
/// rather than throwing.
inline InfiniteSolveResult solve_infinite(const Model& m, double tol = 1e-8,
                                          int max_iters = 0,
                                          SimplexMode mode = SimplexMode::kAuto,
                                          std::vector<ValueLayer>* trace = nullptr) {
    detail::require_stationary_normalized(m);
    if (!(tol > 0.0)) fail("BadArgs", "solve_infinite needs tol > 0");
    if (max_iters <= 0) max_iters = detail::default_max_iters(m, tol);
    const auto n = static_cast<std::size_t>(m.n_states());
    InfiniteSolveResult res;
    ValueLayer v(n, 0.0);
    double step_resid = 0.0;
    res.iters = detail::iterate_to_fixed_point(
        m, tol, max_iters, v, step_resid, trace, [&](const ValueLayer& cur) {
            ValueLayer next(n, 0.0);
            parallel_for(n, [&](std::size_t x) {
                next[x] = s_op(m, cur, 1, static_cast<int>(x), mode).value;
            });
            return next;
        });
    const double gamma = m.gamma;
    res.converged = res.iters < max_iters ||
                    step_resid <= (gamma > 0.0 ? tol * (1.0 - gamma) / gamma
                                               : std::numeric_limits<double>::infinity());
    // Policy extraction at the final iterate; the same sweep yields the true
    // fixed-point residual ||S v* - v*||.
    PolicyLayer pol;
    pol.states.assign(n, ActionWeights{});
    ValueLayer sv(n, 0.0);
    parallel_for(n, [&](std::size_t x) {
        SopResult r = s_op(m, v, 1, static_cast<int>(x), mode);
        sv[x] = r.value;
        pol.states[x] = std::move(r.lambda);
    });
    double resid = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        resid = std::max(resid, std::abs(sv[x] - v[x]));
    res.residual = resid;
    res.policy.layers.push_back(std::move(pol));
    res.values.layers.push_back(std::move(v));
    res.values.j0 = h0(m, res.values.layers.front());
    return res;
}

/// Fixed-point iteration of h_policy for a stationary randomized policy,
/// with the same stopping rule and fallback behavior as solve_infinite.
inline InfiniteSolveResult evaluate_policy_infinite(const Model& m,
                                                    const RandomizedPolicy& policy,
                                                    double tol = 1e-8,
                                                    int max_iters = 0) {
    detail::require_stationary_normalized(m);
    if (!(tol > 0.0)) fail("BadArgs", "evaluate_policy_infinite needs tol > 0");
    if (policy.layers.size() != 1)
        fail("PolicyIncomplete", "stationary evaluation needs exactly one policy layer");
    if (max_iters <= 0) max_iters = detail::default_max_iters(m, tol);
    const auto n = static_cast<std::size_t>(m.n_states());
    const PolicyLayer& pol = policy.layers.front();
    InfiniteSolveResult res;
    res.policy = policy;
    ValueLayer v(n, 0.0);
    double step_resid = 0.0;
    res.iters = detail::iterate_to_fixed_point(
        m, tol, max_iters, v, step_resid, nullptr,
        [&](const ValueLayer& cur) { return h_policy(m, cur, 1, pol); });
    const double gamma = m.gamma;
    res.converged = res.iters < max_iters ||
                    step_resid <= (gamma > 0.0 ? tol * (1.0 - gamma) / gamma
                                               : std::numeric_limits<double>::infinity());
    const ValueLayer hv = h_policy(m, v, 1, pol);
    double resid = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        resid = std::max(resid, std::abs(hv[x] - v[x]));
    res.residual = resid;
    res.values.layers.push_back(std::move(v));
    res.values.j0 = h0(m, res.values.layers.front());
    return res;
}

} // namespace riskmdp

#endif // RISKMDP_SOLVER_HPP
