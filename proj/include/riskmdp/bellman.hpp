// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Risk-averse Bellman operators on finite models.  The one-step operator
// pushes the transition kernel forward under y -> cost + gamma * v(y), mixes
// the per-action laws with the randomized-action weights, and applies the
// state's risk measure.  The state-wise infimum over the action simplex uses
// vertex enumeration when mixing provably cannot help and a lattice search
// with pairwise refinement otherwise.

#ifndef RISKMDP_BELLMAN_HPP
#define RISKMDP_BELLMAN_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/error.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/parallel.hpp"
#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace riskmdp {

/// Values of one time layer, indexed by state.
using ValueLayer = std::vector<double>;

/// Simplex weights over the admissible actions at one (t, state).
using ActionWeights = std::vector<double>;

/// Per-layer value functions.  Finite mode keeps layers t = 1..T at index
/// t - 1 plus the scalar j0; stationary mode keeps a single layer.
struct ValueTable {
    double j0 = 0.0;
    std::vector<ValueLayer> layers;
};

/// Per-layer randomized action choices, one simplex vector per state.
struct PolicyLayer {
    std::vector<ActionWeights> states;
};

struct RandomizedPolicy {
    std::vector<PolicyLayer> layers;
};

/// Law of cost(t,x,a,Y) + gamma * v(Y) with Y drawn from kernel(t,x,a).
inline Pmf outcome_pmf(const Model& m, const ValueLayer& v, int t, int x, int a) {
    if (v.size() != static_cast<std::size_t>(m.n_states()))
        fail("LengthMismatch", "value layer covers " + std::to_string(v.size()) +
                                   " of " + std::to_string(m.n_states()) + " states");
    const ActionEntry& ae = m.action(t, x, a);
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(ae.transitions.size());
    for (const Transition& tr : ae.transitions)
        atoms.emplace_back(tr.cost + m.gamma * v[static_cast<std::size_t>(tr.next)],
                           tr.prob);
    return Pmf::from_atoms(std::move(atoms));
}

/// Law of the one-step cost plus discounted continuation under the
/// randomized action lambda: the lambda-mixture of the per-action laws.
inline Pmf tilde_p(const Model& m, const ValueLayer& v, int t, int x,
                   const ActionWeights& lambda) {
    const int na = m.n_actions(t, x);
    if (lambda.size() != static_cast<std::size_t>(na))
        fail("BadWeights", "got " + std::to_string(lambda.size()) +
                               " weights for " + std::to_string(na) +
                               " admissible actions");
    std::vector<Pmf> outcomes;
    outcomes.reserve(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) outcomes.push_back(outcome_pmf(m, v, t, x, a));
    return mix(lambda, outcomes);
}

/// One-step operator value: the state's risk applied to tilde_p.
inline double g_op(const Model& m, const ValueLayer& v, int t, int x,
                   const ActionWeights& lambda) {
    return evaluate(m.state_layer(t, x).risk, tilde_p(m, v, t, x, lambda));
}

/// Root composition: the outer risk of gamma * v(Y) with Y drawn from the
/// initial distribution (no stage cost is charged at t = 0).
inline double h0(const Model& m, const ValueLayer& v) {
    if (v.size() != static_cast<std::size_t>(m.n_states()))
        fail("LengthMismatch", "value layer covers " + std::to_string(v.size()) +
                                   " of " + std::to_string(m.n_states()) + " states");
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(m.initial.size());
    for (std::size_t i = 0; i < m.initial.size(); ++i) {
        const auto y = static_cast<std::size_t>(m.initial.value(i));
        atoms.emplace_back(m.gamma * v[y], m.initial.prob(i));
    }
    return evaluate(m.risk0, Pmf::from_atoms(std::move(atoms)));
}

enum class SimplexMode { kAuto, kVertex, kGrid };

inline SimplexMode simplex_mode_from_string(const std::string& s) {
    if (s == "auto") return SimplexMode::kAuto;
    if (s == "vertex") return SimplexMode::kVertex;
    if (s == "grid") return SimplexMode::kGrid;
    fail("BadArgs", "unknown simplex mode '" + s + "' (want auto|vertex|grid)");
}

struct SimplexResult {
    ActionWeights lambda;
    double value = 0.0;
};

namespace detail {

inline double mix_objective(const std::vector<Pmf>& pmfs, const RiskSpec& spec,
                            const ActionWeights& lambda) {
    return evaluate(spec, mix(lambda, pmfs));
}

/// Lexicographic enumeration of all weight vectors with entries k_i / k,
/// sum k_i = k.  Calls visit(lambda) on each.
template <typename Visit>
void for_each_lattice_point(std::size_t n, int k, Visit&& visit) {
    std::vector<int> counts(n, 0);
    ActionWeights lambda(n, 0.0);
    const double step = 1.0 / static_cast<double>(k);
    // Depth-first over prefix choices; ascending count at each position makes
    // the visit order lexicographic in lambda.
    auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
        if (pos + 1 == n) {
            counts[pos] = left;
            for (std::size_t i = 0; i < n; ++i)
                lambda[i] = static_cast<double>(counts[i]) * step;
            // Rebalance dust onto the largest entry so mixtures see an exact
            // unit total.
            double total = 0.0;
            for (double w : lambda) total += w;
            if (total != 1.0) {
                std::size_t heaviest = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (lambda[i] > lambda[heaviest]) heaviest = i;
                lambda[heaviest] += 1.0 - total;
            }
            visit(static_cast<const ActionWeights&>(lambda));
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[pos] = c;
            self(self, pos + 1, left - c);
        }
    };
    rec(rec, 0, k);
}

/// Rounds interior weights to the 1e-9 grid, repairing the sum on the
/// largest entry; suppresses float dust in serialized policies.
inline ActionWeights round_weights(ActionWeights lambda) {
    double total = 0.0;
    for (double& w : lambda) {
        w = std::round(w * 1e9) / 1e9;
        if (w < 0.0) w = 0.0;
        total += w;
    }
    if (total != 1.0) {
        std::size_t heaviest = 0;
        for (std::size_t i = 1; i < lambda.size(); ++i)
            if (lambda[i] > lambda[heaviest]) heaviest = i;
        lambda[heaviest] += 1.0 - total;
    }
    return lambda;
}

} // namespace detail

/// Minimizes lambda -> evaluate(spec, mix(lambda, pmfs)) over the simplex.
/// kVertex enumerates pure actions (exact when mixing cannot improve the
/// spec); kGrid scans a lattice of spacing 1/32 (up to 4 actions; 1/8 above)
/// and refines the best point by pairwise mass transfers with step halving
/// down to 1e-6.  kAuto picks kVertex exactly when is_mixture_quasiconcave
/// holds.  Ties break to the lowest action index among vertices and to the
/// lexicographically smallest lattice point otherwise.
inline SimplexResult simplex_min(const std::vector<Pmf>& pmfs, const RiskSpec& spec,
                                 SimplexMode mode = SimplexMode::kAuto) {
    const std::size_t n = pmfs.size();
    if (n == 0) fail("NoActions", "simplex_min needs at least one action");
    if (n == 1) return {{1.0}, evaluate(spec, pmfs[0])};
    if (mode == SimplexMode::kAuto)
        mode = is_mixture_quasiconcave(spec) ? SimplexMode::kVertex
                                             : SimplexMode::kGrid;

    if (mode == SimplexMode::kVertex) {
        SimplexResult best;
        for (std::size_t a = 0; a < n; ++a) {
            const double value = evaluate(spec, pmfs[a]);
            if (a == 0 || value < best.value) {
                best.value = value;
                best.lambda.assign(n, 0.0);
                best.lambda[a] = 1.0;
            }
        }
        return best;
    }

    const int k = n <= 4 ? 32 : 8;
    SimplexResult best;
    bool first = true;
    detail::for_each_lattice_point(n, k, [&](const ActionWeights& lambda) {
        const double value = detail::mix_objective(pmfs, spec, lambda);
        if (first || value < best.value) {
            first = false;
            best.value = value;
            best.lambda = lambda;
        }
    });

    // Pattern search: move mass step-wise between ordered action pairs,
    // keeping strict improvements, halving the step until below 1e-6.
    double step = 0.5 / static_cast<double>(k);
    while (step >= 1e-6) {
        bool improved = true;
        int sweeps = 0;
        while (improved && ++sweeps <= 64) {
            improved = false;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j || best.lambda[j] < step) continue;
                    ActionWeights cand = best.lambda;
                    cand[i] += step;
                    cand[j] -= step;
                    const double value = detail::mix_objective(pmfs, spec, cand);
                    if (value < best.value) {
                        best.value = value;
                        best.lambda = std::move(cand);
                        improved = true;
                    }
                }
            }
        }
        step *= 0.5;
    }

    best.lambda = detail::round_weights(std::move(best.lambda));
    best.value = detail::mix_objective(pmfs, spec, best.lambda);
    return best;
}

struct SopResult {
    double value = 0.0;
    ActionWeights lambda;
};

/// State-wise Bellman infimum: simplex_min over the admissible actions at
/// (t, x) under the state's risk measure.
inline SopResult s_op(const Model& m, const ValueLayer& v, int t, int x,
                      SimplexMode mode = SimplexMode::kAuto) {
    const int na = m.n_actions(t, x);
    if (na == 0)
        fail("NoActions", "state " + m.states[static_cast<std::size_t>(x)] +
                              " has no admissible actions at t=" + std::to_string(t));
    std::vector<Pmf> outcomes;
    outcomes.reserve(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) outcomes.push_back(outcome_pmf(m, v, t, x, a));
    SimplexResult r = simplex_min(outcomes, m.state_layer(t, x).risk, mode);
    return {r.value, std::move(r.lambda)};
}

/// Policy-evaluation operator: per-state g_op at the policy's weights.
inline ValueLayer h_policy(const Model& m, const ValueLayer& v, int t,
                           const PolicyLayer& policy) {
    const auto n = static_cast<std::size_t>(m.n_states());
    if (policy.states.size() != n)
        fail("PolicyIncomplete", "policy layer covers " +
                                     std::to_string(policy.states.size()) + " of " +
                                     std::to_string(n) + " states");
    ValueLayer out(n, 0.0);
    parallel_for(n, [&](std::size_t x) {
        out[x] = g_op(m, v, t, static_cast<int>(x), policy.states[x]);
    });
    return out;
}

} // namespace riskmdp

#endif // RISKMDP_BELLMAN_HPP
