// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Brute-force ground-truth evaluators.  The trajectory tree materializes the
// conditional law at every (history) node by direct recursion over all
// (action, successor) branches and applies the per-state risk measures from
// the leaves upward — deliberately sharing no code with the operator-based
// evaluators it cross-checks.  Exhaustive policy enumeration and dense
// simplex lattices provide exact minima on tiny instances.

#ifndef RISKMDP_ORACLE_HPP
#define RISKMDP_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/bellman.hpp"
#include "riskmdp/error.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace riskmdp {
namespace oracle {

/// A partial trajectory (x_1, a_1, ..., a_{t-1}, x_t); states has one more
/// entry than actions.
struct History {
    std::vector<int> states;
    std::vector<int> actions;
};

/// Maps each history to weights over the admissible actions at its endpoint.
using HistoryPolicyFn = std::function<ActionWeights(const History&)>;

namespace detail {

inline const ActionWeights& markov_lookup(const RandomizedPolicy& policy, int t,
                                          int x, int T) {
    std::size_t li = 0;
    if (policy.layers.size() == static_cast<std::size_t>(T))
        li = static_cast<std::size_t>(t - 1);
    else if (policy.layers.size() != 1)
        fail("PolicyIncomplete", "Markov policy has " +
                                     std::to_string(policy.layers.size()) +
                                     " layers for horizon " + std::to_string(T));
    const PolicyLayer& layer = policy.layers[li];
    if (static_cast<std::size_t>(x) >= layer.states.size())
        fail("PolicyIncomplete",
             "policy layer misses state index " + std::to_string(x));
    return layer.states[static_cast<std::size_t>(x)];
}

struct TreeWalker {
    const Model& m;
    const HistoryPolicyFn& policy;
    int T;
    std::size_t budget;
    std::size_t visited = 0;

    /// Nested risk-to-go of the history ending at time t; recurses over all
    /// (action, successor) branches and forms the law of
    /// cost + gamma * (risk-to-go of the extended history) explicitly.
    double value(int t, History& h) {
        if (++visited > budget)
            fail("TreeTooLarge", "trajectory tree exceeds " +
                                     std::to_string(budget) + " nodes");
        const int x = h.states.back();
        const ActionWeights lambda = policy(h);
        const StateLayer& sl = m.state_layer(t, x);
        if (lambda.size() != sl.actions.size())
            fail("BadWeights", "policy returned " + std::to_string(lambda.size()) +
                                   " weights for " + std::to_string(sl.actions.size()) +
                                   " actions");
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t a = 0; a < sl.actions.size(); ++a) {
            if (lambda[a] == 0.0) continue;
            for (const Transition& tr : sl.actions[a].transitions) {
                double w = tr.cost;
                if (t < T) {
                    h.states.push_back(tr.next);
                    h.actions.push_back(static_cast<int>(a));
                    w += m.gamma * value(t + 1, h);
                    h.actions.pop_back();
                    h.states.pop_back();
                }
                atoms.emplace_back(w, lambda[a] * tr.prob);
            }
        }
        return evaluate(sl.risk, Pmf::from_atoms(std::move(atoms)));
    }
};

} // namespace detail

/// Exact nested risk of a (possibly history-dependent) policy over the full
/// trajectory tree: per-history recursion, then the outer risk of
/// gamma * (risk-to-go) under the initial distribution.
inline double tree_risk(const Model& m, const HistoryPolicyFn& policy, int T,
                        std::size_t max_nodes = 4000000) {
    if (T < 1) fail("BadArgs", "tree_risk needs T >= 1");
    if (m.mode == Mode::kFinite && T != m.horizon)
        fail("BadArgs", "horizon " + std::to_string(T) +
                            " does not match the model horizon " +
                            std::to_string(m.horizon));
    detail::TreeWalker walker{m, policy, T, max_nodes};
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < m.initial.size(); ++i) {
        History h;
        h.states.push_back(static_cast<int>(m.initial.value(i)));
        atoms.emplace_back(m.gamma * walker.value(1, h), m.initial.prob(i));
    }
    return evaluate(m.risk0, Pmf::from_atoms(std::move(atoms)));
}

inline double tree_risk(const Model& m, const RandomizedPolicy& policy, int T,
                        std::size_t max_nodes = 4000000) {
    HistoryPolicyFn fn = [&](const History& h) -> ActionWeights {
        const int t = static_cast<int>(h.states.size());
        return detail::markov_lookup(policy, t, h.states.back(), T);
    };
    return tree_risk(m, fn, T, max_nodes);
}

namespace detail {

/// Lexicographically ascending count vectors of length n summing to k.
/// Returns false once the sequence is exhausted.
inline bool next_composition(std::vector<int>& c) {
    const std::size_t n = c.size();
    if (n <= 1) return false;
    for (std::size_t j = n - 1; j-- > 0;) {
        int tail = 0;
        for (std::size_t i = j + 1; i < n; ++i) tail += c[i];
        if (tail > 0) {
            ++c[j];
            for (std::size_t i = j + 1; i < n; ++i) c[i] = 0;
            c[n - 1] = tail - 1;
            return true;
        }
    }
    return false;
}

/// All weight vectors with entries i/k over n actions, lexicographic.
inline std::vector<ActionWeights> lattice_points(std::size_t n, int k) {
    std::vector<ActionWeights> out;
    std::vector<int> c(n, 0);
    c[n - 1] = k;
    do {
        ActionWeights w(n, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = static_cast<double>(c[i]) / static_cast<double>(k);
            total += w[i];
        }
        if (total != 1.0) {
            std::size_t heaviest = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (w[i] > w[heaviest]) heaviest = i;
            w[heaviest] += 1.0 - total;
        }
        out.push_back(std::move(w));
    } while (next_composition(c));
    return out;
}

inline int grid_steps(double weight_grid) {
    if (!(weight_grid > 0.0) || weight_grid > 1.0)
        fail("BadArgs", "weight grid must lie in (0, 1]");
    const auto k = static_cast<int>(std::llround(1.0 / weight_grid));
    if (k < 1 || std::abs(1.0 / weight_grid - k) > 1e-9)
        fail("BadArgs", "weight grid must be the reciprocal of a positive integer");
    return k;
}

} // namespace detail

struct EnumerationResult {
    double value = 0.0;
    std::string argmin; ///< human-readable description of the best policy
};

/// Exhaustive minimum of tree_risk over all maps from reachable histories to
/// grid-quantized action distributions.  The product of per-history grid
/// sizes is capped at 10^6 policies.
inline EnumerationResult enumerate_history_policies(const Model& m, int T,
                                                    double weight_grid) {
    if (T < 1) fail("BadArgs", "enumeration needs T >= 1");
    if (m.mode == Mode::kFinite && T != m.horizon)
        fail("BadArgs", "horizon does not match the model horizon");
    const int k = detail::grid_steps(weight_grid);

    // Reachable histories in depth-first discovery order, keyed by the
    // interleaved (x_1, a_1, x_2, ...) encoding.
    std::map<std::vector<int>, std::size_t> index;
    std::vector<std::vector<int>> keys;
    std::vector<std::vector<ActionWeights>> grids;
    double policy_count = 1.0;
    std::vector<int> key;
    auto discover = [&](auto&& self, int t, int x) -> void {
        key.push_back(x);
        if (index.emplace(key, keys.size()).second) {
            keys.push_back(key);
            const auto na = static_cast<std::size_t>(m.n_actions(t, x));
            grids.push_back(detail::lattice_points(na, k));
            policy_count *= static_cast<double>(grids.back().size());
            if (policy_count > 1e6)
                fail("EnumerationTooLarge",
                     "history-policy count exceeds 10^6");
            if (t < T) {
                const StateLayer& sl = m.state_layer(t, x);
                for (std::size_t a = 0; a < sl.actions.size(); ++a) {
                    key.push_back(static_cast<int>(a));
                    for (const Transition& tr : sl.actions[a].transitions)
                        self(self, t + 1, tr.next);
                    key.pop_back();
                }
            }
        }
        key.pop_back();
    };
    for (std::size_t i = 0; i < m.initial.size(); ++i)
        discover(discover, 1, static_cast<int>(m.initial.value(i)));

    const std::size_t n_hist = keys.size();
    std::vector<std::size_t> choice(n_hist, 0);
    HistoryPolicyFn fn = [&](const History& h) -> const ActionWeights& {
        std::vector<int> hk;
        for (std::size_t i = 0; i < h.states.size(); ++i) {
            hk.push_back(h.states[i]);
            if (i < h.actions.size()) hk.push_back(h.actions[i]);
        }
        const std::size_t hi = index.at(hk);
        return grids[hi][choice[hi]];
    };

    EnumerationResult best;
    std::vector<std::size_t> best_choice;
    bool first = true;
    for (;;) {
        const double value = tree_risk(m, fn, T);
        if (first || value < best.value) {
            first = false;
            best.value = value;
            best_choice = choice;
        }
        // Odometer over per-history grid choices.
        std::size_t pos = 0;
        while (pos < n_hist && ++choice[pos] == grids[pos].size()) {
            choice[pos] = 0;
            ++pos;
        }
        if (pos == n_hist) break;
    }

    for (std::size_t hi = 0; hi < n_hist; ++hi) {
        std::string line;
        for (std::size_t i = 0; i < keys[hi].size(); ++i) {
            if (!line.empty()) line += i % 2 == 1 ? " a" : " ";
            if (i % 2 == 0)
                line += m.states[static_cast<std::size_t>(keys[hi][i])];
            else
                line += std::to_string(keys[hi][i]);
        }
        line += " -> [";
        const ActionWeights& w = grids[hi][best_choice[hi]];
        for (std::size_t a = 0; a < w.size(); ++a) {
            if (a > 0) line += ", ";
            line += std::to_string(w[a]);
        }
        line += "]";
        if (!best.argmin.empty()) best.argmin += "; ";
        best.argmin += line;
    }
    return best;
}

struct MarkovEnumerationResult {
    double value = 0.0;
    RandomizedPolicy argmin;
};

/// Exhaustive minimum of tree_risk over Markov policies with grid-quantized
/// weights at every (t, state) cell; capped at 10^6 policies.
inline MarkovEnumerationResult enumerate_markov_policies(const Model& m, int T,
                                                         double weight_grid) {
    if (T < 1) fail("BadArgs", "enumeration needs T >= 1");
    if (m.mode == Mode::kFinite && T != m.horizon)
        fail("BadArgs", "horizon does not match the model horizon");
    const int k = detail::grid_steps(weight_grid);
    const int n = m.n_states();

    std::vector<std::vector<ActionWeights>> grids;
    double policy_count = 1.0;
    for (int t = 1; t <= T; ++t)
        for (int x = 0; x < n; ++x) {
            grids.push_back(detail::lattice_points(
                static_cast<std::size_t>(m.n_actions(t, x)), k));
            policy_count *= static_cast<double>(grids.back().size());
            if (policy_count > 1e6)
                fail("EnumerationTooLarge", "Markov policy count exceeds 10^6");
        }

    const std::size_t cells = grids.size();
    std::vector<std::size_t> choice(cells, 0);
    RandomizedPolicy pol;
    pol.layers.assign(static_cast<std::size_t>(T), PolicyLayer{});
    for (auto& layer : pol.layers)
        layer.states.assign(static_cast<std::size_t>(n), ActionWeights{});
    auto materialize = [&] {
        std::size_t cell = 0;
        for (int t = 1; t <= T; ++t)
            for (int x = 0; x < n; ++x, ++cell)
                pol.layers[static_cast<std::size_t>(t - 1)]
                    .states[static_cast<std::size_t>(x)] = grids[cell][choice[cell]];
    };

    MarkovEnumerationResult best;
    bool first = true;
    for (;;) {
        materialize();
        const double value = tree_risk(m, pol, T);
        if (first || value < best.value) {
            first = false;
            best.value = value;
            best.argmin = pol;
        }
        std::size_t pos = 0;
        while (pos < cells && ++choice[pos] == grids[pos].size()) {
            choice[pos] = 0;
            ++pos;
        }
        if (pos == cells) break;
    }
    return best;
}

/// Exhaustive simplex lattice search for the mixture minimization; the dense
/// independent counterpart of the refined search in the operator layer.
inline SimplexResult grid_simplex_min(const std::vector<Pmf>& pmfs,
                                      const RiskSpec& spec, double resolution) {
    const std::size_t n = pmfs.size();
    if (n == 0) fail("NoActions", "grid_simplex_min needs at least one action");
    if (n > 4)
        fail("TooManyActions",
             "grid_simplex_min enumerates at most 4 actions, got " +
                 std::to_string(n));
    const int k = detail::grid_steps(resolution);
    SimplexResult best;
    bool first = true;
    for (const ActionWeights& w : detail::lattice_points(n, k)) {
        const double value = evaluate(spec, mix(w, pmfs));
        if (first || value < best.value) {
            first = false;
            best.value = value;
            best.lambda = w;
        }
    }
    return best;
}

struct AppendixA {
    double rho0 = 0.0;
    double rho1 = 0.0;
    double rho_half = 0.0;
};

/// The two-scenario robust risk evaluated on the two pure-control cost laws
/// and their even blend; mixing strictly lowers the risk (1.4, 1.4, 1.2).
inline AppendixA appendix_a() {
    std::vector<KusuokaScenario> scen;
    scen.push_back({Pmf::from_atoms({{1.0, 0.8}, {0.1, 0.2}}), 0.0});
    scen.push_back({Pmf::dirac(0.5), 0.0});
    const RiskSpec rho = RiskSpec::kusuoka(std::move(scen));
    const Pmf c0 = Pmf::from_atoms({{0.0, 0.9}, {5.0, 0.1}});
    const Pmf c1 = Pmf::from_atoms({{0.0, 0.5}, {1.4, 0.5}});
    const Pmf ch = mix({0.5, 0.5}, {c0, c1});
    return {evaluate(rho, c0), evaluate(rho, c1), evaluate(rho, ch)};
}

} // namespace oracle
} // namespace riskmdp

#endif // RISKMDP_ORACLE_HPP
