// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Finite risk-averse MDP models: states, per-time-layer admissible actions,
// transition kernels with successor-dependent costs, and per-(t, state)
// risk specifications.  Costs are charged for steps t = 1..T; the t = 0
// layer carries only the initial distribution and the outer risk measure.

#ifndef RISKMDP_MODEL_HPP
#define RISKMDP_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/error.hpp"
#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace riskmdp {

enum class Mode {
    kFinite,     ///< horizon T, discount in [0,1]
    kStationary, ///< infinite horizon, discount in [0,1), normalized risks
};

/// One successor entry of a transition kernel row.  The cost is latent:
/// it may depend on the realized successor state.
struct Transition {
    int next = 0;       ///< successor state index
    double prob = 0.0;  ///< transition probability
    double cost = 0.0;  ///< stage cost charged when this successor realizes
};

struct ActionEntry {
    std::string name;
    std::vector<Transition> transitions;

    /// Kernel row as a distribution over successor state indices.
    Pmf kernel() const {
        std::vector<std::pair<double, double>> atoms;
        atoms.reserve(transitions.size());
        for (const Transition& tr : transitions)
            atoms.emplace_back(static_cast<double>(tr.next), tr.prob);
        return Pmf::from_atoms(std::move(atoms));
    }
};

/// Admissible actions and the risk measure attached to one (t, state) pair.
struct StateLayer {
    RiskSpec risk = RiskSpec::mean_risk();
    std::vector<ActionEntry> actions;
};

/// All per-state data of one time layer.
struct Layer {
    std::vector<StateLayer> states;
};

struct Model {
    Mode mode = Mode::kFinite;
    int horizon = 1;   ///< T; meaningful only in finite mode
    double gamma = 1.0;
    double cost_bound = 0.0;
    std::vector<std::string> states;
    Pmf initial = Pmf::dirac(0.0);          ///< over state indices
    RiskSpec risk0 = RiskSpec::mean_risk(); ///< outer risk at t = 0
    std::vector<Layer> layers;              ///< finite: t = 1..T; stationary: one

    int n_states() const { return static_cast<int>(states.size()); }

    /// Layer holding the data for decision epoch t (1-based cost epochs).
    const Layer& layer_at(int t) const {
        if (mode == Mode::kStationary) return layers.front();
        return layers.at(static_cast<std::size_t>(t - 1));
    }

    const StateLayer& state_layer(int t, int x) const {
        return layer_at(t).states.at(static_cast<std::size_t>(x));
    }

    int n_actions(int t, int x) const {
        return static_cast<int>(state_layer(t, x).actions.size());
    }

    const ActionEntry& action(int t, int x, int a) const {
        const StateLayer& sl = state_layer(t, x);
        if (a < 0 || a >= static_cast<int>(sl.actions.size()))
            fail("InadmissibleAction",
                 "action index " + std::to_string(a) + " not admissible at t=" +
                     std::to_string(t) + ", state " + states.at(static_cast<std::size_t>(x)));
        return sl.actions[static_cast<std::size_t>(a)];
    }

    void validate() const;
};

namespace detail {

inline void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail("ValidationError", path + ": " + msg);
}

} // namespace detail

inline void Model::validate() const {
    using detail::check;
    const int n = n_states();
    check(n >= 1, "states", "model needs at least one state");
    {
        std::set<std::string> seen;
        for (int i = 0; i < n; ++i) {
            check(!states[static_cast<std::size_t>(i)].empty(), "states",
                  "state names must be non-empty");
            check(seen.insert(states[static_cast<std::size_t>(i)]).second, "states",
                  "duplicate state name '" + states[static_cast<std::size_t>(i)] + "'");
        }
    }
    check(std::isfinite(cost_bound) && cost_bound >= 0.0, "cost_bound",
          "must be a finite real >= 0");
    if (mode == Mode::kFinite) {
        check(horizon >= 1, "horizon", "finite mode needs horizon >= 1");
        check(gamma >= 0.0 && gamma <= 1.0, "gamma", "finite mode needs gamma in [0,1]");
        check(static_cast<int>(layers.size()) == horizon, "layers",
              "finite mode needs exactly one layer per t = 1..T");
    } else {
        check(gamma >= 0.0 && gamma < 1.0, "gamma", "stationary mode needs gamma in [0,1)");
        check(layers.size() == 1, "layers", "stationary mode takes a single layer");
    }
    for (std::size_t i = 0; i < initial.size(); ++i) {
        const double v = initial.value(i);
        check(v == std::floor(v) && v >= 0.0 && v < static_cast<double>(n), "initial",
              "support must be valid state indices");
    }
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const std::string lpath = "layers[" + std::to_string(li) + "]";
        check(static_cast<int>(layers[li].states.size()) == n, lpath,
              "layer must cover every state");
        for (int x = 0; x < n; ++x) {
            const StateLayer& sl = layers[li].states[static_cast<std::size_t>(x)];
            const std::string spath = lpath + ".states." + states[static_cast<std::size_t>(x)];
            check(!sl.actions.empty(), spath, "admissible action set is empty");
            check(mode != Mode::kStationary || is_normalized(sl.risk), spath + ".risk",
                  "stationary mode needs normalized risks");
            std::set<std::string> action_names;
            for (const ActionEntry& ae : sl.actions) {
                const std::string apath = spath + ".actions." + ae.name;
                check(!ae.name.empty(), apath, "action names must be non-empty");
                check(action_names.insert(ae.name).second, apath, "duplicate action name");
                check(!ae.transitions.empty(), apath + ".kernel", "kernel row is empty");
                double mass = 0.0;
                std::set<int> succ;
                for (const Transition& tr : ae.transitions) {
                    check(tr.next >= 0 && tr.next < n, apath + ".kernel",
                          "successor index " + std::to_string(tr.next) + " out of range");
                    check(succ.insert(tr.next).second, apath + ".kernel",
                          "duplicate successor index " + std::to_string(tr.next));
                    check(std::isfinite(tr.prob) && tr.prob >= 0.0, apath + ".kernel",
                          "probabilities must be finite and >= 0");
                    check(std::isfinite(tr.cost) && std::abs(tr.cost) <= cost_bound,
                          apath + ".costs",
                          "cost " + std::to_string(tr.cost) + " exceeds bound " +
                              std::to_string(cost_bound));
                    mass += tr.prob;
                }
                check(std::abs(mass - 1.0) <= 1e-9, apath + ".kernel",
                      "row sums to " + std::to_string(mass));
            }
        }
    }
}

/// Unrolls a stationary model into an equivalent finite-horizon one with T
/// identical layers (used to compare the two solvers on common ground).
inline Model to_finite(const Model& m, int T) {
    if (m.mode != Mode::kStationary)
        fail("NotStationary", "to_finite expects a stationary model");
    if (T < 1) fail("BadArgs", "to_finite needs T >= 1");
    Model out = m;
    out.mode = Mode::kFinite;
    out.horizon = T;
    out.layers.assign(static_cast<std::size_t>(T), m.layers.front());
    out.validate();
    return out;
}

namespace detail {

inline std::vector<std::string> make_names(const std::string& prefix, int n) {
    std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::string digits = std::to_string(i);
        out.push_back(prefix + std::string(width - digits.size(), '0') + digits);
    }
    return out;
}

/// Deterministic uniform stream; the raw-bits mapping keeps generated
/// models bit-identical across platforms and standard-library versions.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : eng_(seed) {}
    double next() { return (eng_() >> 11) * 0x1.0p-53; }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 eng_;
};

} // namespace detail

/// Deterministic-by-seed random model for tests and oracle cross-checks.
/// Kernel rows are renormalized positive uniforms, costs lie in [-1, 1],
/// risks are random spectral measures (always normalized).
inline Model random_model(std::uint64_t seed, int n_states, int n_actions, Mode mode,
                          int horizon = 3) {
    if (n_states < 1 || n_actions < 1 || horizon < 1)
        fail("BadArgs", "random_model needs n_states, n_actions, horizon >= 1");
    detail::UniformStream u(seed);
    Model m;
    m.mode = mode;
    m.horizon = mode == Mode::kFinite ? horizon : 1;
    m.gamma = mode == Mode::kFinite ? u.next() : u.next(0.5, 0.95);
    m.cost_bound = 1.0;
    m.states = detail::make_names("s", n_states);
    m.risk0 = RiskSpec::mean_risk();

    std::vector<std::pair<double, double>> init;
    double init_total = 0.0;
    for (int i = 0; i < n_states; ++i) {
        init.emplace_back(static_cast<double>(i), 0.05 + u.next());
        init_total += init.back().second;
    }
    for (auto& atom : init) atom.second /= init_total;
    m.initial = Pmf::from_atoms(std::move(init));

    const std::vector<std::string> action_names = detail::make_names("a", n_actions);
    const int n_layers = mode == Mode::kFinite ? horizon : 1;
    for (int li = 0; li < n_layers; ++li) {
        Layer layer;
        for (int x = 0; x < n_states; ++x) {
            StateLayer sl;
            const int n_eta = 1 + static_cast<int>(u.next() * 3.0);
            std::vector<std::pair<double, double>> eta;
            double eta_total = 0.0;
            for (int k = 0; k < n_eta; ++k) {
                eta.emplace_back(u.next(), 0.1 + u.next());
                eta_total += eta.back().second;
            }
            for (auto& atom : eta) atom.second /= eta_total;
            sl.risk = RiskSpec::spectral(Pmf::from_atoms(std::move(eta)));
            for (int a = 0; a < n_actions; ++a) {
                ActionEntry ae;
                ae.name = action_names[static_cast<std::size_t>(a)];
                std::vector<double> weights;
                double total = 0.0;
                for (int y = 0; y < n_states; ++y) {
                    weights.push_back(0.05 + u.next());
                    total += weights.back();
                }
                for (int y = 0; y < n_states; ++y)
                    ae.transitions.push_back(
                        {y, weights[static_cast<std::size_t>(y)] / total,
                         u.next(-1.0, 1.0)});
                sl.actions.push_back(std::move(ae));
            }
            layer.states.push_back(std::move(sl));
        }
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

/// One-step, two-control model on which randomizing between the controls
/// strictly beats both pure controls under the two-scenario robust risk.
/// Control "0" yields cost 0 w.p. 0.9 / 5 w.p. 0.1; control "1" yields cost
/// 0 or 1.4 with even odds.  The decision state's risk takes the worst of
/// the two spectral scenarios 0.8*E + 0.2*avar_0.1 and avar_0.5.
inline Model appendix_a_model() {
    Model m;
    m.mode = Mode::kFinite;
    m.horizon = 1;
    m.gamma = 1.0;
    m.cost_bound = 5.0;
    m.states = {"s", "y1", "y2"};
    m.initial = Pmf::dirac(0.0);
    m.risk0 = RiskSpec::mean_risk();

    std::vector<KusuokaScenario> scen;
    scen.push_back({Pmf::from_atoms({{1.0, 0.8}, {0.1, 0.2}}), 0.0});
    scen.push_back({Pmf::dirac(0.5), 0.0});
    const RiskSpec robust = RiskSpec::kusuoka(std::move(scen));

    Layer layer;
    StateLayer decision;
    decision.risk = robust;
    decision.actions.push_back({"0", {{1, 0.9, 0.0}, {2, 0.1, 5.0}}});
    decision.actions.push_back({"1", {{1, 0.5, 0.0}, {2, 0.5, 1.4}}});
    layer.states.push_back(std::move(decision));
    for (int y = 1; y <= 2; ++y) {
        StateLayer terminal;
        terminal.risk = RiskSpec::mean_risk();
        terminal.actions.push_back({"stay", {{y, 1.0, 0.0}}});
        layer.states.push_back(std::move(terminal));
    }
    m.layers.push_back(std::move(layer));
    m.validate();
    return m;
}

} // namespace riskmdp

#endif // RISKMDP_MODEL_HPP
