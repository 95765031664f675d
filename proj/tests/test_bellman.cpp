// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "helpers.hpp"
#include "riskmdp/bellman.hpp"
#include "riskmdp/model.hpp"

using namespace riskmdp;
using testutil::Rng;

namespace {

template <typename Fn>
void require_error(const std::string& kind, Fn&& fn) {
    try {
        fn();
        FAIL("expected error " << kind);
    } catch (const Error& e) {
        REQUIRE(e.kind() == kind);
    }
}

ValueLayer random_layer(Rng& rng, int n, double lo = -3.0, double hi = 3.0) {
    ValueLayer v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

ActionWeights random_weights(Rng& rng, int n) {
    ActionWeights w(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& x : w) {
        x = rng.uniform(0.05, 1.0);
        total += x;
    }
    for (double& x : w) x /= total;
    return w;
}

double sup_diff(const ValueLayer& a, const ValueLayer& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Two-state model with one action per state whose kernel and costs are
/// chosen per test; used for the hand-computed outcome_pmf example.
Model two_state_model(double gamma, std::vector<Transition> row) {
    Model m;
    m.mode = Mode::kFinite;
    m.horizon = 1;
    m.gamma = gamma;
    m.cost_bound = 10.0;
    m.states = {"x0", "x1"};
    m.initial = Pmf::dirac(0.0);
    m.risk0 = RiskSpec::mean_risk();
    Layer layer;
    StateLayer s0;
    s0.actions.push_back({"a", std::move(row)});
    StateLayer s1;
    s1.actions.push_back({"a", {{1, 1.0, 0.0}}});
    layer.states.push_back(std::move(s0));
    layer.states.push_back(std::move(s1));
    m.layers.push_back(std::move(layer));
    m.validate();
    return m;
}

} // namespace

TEST_CASE("outcome_pmf pushes the kernel through cost + gamma*v", "[bellman]") {
    SECTION("gamma=0 with a flat cost is a point mass") {
        Model m = two_state_model(0.0, {{0, 0.4, 2.5}, {1, 0.6, 2.5}});
        const Pmf out = outcome_pmf(m, {7.0, -7.0}, 1, 0, 0);
        REQUIRE(out == Pmf::dirac(2.5));
    }
    SECTION("v=0 gives the one-step cost law") {
        Model m = two_state_model(0.7, {{0, 0.4, 1.0}, {1, 0.6, -2.0}});
        const Pmf out = outcome_pmf(m, {0.0, 0.0}, 1, 0, 0);
        REQUIRE(out == Pmf::from_atoms({{1.0, 0.4}, {-2.0, 0.6}}));
    }
    SECTION("hand-computed two-branch example") {
        // y0 w.p. 0.3 at cost 1, y1 w.p. 0.7 at cost 2; gamma=0.5, v=(4,0):
        // branch values 1 + 0.5*4 = 3 and 2 + 0 = 2.
        Model m = two_state_model(0.5, {{0, 0.3, 1.0}, {1, 0.7, 2.0}});
        const Pmf out = outcome_pmf(m, {4.0, 0.0}, 1, 0, 0);
        REQUIRE(out == Pmf::from_atoms({{2.0, 0.7}, {3.0, 0.3}}));
    }
    SECTION("inadmissible action index") {
        Model m = two_state_model(0.5, {{0, 1.0, 0.0}});
        require_error("InadmissibleAction",
                      [&] { outcome_pmf(m, {0.0, 0.0}, 1, 0, 3); });
    }
    SECTION("value layer must cover all states") {
        Model m = two_state_model(0.5, {{0, 1.0, 0.0}});
        require_error("LengthMismatch", [&] { outcome_pmf(m, {0.0}, 1, 0, 0); });
    }
}

TEST_CASE("tilde_p mixes per-action outcome laws", "[bellman]") {
    Model m = appendix_a_model();
    const ValueLayer zero(3, 0.0);

    SECTION("vertex weights reproduce the single-action law") {
        REQUIRE(tilde_p(m, zero, 1, 0, {1.0, 0.0}) == outcome_pmf(m, zero, 1, 0, 0));
        REQUIRE(tilde_p(m, zero, 1, 0, {0.0, 1.0}) == outcome_pmf(m, zero, 1, 0, 1));
    }
    SECTION("even mix of the two controls is the blended law") {
        const Pmf half = tilde_p(m, zero, 1, 0, {0.5, 0.5});
        REQUIRE(half == Pmf::from_atoms({{0.0, 0.7}, {1.4, 0.25}, {5.0, 0.05}}));
    }
    SECTION("uniform weights over identical actions change nothing") {
        Model dup = appendix_a_model();
        auto& actions = dup.layers[0].states[0].actions;
        actions[1] = actions[0];
        actions[1].name = "copy";
        REQUIRE(tilde_p(dup, zero, 1, 0, {0.5, 0.5}) ==
                outcome_pmf(dup, zero, 1, 0, 0));
    }
    SECTION("weight vector must match the admissible action count") {
        require_error("BadWeights", [&] { tilde_p(m, zero, 1, 0, {1.0}); });
        require_error("BadWeights", [&] { tilde_p(m, zero, 1, 0, {0.7, 0.7}); });
    }
    SECTION("mass 1 and support within b + gamma*||v||") {
        Rng rng(0x5eedbe11);
        for (int trial = 0; trial < 50; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 2);
            const ValueLayer v = random_layer(rng, 3);
            double vmax = 0.0;
            for (double x : v) vmax = std::max(vmax, std::abs(x));
            const ActionWeights w = random_weights(rng, 2);
            const Pmf p = tilde_p(rm, v, 1, 0, w);
            double mass = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) mass += p.prob(i);
            REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
            const double hull = rm.cost_bound + rm.gamma * vmax + 1e-12;
            REQUIRE(ess_sup(p) <= hull);
            REQUIRE(ess_inf(p) >= -hull);
        }
    }
}

TEST_CASE("g_op applies the state risk to the mixed law", "[bellman]") {
    Model m = appendix_a_model();
    const ValueLayer zero(3, 0.0);

    SECTION("pure control 0 on the robust two-scenario state scores 1.4") {
        REQUIRE(g_op(m, zero, 1, 0, {1.0, 0.0}) == Catch::Approx(1.4).margin(1e-9));
        REQUIRE(g_op(m, zero, 1, 0, {0.0, 1.0}) == Catch::Approx(1.4).margin(1e-9));
        REQUIRE(g_op(m, zero, 1, 0, {0.5, 0.5}) == Catch::Approx(1.2).margin(1e-9));
    }
    SECTION("constant shift moves the value by gamma*c") {
        Rng rng(0x5eedbe12);
        for (int trial = 0; trial < 40; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 2);
            const ValueLayer v = random_layer(rng, 3);
            const double c = rng.uniform(-2.0, 2.0);
            ValueLayer shifted = v;
            for (double& x : shifted) x += c;
            const ActionWeights w = random_weights(rng, 2);
            const double base = g_op(rm, v, 1, 1, w);
            REQUIRE(g_op(rm, shifted, 1, 1, w) ==
                    Catch::Approx(base + rm.gamma * c).margin(1e-10));
        }
    }
    SECTION("monotone in the value layer") {
        Rng rng(0x5eedbe13);
        for (int trial = 0; trial < 40; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 2);
            const ValueLayer v1 = random_layer(rng, 3);
            ValueLayer v2 = v1;
            for (double& x : v2) x += rng.uniform(0.0, 1.5);
            const ActionWeights w = random_weights(rng, 2);
            REQUIRE(g_op(rm, v1, 1, 2, w) <= g_op(rm, v2, 1, 2, w) + 1e-12);
        }
    }
    SECTION("gamma-contraction in the value layer") {
        Rng rng(0x5eedbe14);
        for (int trial = 0; trial < 60; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 2);
            const ValueLayer v1 = random_layer(rng, 3);
            const ValueLayer v2 = random_layer(rng, 3);
            const ActionWeights w = random_weights(rng, 2);
            const double lhs = std::abs(g_op(rm, v1, 1, 0, w) - g_op(rm, v2, 1, 0, w));
            REQUIRE(lhs <= rm.gamma * sup_diff(v1, v2) + 1e-10);
        }
    }
    SECTION("normalized risk bounds the value by b + gamma*||v||") {
        Rng rng(0x5eedbe15);
        for (int trial = 0; trial < 40; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 2, 2, Mode::kFinite, 1);
            const ValueLayer v = random_layer(rng, 2);
            double vmax = 0.0;
            for (double x : v) vmax = std::max(vmax, std::abs(x));
            const ActionWeights w = random_weights(rng, 2);
            REQUIRE(std::abs(g_op(rm, v, 1, 0, w)) <=
                    rm.cost_bound + rm.gamma * vmax + 1e-9);
        }
    }
}

TEST_CASE("h0 composes the outer risk with the initial law", "[bellman]") {
    SECTION("zero values under a normalized outer risk give zero") {
        Model m = appendix_a_model();
        REQUIRE(h0(m, {0.0, 0.0, 0.0}) == 0.0);
    }
    SECTION("Dirac initial reduces to gamma*v at the start state") {
        Model m = two_state_model(0.25, {{0, 1.0, 0.0}});
        REQUIRE(h0(m, {3.0, -9.0}) == Catch::Approx(0.25 * 3.0).margin(1e-12));
    }
    SECTION("even two-point initial with ess-sup outer risk picks the max") {
        Model m = two_state_model(1.0, {{0, 1.0, 0.0}});
        m.initial = Pmf::from_atoms({{0.0, 0.5}, {1.0, 0.5}});
        m.risk0 = RiskSpec::spectral(Pmf::dirac(0.0));
        REQUIRE(h0(m, {0.0, 2.0}) == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("gamma-contraction") {
        Rng rng(0x5eedbe16);
        for (int trial = 0; trial < 40; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 1);
            const ValueLayer v1 = random_layer(rng, 3);
            const ValueLayer v2 = random_layer(rng, 3);
            REQUIRE(std::abs(h0(rm, v1) - h0(rm, v2)) <=
                    rm.gamma * sup_diff(v1, v2) + 1e-10);
        }
    }
}

TEST_CASE("simplex_min minimizes over randomized actions", "[bellman]") {
    SECTION("single action short-circuits to its evaluation") {
        const Pmf mu = Pmf::from_atoms({{0.0, 0.5}, {2.0, 0.5}});
        const RiskSpec spec = RiskSpec::entropic(1.0);
        const SimplexResult r = simplex_min({mu}, spec);
        REQUIRE(r.lambda == ActionWeights{1.0});
        REQUIRE(r.value == evaluate(spec, mu));
    }
    SECTION("no actions") {
        require_error("NoActions",
                      [] { simplex_min({}, RiskSpec::mean_risk()); });
    }
    SECTION("mixing strictly beats both vertices on the robust two-scenario spec") {
        const std::vector<Pmf> pmfs = {testutil::appendix_a_c0(),
                                       testutil::appendix_a_c1()};
        const RiskSpec spec = testutil::appendix_a_spec();
        const SimplexResult r = simplex_min(pmfs, spec, SimplexMode::kAuto);
        REQUIRE(r.value <= 1.2 + 1e-6);
        REQUIRE(r.value < 1.4 - 1e-6);
        REQUIRE(r.lambda[0] > 0.0);
        REQUIRE(r.lambda[1] > 0.0);
        // The returned weights are rounded to the 1e-9 lattice.
        for (double w : r.lambda)
            REQUIRE(std::abs(w * 1e9 - std::round(w * 1e9)) <= 1e-3);
        // Vertex mode on the same instance stays at the pure controls.
        const SimplexResult rv = simplex_min(pmfs, spec, SimplexMode::kVertex);
        REQUIRE(rv.value == Catch::Approx(1.4).margin(1e-9));
        REQUIRE(r.value < rv.value - 1e-6);
    }
    SECTION("spectral specs are minimized at a vertex in auto mode") {
        Rng rng(0x5eedbe17);
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<Pmf> pmfs;
            const int n = rng.uniform_int(2, 4);
            for (int i = 0; i < n; ++i) pmfs.push_back(testutil::random_pmf(rng));
            const RiskSpec spec = RiskSpec::spectral(testutil::random_eta(rng));
            const SimplexResult r = simplex_min(pmfs, spec, SimplexMode::kAuto);
            int support = 0;
            double best_vertex = evaluate(spec, pmfs[0]);
            for (int i = 0; i < n; ++i) {
                if (r.lambda[static_cast<std::size_t>(i)] > 0.0) ++support;
                best_vertex = std::min(best_vertex, evaluate(spec, pmfs[static_cast<std::size_t>(i)]));
            }
            REQUIRE(support == 1);
            REQUIRE(r.value == best_vertex);
        }
    }
    SECTION("vertex ties break to the lowest action index") {
        const Pmf mu = Pmf::from_atoms({{0.0, 0.5}, {1.0, 0.5}});
        const SimplexResult r = simplex_min({mu, mu, mu}, RiskSpec::mean_risk());
        REQUIRE(r.lambda == ActionWeights{1.0, 0.0, 0.0});
    }
    SECTION("grid mode never lands above vertex mode by more than the refinement tolerance on quasiconcave specs") {
        Rng rng(0x5eedbe18);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Pmf> pmfs;
            const int n = rng.uniform_int(2, 3);
            for (int i = 0; i < n; ++i) pmfs.push_back(testutil::random_pmf(rng));
            const RiskSpec spec = RiskSpec::entropic(rng.uniform(0.3, 2.0));
            REQUIRE(is_mixture_quasiconcave(spec));
            const double vertex = simplex_min(pmfs, spec, SimplexMode::kVertex).value;
            const double grid = simplex_min(pmfs, spec, SimplexMode::kGrid).value;
            REQUIRE(vertex >= grid - 1e-6);
            REQUIRE(grid <= vertex + 1e-9);
        }
    }
}

TEST_CASE("s_op is the per-state infimum over the action simplex", "[bellman]") {
    SECTION("single admissible action equals g_op at that vertex") {
        Model m = two_state_model(0.5, {{0, 0.3, 1.0}, {1, 0.7, 2.0}});
        const ValueLayer v = {4.0, 0.0};
        const SopResult r = s_op(m, v, 1, 0);
        REQUIRE(r.lambda == ActionWeights{1.0});
        REQUIRE(r.value == g_op(m, v, 1, 0, {1.0}));
    }
    SECTION("dominates no randomized action") {
        Rng rng(0x5eedbe19);
        Model rm = random_model(0x5eedbe19, 3, 3, Mode::kFinite, 1);
        const ValueLayer v = random_layer(rng, 3);
        for (int x = 0; x < 3; ++x) {
            const SopResult r = s_op(rm, v, 1, x);
            for (int k = 0; k < 100; ++k) {
                const ActionWeights w = random_weights(rng, 3);
                REQUIRE(r.value <= g_op(rm, v, 1, x, w) + 1e-9);
            }
            REQUIRE(r.value <= g_op(rm, v, 1, x, r.lambda) + 1e-9);
        }
    }
    SECTION("appendix-a decision state mixes to reach the blended optimum") {
        Model m = appendix_a_model();
        const SopResult r = s_op(m, {0.0, 0.0, 0.0}, 1, 0);
        REQUIRE(r.value <= 1.2 + 1e-6);
    }
}

TEST_CASE("h_policy evaluates a fixed randomized policy layer", "[bellman]") {
    SECTION("argmin policy reproduces the s_op values") {
        Rng rng(0x5eedbe1a);
        Model rm = random_model(0x5eedbe1a, 4, 2, Mode::kFinite, 1);
        const ValueLayer v = random_layer(rng, 4);
        PolicyLayer pol;
        ValueLayer expect;
        for (int x = 0; x < 4; ++x) {
            SopResult r = s_op(rm, v, 1, x);
            pol.states.push_back(r.lambda);
            expect.push_back(r.value);
        }
        const ValueLayer got = h_policy(rm, v, 1, pol);
        for (int x = 0; x < 4; ++x)
            REQUIRE(got[static_cast<std::size_t>(x)] ==
                    Catch::Approx(expect[static_cast<std::size_t>(x)]).margin(1e-12));
    }
    SECTION("monotone and contracting in the value layer") {
        Rng rng(0x5eedbe1b);
        for (int trial = 0; trial < 25; ++trial) {
            Model rm = random_model(rng.uniform_int(1, 1 << 20), 3, 2, Mode::kFinite, 1);
            PolicyLayer pol;
            for (int x = 0; x < 3; ++x) pol.states.push_back(random_weights(rng, 2));
            const ValueLayer v1 = random_layer(rng, 3);
            ValueLayer v2 = v1;
            for (double& x : v2) x += rng.uniform(0.0, 1.0);
            const ValueLayer h1 = h_policy(rm, v1, 1, pol);
            const ValueLayer h2 = h_policy(rm, v2, 1, pol);
            for (int x = 0; x < 3; ++x)
                REQUIRE(h1[static_cast<std::size_t>(x)] <=
                        h2[static_cast<std::size_t>(x)] + 1e-12);
            const ValueLayer v3 = random_layer(rng, 3);
            const ValueLayer h3 = h_policy(rm, v3, 1, pol);
            REQUIRE(sup_diff(h1, h3) <= rm.gamma * sup_diff(v1, v3) + 1e-10);
        }
    }
    SECTION("policy layer must cover every state") {
        Model m = two_state_model(0.5, {{0, 1.0, 0.0}});
        PolicyLayer pol;
        pol.states.push_back({1.0});
        require_error("PolicyIncomplete",
                      [&] { h_policy(m, {0.0, 0.0}, 1, pol); });
    }
}
