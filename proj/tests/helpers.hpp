// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Shared deterministic generators for the property tests.  All randomness
// flows through an explicitly seeded engine with hand-rolled uniform
// mappings, so every test run sees bit-identical inputs.

#ifndef RISKMDP_TESTS_HELPERS_HPP
#define RISKMDP_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace testutil {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

inline riskmdp::Pmf random_pmf(Rng& rng, int max_atoms = 6, double lo = -5.0,
                               double hi = 5.0) {
    const int n = rng.uniform_int(1, max_atoms);
    std::vector<std::pair<double, double>> atoms;
    double total = 0.0;
    std::vector<double> raw(n);
    for (int i = 0; i < n; ++i) {
        raw[i] = rng.uniform(0.05, 1.0);
        total += raw[i];
    }
    for (int i = 0; i < n; ++i)
        atoms.emplace_back(rng.uniform(lo, hi), raw[i] / total);
    return riskmdp::Pmf::from_atoms(std::move(atoms));
}

/// Random eta distribution on [0, 1] for spectral/Kusuoka specs.
inline riskmdp::Pmf random_eta(Rng& rng, int max_atoms = 3) {
    const int n = rng.uniform_int(1, max_atoms);
    std::vector<std::pair<double, double>> atoms;
    double total = 0.0;
    std::vector<double> raw(n);
    for (int i = 0; i < n; ++i) {
        raw[i] = rng.uniform(0.05, 1.0);
        total += raw[i];
    }
    for (int i = 0; i < n; ++i) {
        double kappa = rng.uniform();
        // Hit the boundary levels sometimes: they are the special cases.
        if (kappa < 0.1)
            kappa = 0.0;
        else if (kappa > 0.9)
            kappa = 1.0;
        atoms.emplace_back(kappa, raw[i] / total);
    }
    return riskmdp::Pmf::from_atoms(std::move(atoms));
}

/// Random risk spec covering every kind.  With normalized_only, Kusuoka
/// penalties include an exact zero so the spec stays normalized.
inline riskmdp::RiskSpec random_spec(Rng& rng, bool normalized_only = false,
                                     int depth = 0) {
    using riskmdp::RiskSpec;
    const int kind = rng.uniform_int(0, depth == 0 ? 3 : 2);
    switch (kind) {
    case 0:
        return RiskSpec::entropic(rng.uniform(0.2, 3.0));
    case 1:
        return RiskSpec::spectral(random_eta(rng));
    case 2: {
        const int n = rng.uniform_int(1, 3);
        std::vector<riskmdp::KusuokaScenario> scen;
        for (int k = 0; k < n; ++k) {
            double beta = rng.uniform(0.0, 0.5);
            if (normalized_only && k == 0) beta = 0.0;
            if (!normalized_only && rng.uniform() < 0.3) beta = 0.0;
            scen.push_back({random_eta(rng), beta});
        }
        return RiskSpec::kusuoka(std::move(scen));
    }
    default: {
        const int n = rng.uniform_int(2, 3);
        std::vector<double> w(n);
        double total = 0.0;
        for (double& x : w) {
            x = rng.uniform(0.1, 1.0);
            total += x;
        }
        std::vector<riskmdp::ComboTerm> terms;
        for (int k = 0; k < n; ++k)
            terms.push_back({w[k] / total, random_spec(rng, normalized_only, depth + 1)});
        return RiskSpec::combo(std::move(terms));
    }
    }
}

/// Independent AVaR oracle: minimizes q + kappa^{-1} E(Z-q)_+ over a dense
/// q grid on the support hull augmented with the atom values (the true
/// minimizer is always an atom, so including them makes the oracle exact).
inline double avar_qgrid(double kappa, const riskmdp::Pmf& mu, int grid_n = 2001) {
    if (kappa == 0.0) return riskmdp::ess_sup(mu);
    std::vector<double> qs(mu.values());
    const double lo = riskmdp::ess_inf(mu);
    const double hi = riskmdp::ess_sup(mu);
    for (int i = 0; i < grid_n; ++i)
        qs.push_back(lo + (hi - lo) * i / (grid_n - 1.0));
    double best = std::numeric_limits<double>::infinity();
    for (double q : qs) {
        double tail = 0.0;
        for (std::size_t k = 0; k < mu.size(); ++k)
            tail += mu.prob(k) * std::max(mu.value(k) - q, 0.0);
        best = std::min(best, q + tail / kappa);
    }
    return best;
}

/// The Appendix-A robust risk measure
///   rho(Z) = max{ 0.8 E(Z) + 0.2 avar_0.1(Z), avar_0.5(Z) }
/// and the two one-step cost laws it is applied to.
inline riskmdp::RiskSpec appendix_a_spec() {
    using riskmdp::Pmf;
    std::vector<riskmdp::KusuokaScenario> scen;
    scen.push_back({Pmf::from_atoms({{1.0, 0.8}, {0.1, 0.2}}), 0.0});
    scen.push_back({Pmf::dirac(0.5), 0.0});
    return riskmdp::RiskSpec::kusuoka(std::move(scen));
}

inline riskmdp::Pmf appendix_a_c0() {
    return riskmdp::Pmf::from_atoms({{0.0, 0.9}, {5.0, 0.1}});
}

inline riskmdp::Pmf appendix_a_c1() {
    return riskmdp::Pmf::from_atoms({{0.0, 0.5}, {1.4, 0.5}});
}

} // namespace testutil

#endif // RISKMDP_TESTS_HELPERS_HPP
