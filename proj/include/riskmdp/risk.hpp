// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT

#ifndef RISKMDP_RISK_HPP
#define RISKMDP_RISK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "riskmdp/error.hpp"
#include "riskmdp/pmf.hpp"

namespace riskmdp {

/// Average value-at-risk of a cost law at level kappa in [0,1]:
/// the mean of the worst kappa-fraction upper tail,
///   avar(kappa, mu) = inf_q { q + kappa^{-1} E (Z - q)_+ },
/// computed exactly for discrete laws by the sorted upper-tail average with
/// fractional splitting of the atom straddling cumulative mass kappa.
/// kappa = 1 is the mean and kappa = 0 the essential supremum, both returned
/// through the identical arithmetic paths of mean()/ess_sup() so the
/// boundary identities hold exactly.
inline double avar(double kappa, const Pmf& mu) {
    if (!(kappa >= 0.0) || kappa > 1.0)
        fail("BadLevel", "avar level must lie in [0,1], got " + std::to_string(kappa));
    if (kappa == 0.0) return ess_sup(mu);
    if (kappa == 1.0) return mean(mu);
    double remaining = kappa;
    double acc = 0.0;
    for (std::size_t k = mu.size(); k-- > 0;) {
        const double take = std::min(mu.prob(k), remaining);
        acc += take * mu.value(k);
        remaining -= take;
        if (remaining <= 0.0) break;
    }
    return acc / kappa;
}

/// Entropic risk  tau^{-1} log E exp(tau Z), evaluated with max-atom
/// factoring so the exponentials never overflow.  Laws whose range exceeds
/// 700/tau are rejected (Overflow) instead of silently returning infinity.
inline double entropic(double tau, const Pmf& mu) {
    if (!(tau > 0.0)) fail("BadTau", "entropic tau must be > 0");
    const double top = ess_sup(mu);
    if (tau * (top - ess_inf(mu)) > 700.0)
        fail("Overflow", "tau * support range exceeds 700; entropic value would overflow");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += mu.prob(i) * std::exp(tau * (mu.value(i) - top));
    return top + std::log(s) / tau;
}

namespace detail {
inline void check_eta(const Pmf& eta, const char* what) {
    if (ess_inf(eta) < 0.0 || ess_sup(eta) > 1.0)
        fail("BadEta", std::string(what) + " support must lie in [0,1]");
}
} // namespace detail

/// Spectral risk: the eta-mixture of AVaR levels,
///   spectral(eta, mu) = sum_j eta_j * avar(kappa_j, mu),
/// where eta is a Pmf on [0,1].
inline double spectral(const Pmf& eta, const Pmf& mu) {
    detail::check_eta(eta, "spectral eta");
    double acc = 0.0;
    for (std::size_t j = 0; j < eta.size(); ++j)
        acc += eta.prob(j) * avar(eta.value(j), mu);
    return acc;
}

/// One scenario of a Kusuoka-type risk measure: a spectral mixing measure
/// eta (Pmf on [0,1]) and a penalty beta >= 0.
struct KusuokaScenario {
    Pmf eta;
    double beta = 0.0;
};

/// Kusuoka-type risk: the penalized supremum over finitely many scenarios,
///   kusuoka(scenarios, mu) = max_k { spectral(eta_k, mu) - beta_k }.
inline double kusuoka(const std::vector<KusuokaScenario>& scenarios, const Pmf& mu) {
    if (scenarios.empty()) fail("EmptyScenarios", "kusuoka needs at least one scenario");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& sc : scenarios)
        best = std::max(best, spectral(sc.eta, mu) - sc.beta);
    return best;
}

class RiskSpec;

/// One term of a convex combination of risk measures.
struct ComboTerm;

enum class RiskKind { Entropic, Spectral, Kusuoka, Combo };

/// Immutable description of a distributional convex risk measure:
/// Entropic(tau), Spectral(eta), Kusuoka(scenarios), or Combo (a convex
/// combination of other specs).  Construction validates all parameters, so
/// a RiskSpec in hand is always evaluable.
class RiskSpec {
public:
    struct Entropic {
        double tau;
    };
    struct Spectral {
        Pmf eta;
    };
    struct Kusuoka {
        std::vector<KusuokaScenario> scenarios;
    };
    struct Combo {
        std::vector<ComboTerm> terms;
    };

    static RiskSpec entropic(double tau) {
        if (!(tau > 0.0)) fail("BadTau", "entropic tau must be > 0");
        return RiskSpec(Entropic{tau});
    }

    static RiskSpec spectral(Pmf eta) {
        detail::check_eta(eta, "spectral eta");
        return RiskSpec(Spectral{std::move(eta)});
    }

    static RiskSpec kusuoka(std::vector<KusuokaScenario> scenarios) {
        if (scenarios.empty()) fail("EmptyScenarios", "kusuoka needs at least one scenario");
        for (const auto& sc : scenarios) {
            detail::check_eta(sc.eta, "kusuoka scenario eta");
            if (!(sc.beta >= 0.0) || !std::isfinite(sc.beta))
                fail("ValidationError", "kusuoka beta must be a finite real >= 0");
        }
        return RiskSpec(Kusuoka{std::move(scenarios)});
    }

    static RiskSpec combo(std::vector<ComboTerm> terms);

    /// Convenience: the mean, encoded as Spectral(Dirac(1)).
    static RiskSpec mean_risk() { return spectral(Pmf::dirac(1.0)); }

    RiskKind kind() const { return static_cast<RiskKind>(v_.index()); }

    const Entropic& as_entropic() const { return std::get<Entropic>(v_); }
    const Spectral& as_spectral() const { return std::get<Spectral>(v_); }
    const Kusuoka& as_kusuoka() const { return std::get<Kusuoka>(v_); }
    const Combo& as_combo() const { return std::get<Combo>(v_); }

private:
    template <typename T>
    explicit RiskSpec(T&& alt) : v_(std::forward<T>(alt)) {}

    std::variant<Entropic, Spectral, Kusuoka, Combo> v_;
};

struct ComboTerm {
    double weight;
    RiskSpec spec;
};

inline RiskSpec RiskSpec::combo(std::vector<ComboTerm> terms) {
    if (terms.empty()) fail("BadWeights", "combo needs at least one term");
    double total = 0.0;
    for (const auto& t : terms) {
        if (!std::isfinite(t.weight) || t.weight < 0.0)
            fail("BadWeights", "combo weights must be nonnegative");
        total += t.weight;
    }
    if (std::abs(total - 1.0) > kMassTol)
        fail("BadWeights", "combo weights sum to " + std::to_string(total));
    return RiskSpec(Combo{std::move(terms)});
}

/// Evaluates the risk measure described by `spec` on the law `mu`.
inline double evaluate(const RiskSpec& spec, const Pmf& mu) {
    switch (spec.kind()) {
    case RiskKind::Entropic:
        return entropic(spec.as_entropic().tau, mu);
    case RiskKind::Spectral:
        return spectral(spec.as_spectral().eta, mu);
    case RiskKind::Kusuoka:
        return kusuoka(spec.as_kusuoka().scenarios, mu);
    case RiskKind::Combo: {
        double acc = 0.0;
        for (const auto& t : spec.as_combo().terms)
            if (t.weight > 0.0) acc += t.weight * evaluate(t.spec, mu);
        return acc;
    }
    }
    fail("BadArgs", "corrupt RiskSpec");
}

/// True iff the measure is normalized (sigma(delta_0) = 0): Entropic and
/// Spectral always are; Kusuoka iff its smallest penalty is 0; Combo iff
/// every term that carries weight is normalized.  The flag always equals
/// evaluate(spec, Dirac(0)) == 0.
inline bool is_normalized(const RiskSpec& spec) {
    switch (spec.kind()) {
    case RiskKind::Entropic:
    case RiskKind::Spectral:
        return true;
    case RiskKind::Kusuoka: {
        double min_beta = std::numeric_limits<double>::infinity();
        for (const auto& sc : spec.as_kusuoka().scenarios)
            min_beta = std::min(min_beta, sc.beta);
        return min_beta == 0.0;
    }
    case RiskKind::Combo:
        for (const auto& t : spec.as_combo().terms)
            if (t.weight > 0.0 && !is_normalized(t.spec)) return false;
        return true;
    }
    fail("BadArgs", "corrupt RiskSpec");
}

/// Conservative static test of sigma(theta*mu1 + (1-theta)*mu2) >=
/// min(sigma(mu1), sigma(mu2)): true for Entropic, Spectral, and
/// single-scenario Kusuoka; false for multi-scenario Kusuoka (mixing can
/// strictly improve a penalized supremum) and — conservatively — for every
/// Combo.  Used only to enable the vertex shortcut in the simplex
/// optimizer; it never changes returned values.
inline bool is_mixture_quasiconcave(const RiskSpec& spec) {
    switch (spec.kind()) {
    case RiskKind::Entropic:
    case RiskKind::Spectral:
        return true;
    case RiskKind::Kusuoka:
        return spec.as_kusuoka().scenarios.size() == 1;
    case RiskKind::Combo:
        return false;
    }
    fail("BadArgs", "corrupt RiskSpec");
}

} // namespace riskmdp

#endif // RISKMDP_RISK_HPP
