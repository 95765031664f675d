// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT

#ifndef RISKMDP_PMF_HPP
#define RISKMDP_PMF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/error.hpp"

namespace riskmdp {

/// Absolute tolerance below which two atom values are merged on construction.
/// Far below any cost scale of interest; prevents floating-point atom
/// explosion across repeated Bellman sweeps.
inline constexpr double kAtomMergeTol = 1e-12;

/// Tolerance on |sum(prob) - 1| accepted at construction; the mass is then
/// renormalized by exact division.  Larger deviations are errors.
inline constexpr double kMassTol = 1e-9;

/// Atoms with probability below this are pruned after a mixture or
/// pushforward; bounds atom-count growth in deep recursions.
inline constexpr double kMixPruneTol = 1e-15;

/// Finitely supported probability distribution on the real line (a law in
/// \f$\mathcal P_b(\mathbb R)\f$ with finite support).
///
/// Invariants: support values are strictly increasing, probabilities are
/// positive and sum to 1 (renormalized by exact division on construction).
/// Instances are immutable; every operation is a pure function returning a
/// new Pmf, so values are safe to share across threads.
class Pmf {
public:
    /// Builds a Pmf from unsorted (value, prob) pairs.
    ///
    /// Values within kAtomMergeTol of the first value of their merge run are
    /// combined by summing probabilities (the run's smallest value is kept).
    /// Zero-probability atoms are dropped, as are atoms below `prune_tol`
    /// (used by mixtures/pushforwards with kMixPruneTol).  Probabilities are
    /// then renormalized to sum to 1.
    ///
    /// Throws NegativeProb, MassNotOne (|sum-1| > 1e-9), EmptySupport, or
    /// BadArgs (non-finite input).
    static Pmf from_atoms(std::vector<std::pair<double, double>> atoms,
                          double prune_tol = 0.0) {
        if (atoms.empty()) fail("EmptySupport", "no atoms given");
        double total = 0.0;
        for (const auto& [v, p] : atoms) {
            if (!std::isfinite(v) || !std::isfinite(p))
                fail("BadArgs", "non-finite atom value or probability");
            if (p < 0.0)
                fail("NegativeProb",
                     "atom probability " + std::to_string(p) + " is negative");
            total += p;
        }
        if (std::abs(total - 1.0) > kMassTol)
            fail("MassNotOne",
                 "probabilities sum to " + std::to_string(total) +
                     ", more than 1e-9 away from 1");
        std::sort(atoms.begin(), atoms.end());

        Pmf out;
        for (const auto& [v, p] : atoms) {
            if (!out.vals_.empty() && v - out.vals_.back() <= kAtomMergeTol) {
                out.probs_.back() += p; // merge into the current run
            } else {
                out.vals_.push_back(v);
                out.probs_.push_back(p);
            }
        }
        // Drop zero-mass atoms and (for mixtures) sub-prune_tol dust.
        std::size_t kept = 0;
        for (std::size_t i = 0; i < out.vals_.size(); ++i) {
            if (out.probs_[i] == 0.0 || out.probs_[i] < prune_tol) continue;
            out.vals_[kept] = out.vals_[i];
            out.probs_[kept] = out.probs_[i];
            ++kept;
        }
        out.vals_.resize(kept);
        out.probs_.resize(kept);
        if (out.vals_.empty()) fail("EmptySupport", "all atoms had zero probability");

        double mass = 0.0;
        for (double p : out.probs_) mass += p;
        for (double& p : out.probs_) p /= mass;
        // Force the (ascending-order) sum to exactly 1.0 by absorbing the
        // leftover rounding into the heaviest atom.  This makes construction
        // idempotent, so serialized probabilities survive a parse unchanged.
        for (int pass = 0; pass < 8; ++pass) {
            double s = 0.0;
            for (double p : out.probs_) s += p;
            if (s == 1.0) break;
            std::size_t heaviest = 0;
            for (std::size_t i = 1; i < out.probs_.size(); ++i)
                if (out.probs_[i] > out.probs_[heaviest]) heaviest = i;
            out.probs_[heaviest] += 1.0 - s;
        }
        return out;
    }

    /// Point mass at `v`.
    static Pmf dirac(double v) { return from_atoms({{v, 1.0}}); }

    std::size_t size() const { return vals_.size(); }
    double value(std::size_t i) const { return vals_[i]; }
    double prob(std::size_t i) const { return probs_[i]; }
    const std::vector<double>& values() const { return vals_; }
    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const Pmf& other) const {
        return vals_ == other.vals_ && probs_ == other.probs_;
    }

private:
    Pmf() = default;
    std::vector<double> vals_;
    std::vector<double> probs_;
};

/// Translation by `c`: the law of Z + c (convolution with a point mass).
inline Pmf shift(const Pmf& mu, double c) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        atoms.emplace_back(mu.value(i) + c, mu.prob(i));
    return Pmf::from_atoms(std::move(atoms));
}

/// Scaling by `gamma >= 0`: the law of gamma * Z.  gamma = 0 collapses to a
/// point mass at 0.  Throws NegativeScale for gamma < 0.
inline Pmf scale(const Pmf& mu, double gamma) {
    if (gamma < 0.0) fail("NegativeScale", "scale factor must be >= 0");
    if (gamma == 0.0) return Pmf::dirac(0.0);
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        atoms.emplace_back(mu.value(i) * gamma, mu.prob(i));
    return Pmf::from_atoms(std::move(atoms));
}

/// The weights-mixture of the given laws.  Weights must be nonnegative and
/// sum to 1 within 1e-9 (BadWeights); the lists must have equal length
/// (LengthMismatch).  Atoms with mixed probability below kMixPruneTol are
/// pruned and the mass renormalized.
inline Pmf mix(const std::vector<double>& weights, const std::vector<Pmf>& mus) {
    if (weights.size() != mus.size())
        fail("LengthMismatch", "got " + std::to_string(weights.size()) +
                                   " weights for " + std::to_string(mus.size()) +
                                   " distributions");
    if (weights.empty()) fail("LengthMismatch", "empty mixture");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            fail("BadWeights", "mixture weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kMassTol)
        fail("BadWeights", "mixture weights sum to " + std::to_string(total));
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t k = 0; k < mus.size(); ++k) {
        if (weights[k] == 0.0) continue;
        for (std::size_t i = 0; i < mus[k].size(); ++i)
            atoms.emplace_back(mus[k].value(i), weights[k] * mus[k].prob(i));
    }
    return Pmf::from_atoms(std::move(atoms), kMixPruneTol);
}

/// Right-continuous CDF: P(Z <= r).
inline double cdf(const Pmf& mu, double r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size() && mu.value(i) <= r; ++i)
        acc += mu.prob(i);
    // Renormalized probabilities can sum to 1 + 1ulp; a CDF never exceeds 1.
    return std::min(acc, 1.0);
}

/// Left-continuous generalized inverse of the CDF:
/// inf { r : F(r) >= u } for u in (0, 1].  Throws BadLevel otherwise.
inline double quantile(const Pmf& mu, double u) {
    if (!(u > 0.0) || u > 1.0)
        fail("BadLevel", "quantile level must lie in (0,1], got " + std::to_string(u));
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        acc += mu.prob(i);
        if (acc >= u) return mu.value(i);
    }
    // Accumulated mass can fall a few ulp short of 1; the top atom is the
    // quantile for every remaining level.
    return mu.value(mu.size() - 1);
}

/// Expected value.
inline double mean(const Pmf& mu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) acc += mu.value(i) * mu.prob(i);
    return acc;
}

/// Largest support value.
inline double ess_sup(const Pmf& mu) { return mu.value(mu.size() - 1); }

/// Smallest support value.
inline double ess_inf(const Pmf& mu) { return mu.value(0); }

/// First-order stochastic dominance for cost laws: true iff
/// cdf(mu, r) >= cdf(nu, r) at every r (checked on the union support, which
/// suffices for step functions).  A dominating law is stochastically
/// *smaller* — it is the less risky cost distribution.
inline bool fosd_dominates(const Pmf& mu, const Pmf& nu) {
    // Walk the union support with two cursors, comparing partial sums.  The
    // 1e-12 slack absorbs rounding differences between the two partial-sum
    // accumulations.
    std::size_t i = 0, j = 0;
    double fmu = 0.0, fnu = 0.0;
    while (i < mu.size() || j < nu.size()) {
        double r;
        if (j >= nu.size() || (i < mu.size() && mu.value(i) <= nu.value(j)))
            r = mu.value(i);
        else
            r = nu.value(j);
        while (i < mu.size() && mu.value(i) <= r) fmu += mu.prob(i++);
        while (j < nu.size() && nu.value(j) <= r) fnu += nu.prob(j++);
        if (fmu < fnu - 1e-12) return false;
    }
    return true;
}

} // namespace riskmdp

#endif // RISKMDP_PMF_HPP
