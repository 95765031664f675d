// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT
//
// Limit-order-book liquidation as a finite risk-averse MDP.  States pair a
// book configuration with the remaining inventory; actions post ask volumes
// per price level; clearing happens against the entry-wise ceiling-averaged
// book between decision epochs, and the stage cost is the negated cash gain.

#ifndef RISKMDP_LOB_HPP
#define RISKMDP_LOB_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "riskmdp/error.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/pmf.hpp"
#include "riskmdp/risk.hpp"

namespace riskmdp {

/// A book is a vector of N_S + 1 integer volumes, one per price level
/// 0..N_S.  Negative entries are buy interest, positive entries are sell
/// interest.  Level 0 carries unbounded buy interest ("someone always takes
/// shares for free"), stored as a finite sentinel so all arithmetic stays in
/// 64-bit integers.
using Book = std::vector<std::int64_t>;

/// Sentinel for the unbounded buy interest at price 0.  Far larger than any
/// representable inventory, and still safe to add/halve in 64-bit.
constexpr std::int64_t kBookSentinel = -1000000000;

/// ceil(v / 2) in integer arithmetic, correct for negative v.
constexpr std::int64_t ceil_div2(std::int64_t v) {
    return v >= 0 ? (v + 1) / 2 : -((-v) / 2);
}

/// Checks the order-book shape: level 0 is the sentinel and no sell volume
/// sits below any buy volume (prices cross at a single point).
inline void validate_book(const Book& m) {
    if (m.size() < 2) fail("InvalidBook", "book needs at least two price levels");
    if (m[0] != kBookSentinel)
        fail("InvalidBook", "level 0 must carry the unbounded-buy sentinel");
    bool seen_ask = false;
    for (std::size_t s = 1; s < m.size(); ++s) {
        if (m[s] > 0) seen_ask = true;
        if (m[s] < 0 && seen_ask)
            fail("InvalidBook", "buy volume above sell volume at level " +
                                    std::to_string(s));
    }
}

/// Entry-wise ceiling of the average of two books (the mid-period book the
/// clearing acts on).
inline Book avg_book(const Book& m, const Book& m_next) {
    if (m.size() != m_next.size())
        fail("LengthMismatch", "books differ in price-level count");
    Book out(m.size());
    for (std::size_t s = 0; s < m.size(); ++s)
        out[s] = ceil_div2(m[s] + m_next[s]);
    return out;
}

/// Clears posted asks `a` against the averaged book.  Bids at higher prices
/// match first; the volume matched at bid level s is what remains of the
/// asks posted at prices <= s after all bids above s took their fill:
///
///   matched_s = 1{m̄^s < 0} · min(−m̄^s, (Σ_{r≤s} a^r + Σ_{r>s} min(m̄^r, 0))_+)
///
/// Returns (delta, gain) = (Σ_s matched_s, Σ_s s·matched_s).  Guarantees
/// 0 ≤ delta ≤ Σ a and gain ≤ N_S · delta.
inline std::pair<std::int64_t, std::int64_t> clear(const std::vector<std::int64_t>& a,
                                                   const Book& m_bar) {
    if (m_bar.empty()) fail("InvalidBook", "empty averaged book");
    if (a.size() != m_bar.size())
        fail("LengthMismatch", "ask vector and book differ in length");
    for (std::size_t s = 0; s < a.size(); ++s)
        if (a[s] < 0)
            fail("NegativeAsk", "ask volume at level " + std::to_string(s) +
                                    " is negative");
    const std::size_t n = m_bar.size();
    // bids_above[s] = total buy volume strictly above level s.
    std::vector<std::int64_t> bids_above(n, 0);
    for (std::size_t s = n - 1; s > 0; --s)
        bids_above[s - 1] = bids_above[s] + std::min(m_bar[s], std::int64_t{0});
    std::int64_t asks_upto = 0;
    std::int64_t delta = 0;
    std::int64_t gain = 0;
    for (std::size_t s = 0; s < n; ++s) {
        asks_upto += a[s];
        if (m_bar[s] >= 0) continue;
        const std::int64_t available = std::max<std::int64_t>(
            0, asks_upto + bids_above[s]); // bids_above is a sum of minima <= 0
        const std::int64_t matched = std::min(-m_bar[s], available);
        delta += matched;
        gain += static_cast<std::int64_t>(s) * matched;
    }
    return {delta, gain};
}

/// Exogenous Markov dynamics over a finite set of books.
struct BookDynamics {
    std::vector<Book> books;
    /// Per current book index: (next book index, probability) rows.
    std::vector<std::vector<std::pair<int, double>>> next;
    int initial = 0;
};

inline void validate_dynamics(const BookDynamics& dyn) {
    if (dyn.books.empty()) fail("InvalidBook", "dynamics carry no books");
    const std::size_t levels = dyn.books.front().size();
    for (const Book& b : dyn.books) {
        validate_book(b);
        if (b.size() != levels)
            fail("LengthMismatch", "all books must share the price-level count");
    }
    if (dyn.next.size() != dyn.books.size())
        fail("LengthMismatch", "one transition row per book required");
    for (std::size_t i = 0; i < dyn.next.size(); ++i) {
        double mass = 0.0;
        for (const auto& [j, p] : dyn.next[i]) {
            if (j < 0 || j >= static_cast<int>(dyn.books.size()))
                fail("ValidationError", "book transition index out of range");
            if (!(p >= 0.0))
                fail("NegativeProb", "book transition probability is negative");
            mass += p;
        }
        if (std::abs(mass - 1.0) > 1e-9)
            fail("MassNotOne", "book transition row " + std::to_string(i) +
                                   " sums to " + std::to_string(mass));
    }
    if (dyn.initial < 0 || dyn.initial >= static_cast<int>(dyn.books.size()))
        fail("ValidationError", "initial book index out of range");
}

/// Two-book stochastic dynamics used by the command-line example: book A
/// has one bid at price 1 and one ask at the top level; book B doubles both
/// volumes.  Transition matrix [[0.75, 0.25], [0.4, 0.6]], starting at A.
inline BookDynamics default_book_dynamics(int n_levels) {
    if (n_levels < 2) fail("BadArgs", "default dynamics need at least two price levels");
    Book a(static_cast<std::size_t>(n_levels) + 1, 0);
    Book b = a;
    a[0] = b[0] = kBookSentinel;
    a[1] = -1;
    a[static_cast<std::size_t>(n_levels)] = 1;
    b[1] = -2;
    b[static_cast<std::size_t>(n_levels)] = 2;
    BookDynamics dyn;
    dyn.books = {std::move(a), std::move(b)};
    dyn.next = {{{0, 0.75}, {1, 0.25}}, {{0, 0.4}, {1, 0.6}}};
    dyn.initial = 0;
    validate_dynamics(dyn);
    return dyn;
}

namespace lobdetail {

/// All nonnegative integer vectors of the given length with entry sum <= cap,
/// in lexicographic order.
inline std::vector<std::vector<std::int64_t>> ask_vectors(std::size_t length,
                                                          std::int64_t cap) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> cur(length, 0);
    while (true) {
        std::int64_t total = 0;
        for (std::int64_t v : cur) total += v;
        if (total <= cap) out.push_back(cur);
        // Odometer step with the first slot most significant.
        std::size_t k = length;
        while (k > 0) {
            --k;
            if (cur[k] < cap) {
                ++cur[k];
                for (std::size_t r = k + 1; r < length; ++r) cur[r] = 0;
                break;
            }
            if (k == 0) return out;
        }
    }
}

inline std::string pad_int(std::int64_t v, std::size_t width) {
    std::string digits = std::to_string(v);
    return std::string(width > digits.size() ? width - digits.size() : 0, '0') +
           digits;
}

} // namespace lobdetail

/// Builds the liquidation model: states = (book, inventory u <= u_0) pairs
/// laid out as index = book_index * (u_0 + 1) + u; actions enumerate ask
/// vectors with sum <= u except at t = T where the forced full-liquidation
/// action (u, 0, ..., 0) is the only choice.  The per-(t, u) risk blends an
/// entropic term (weight 1 - t/T) with a worst-of-two-scenario term (weight
/// t/T) whose spectral scenarios depend on the inventory fraction u / u_0;
/// passing a non-empty `scenario_override` replaces that inventory-dependent
/// set everywhere.  The time-0 risk is the pure entropic term, matching the
/// blend's t -> 0 limit.
inline Model build_liquidation(int n_levels, std::int64_t u0, int horizon,
                               const BookDynamics& dyn, double tau = 1.0,
                               const std::vector<KusuokaScenario>& scenario_override = {},
                               int max_states = 20000) {
    if (n_levels < 1 || u0 < 0 || horizon < 1)
        fail("BadArgs", "build_liquidation needs n_levels >= 1, u0 >= 0, T >= 1");
    validate_dynamics(dyn);
    if (dyn.books.front().size() != static_cast<std::size_t>(n_levels) + 1)
        fail("LengthMismatch", "dynamics books do not have n_levels + 1 entries");

    const int n_books = static_cast<int>(dyn.books.size());
    const std::int64_t n_states_raw =
        static_cast<std::int64_t>(n_books) * (u0 + 1);
    if (n_states_raw > max_states)
        fail("SizeOverflow", "liquidation model would need " +
                                 std::to_string(n_states_raw) + " states (cap " +
                                 std::to_string(max_states) + ")");
    const int n_states = static_cast<int>(n_states_raw);
    const auto state_of = [&](int book, std::int64_t u) {
        return book * static_cast<int>(u0 + 1) + static_cast<int>(u);
    };

    Model m;
    m.mode = Mode::kFinite;
    m.horizon = horizon;
    m.gamma = 1.0; // zero interest rate; legal because the model is finite
    m.cost_bound = static_cast<double>(n_levels) * static_cast<double>(u0);
    m.risk0 = RiskSpec::entropic(tau);

    const std::size_t u_width = std::to_string(u0).size();
    const std::size_t b_width = std::to_string(n_books - 1).size();
    for (int b = 0; b < n_books; ++b)
        for (std::int64_t u = 0; u <= u0; ++u)
            m.states.push_back("b" + lobdetail::pad_int(b, b_width) + "_u" +
                               lobdetail::pad_int(u, u_width));
    m.initial = Pmf::dirac(static_cast<double>(state_of(dyn.initial, u0)));

    const auto risk_for = [&](int t, std::int64_t u) {
        const double w = static_cast<double>(t) / static_cast<double>(horizon);
        std::vector<KusuokaScenario> scen = scenario_override;
        if (scen.empty()) {
            const double frac =
                u0 == 0 ? 0.0 : static_cast<double>(u) / static_cast<double>(u0);
            scen.push_back(
                {Pmf::from_atoms({{1.0, 0.5}, {0.5 * frac, 0.5}}), 0.0});
            scen.push_back({Pmf::dirac(frac), 0.0});
        }
        return RiskSpec::combo({{1.0 - w, RiskSpec::entropic(tau)},
                                {w, RiskSpec::kusuoka(std::move(scen))}});
    };

    // The ask enumeration walks the whole (u0+1)^(n_levels+1) box before
    // filtering by total volume; refuse inputs where that walk is excessive.
    double enum_cost = 1.0;
    for (int s = 0; s <= n_levels; ++s) enum_cost *= static_cast<double>(u0 + 1);
    if (enum_cost > 2e6)
        fail("SizeOverflow", "per-state action enumeration too large");

    for (int t = 1; t <= horizon; ++t) {
        Layer layer;
        layer.states.resize(static_cast<std::size_t>(n_states));
        for (int b = 0; b < n_books; ++b) {
            for (std::int64_t u = 0; u <= u0; ++u) {
                StateLayer sl;
                sl.risk = risk_for(t, u);
                std::vector<std::vector<std::int64_t>> asks;
                if (t == horizon) {
                    std::vector<std::int64_t> forced(
                        static_cast<std::size_t>(n_levels) + 1, 0);
                    forced[0] = u;
                    asks.push_back(std::move(forced));
                } else {
                    asks = lobdetail::ask_vectors(
                        static_cast<std::size_t>(n_levels) + 1, u);
                }
                for (const auto& a : asks) {
                    ActionEntry ae;
                    ae.name = "a";
                    for (std::size_t s = 0; s < a.size(); ++s)
                        ae.name += (s ? "_" : "") + lobdetail::pad_int(a[s], u_width);
                    for (const auto& [b_next, prob] : dyn.next[static_cast<std::size_t>(b)]) {
                        const Book mid = avg_book(
                            dyn.books[static_cast<std::size_t>(b)],
                            dyn.books[static_cast<std::size_t>(b_next)]);
                        const auto [delta, gain] = clear(a, mid);
                        const std::int64_t u_next = u - delta;
                        ae.transitions.push_back({state_of(b_next, u_next), prob,
                                                  static_cast<double>(-gain)});
                    }
                    // Identical successor books merge their probability mass.
                    std::sort(ae.transitions.begin(), ae.transitions.end(),
                              [](const Transition& l, const Transition& r) {
                                  return l.next < r.next;
                              });
                    std::vector<Transition> merged;
                    for (const Transition& tr : ae.transitions) {
                        if (!merged.empty() && merged.back().next == tr.next)
                            merged.back().prob += tr.prob;
                        else
                            merged.push_back(tr);
                    }
                    ae.transitions = std::move(merged);
                    sl.actions.push_back(std::move(ae));
                }
                layer.states[static_cast<std::size_t>(state_of(b, u))] =
                    std::move(sl);
            }
        }
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

} // namespace riskmdp

#endif // RISKMDP_LOB_HPP
