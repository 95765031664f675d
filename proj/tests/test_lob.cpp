// Copyright (c) 2026 the riskmdp authors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "riskmdp/json_io.hpp"
#include "riskmdp/lob.hpp"

using riskmdp::Book;
using riskmdp::BookDynamics;
using riskmdp::build_liquidation;
using riskmdp::clear;
using riskmdp::Error;
using riskmdp::kBookSentinel;
using riskmdp::Model;
using testutil::Rng;

namespace {

template <typename Fn>
void require_error(const char* kind, Fn&& fn) {
    try {
        fn();
        FAIL("expected error of kind " << kind);
    } catch (const Error& e) {
        REQUIRE(e.kind() == kind);
    }
}

/// Literal re-computation of the clearing formula with naive inner sums.
std::pair<std::int64_t, std::int64_t> clear_oracle(const std::vector<std::int64_t>& a,
                                                   const Book& m) {
    std::int64_t delta = 0;
    std::int64_t gain = 0;
    for (std::size_t s = 0; s < m.size(); ++s) {
        if (m[s] >= 0) continue;
        std::int64_t asks = 0;
        for (std::size_t r = 0; r <= s; ++r) asks += a[r];
        std::int64_t bids_above = 0;
        for (std::size_t r = s + 1; r < m.size(); ++r)
            bids_above += std::min(m[r], std::int64_t{0});
        const std::int64_t avail = std::max<std::int64_t>(0, asks + bids_above);
        const std::int64_t matched = std::min(-m[s], avail);
        delta += matched;
        gain += static_cast<std::int64_t>(s) * matched;
    }
    return {delta, gain};
}

Book random_valid_book(Rng& rng, std::size_t levels) {
    Book b(levels, 0);
    b[0] = kBookSentinel;
    const std::size_t crossing = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<int>(levels)));
    for (std::size_t s = 1; s < levels; ++s) {
        if (s < crossing)
            b[s] = -rng.uniform_int(0, 5);
        else
            b[s] = rng.uniform_int(0, 5);
    }
    return b;
}

/// Inventory level encoded in the builder's state layout.
std::int64_t inventory_of(int state_index, std::int64_t u0) {
    return state_index % static_cast<int>(u0 + 1);
}

} // namespace

TEST_CASE("integer helpers round as specified", "[lob]") {
    CHECK(riskmdp::ceil_div2(0) == 0);
    CHECK(riskmdp::ceil_div2(3) == 2);
    CHECK(riskmdp::ceil_div2(4) == 2);
    CHECK(riskmdp::ceil_div2(-3) == -1);
    CHECK(riskmdp::ceil_div2(-4) == -2);

    const Book m = {kBookSentinel, -3, 2};
    const Book n = {kBookSentinel, -2, 1};
    const Book mid = riskmdp::avg_book(m, n);
    CHECK(mid == Book{kBookSentinel, -2, 2}); // ceil(-2.5) = -2, ceil(1.5) = 2
}

TEST_CASE("book validation", "[lob]") {
    riskmdp::validate_book({kBookSentinel, -1, 0, 2});
    riskmdp::validate_book({kBookSentinel, 0, 0});
    require_error("InvalidBook", [] { riskmdp::validate_book({kBookSentinel}); });
    require_error("InvalidBook", [] { riskmdp::validate_book({0, -1, 1}); });
    // Sell volume below buy volume breaks the single-crossing shape.
    require_error("InvalidBook", [] { riskmdp::validate_book({kBookSentinel, 2, -1}); });
}

TEST_CASE("clearing basics", "[lob]") {
    const Book mid = {kBookSentinel, -4, 0, 3};

    // No asks posted: nothing clears.
    CHECK(clear({0, 0, 0, 0}, mid) == std::pair<std::int64_t, std::int64_t>{0, 0});

    // Buy interest >= u at price 1 absorbs a full liquidation at that price.
    const auto [delta, gain] = clear({0, 3, 0, 0}, mid);
    CHECK(delta == 3);
    CHECK(gain == 3); // 3 units at price 1

    // The sentinel takes whatever higher-price bids leave over.
    const auto [d2, g2] = clear({6, 0, 0, 0}, mid);
    CHECK(d2 == 6);
    CHECK(g2 == 4); // 4 units at price 1, 2 at price 0

    require_error("NegativeAsk", [&] { (void)clear({0, -1, 0, 0}, mid); });
    require_error("LengthMismatch", [&] { (void)clear({0, 0}, mid); });
    require_error("InvalidBook", [] { (void)clear({}, Book{}); });
}

TEST_CASE("clearing matches the literal-summation oracle", "[lob]") {
    Rng rng(0x10b0001);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t levels =
            static_cast<std::size_t>(rng.uniform_int(2, 5));
        Book m = random_valid_book(rng, levels);
        Book m2 = random_valid_book(rng, levels);
        const Book mid = riskmdp::avg_book(m, m2);
        std::vector<std::int64_t> a(levels, 0);
        std::int64_t posted = 0;
        for (std::size_t s = 0; s < levels; ++s) {
            a[s] = rng.uniform_int(0, 4);
            posted += a[s];
        }
        const auto [delta, gain] = clear(a, mid);
        const auto [od, og] = clear_oracle(a, mid);
        CHECK(delta == od);
        CHECK(gain == og);
        CHECK(delta >= 0);
        CHECK(delta <= posted);
        CHECK(gain >= 0);
        CHECK(gain <= static_cast<std::int64_t>(levels - 1) * delta);
    }
}

TEST_CASE("default dynamics are valid", "[lob]") {
    const BookDynamics dyn = riskmdp::default_book_dynamics(2);
    REQUIRE(dyn.books.size() == 2);
    CHECK(dyn.books[0] == Book{kBookSentinel, -1, 1});
    CHECK(dyn.books[1] == Book{kBookSentinel, -2, 2});
    require_error("BadArgs", [] { (void)riskmdp::default_book_dynamics(1); });
}

TEST_CASE("liquidation model shape", "[lob]") {
    // Deterministic single book: two price levels, one bid at 1, ask at 2.
    BookDynamics dyn;
    dyn.books = {{kBookSentinel, -1, 1}};
    dyn.next = {{{0, 1.0}}};
    dyn.initial = 0;
    const Model m = build_liquidation(2, 1, 2, dyn);

    CHECK(m.horizon == 2);
    CHECK(m.gamma == 1.0);
    CHECK(m.n_states() == 2); // one book x inventory {0, 1}
    CHECK(m.cost_bound == 2.0);

    // t < T: all ask vectors with total <= u; t = T: the forced liquidation.
    CHECK(m.n_actions(1, 1) == 4); // (0,0,0) (0,0,1) (0,1,0) (1,0,0)
    CHECK(m.n_actions(1, 0) == 1);
    CHECK(m.n_actions(2, 1) == 1);
    CHECK(m.action(2, 1, 0).name == "a1_0_0");

    // Zero inventory: nothing to sell, so every stage cost is zero.
    for (int t = 1; t <= 2; ++t)
        for (const auto& ae : m.state_layer(t, 0).actions)
            for (const auto& tr : ae.transitions) CHECK(tr.cost == 0.0);
}

TEST_CASE("inventory never increases and hits zero after the last step", "[lob]") {
    const BookDynamics dyn = riskmdp::default_book_dynamics(2);
    const std::int64_t u0 = 2;
    const Model m = build_liquidation(2, u0, 3, dyn);
    for (int t = 1; t <= m.horizon; ++t) {
        for (int x = 0; x < m.n_states(); ++x) {
            const std::int64_t u = inventory_of(x, u0);
            for (const auto& ae : m.state_layer(t, x).actions) {
                for (const auto& tr : ae.transitions) {
                    const std::int64_t u_next = inventory_of(tr.next, u0);
                    CHECK(u_next <= u);
                    if (t == m.horizon) CHECK(u_next == 0);
                }
            }
        }
    }
}

TEST_CASE("liquidation risks blend entropic and scenario terms", "[lob]") {
    const BookDynamics dyn = riskmdp::default_book_dynamics(2);
    const std::int64_t u0 = 2;
    const Model m = build_liquidation(2, u0, 2, dyn, 1.5);

    // t = 1 of T = 2: equal weights; t = T: all weight on the robust term.
    const auto& mid_risk = m.state_layer(1, 1).risk.as_combo().terms;
    REQUIRE(mid_risk.size() == 2);
    CHECK(mid_risk[0].weight == Catch::Approx(0.5).margin(1e-12));
    CHECK(mid_risk[0].spec.as_entropic().tau == 1.5);
    CHECK(mid_risk[1].weight == Catch::Approx(0.5).margin(1e-12));

    const auto& end_risk = m.state_layer(2, 1).risk.as_combo().terms;
    CHECK(end_risk[0].weight == 0.0);
    CHECK(end_risk[1].weight == 1.0);

    // The scenario set tracks the inventory fraction u / u0.
    const int x_u1 = 0 * static_cast<int>(u0 + 1) + 1; // book 0, inventory 1
    const auto& scen =
        m.state_layer(1, x_u1).risk.as_combo().terms[1].spec.as_kusuoka().scenarios;
    REQUIRE(scen.size() == 2);
    CHECK(scen[1].eta.value(0) == 0.5); // Dirac(u / u0) with u = 1, u0 = 2
    CHECK(riskmdp::ess_sup(scen[0].eta) == 1.0);

    // risk0 is the blend's t -> 0 limit: the pure entropic term.
    CHECK(m.risk0.as_entropic().tau == 1.5);

    // Overriding the scenario set installs it at every (t, state).
    const Model fixed = build_liquidation(
        2, u0, 2, dyn, 1.0, {{riskmdp::Pmf::dirac(1.0), 0.0}});
    const auto& fixed_scen =
        fixed.state_layer(1, x_u1).risk.as_combo().terms[1].spec.as_kusuoka().scenarios;
    REQUIRE(fixed_scen.size() == 1);
    CHECK(fixed_scen[0].eta.value(0) == 1.0);
}

TEST_CASE("liquidation models serialize canonically", "[lob]") {
    const Model m = build_liquidation(2, 2, 2, riskmdp::default_book_dynamics(2));
    const std::string text = riskmdp::save_model(m);
    CHECK(riskmdp::save_model(riskmdp::load_model(text)) == text);
}

TEST_CASE("size caps reject oversized builds", "[lob]") {
    const BookDynamics dyn = riskmdp::default_book_dynamics(2);
    require_error("SizeOverflow", [&] {
        (void)build_liquidation(2, 30000, 2, dyn);
    });
    BookDynamics wide = riskmdp::default_book_dynamics(3);
    require_error("SizeOverflow", [&] {
        // 201^4 candidate ask vectors per state is past the enumeration cap.
        (void)build_liquidation(3, 200, 2, wide);
    });
}
