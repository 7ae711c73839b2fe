// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ranging/errors.hpp"
#include "ranging/game.hpp"
#include "ranging/scenario.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace ranging;

namespace {

const Scenario& scenario() {
    static const Scenario s{Config{}};
    return s;
}

GameInstance make_game(std::vector<double> alphas, double delta_db = 1.0) {
    return scenario().game(std::move(alphas), delta_db);
}

oracle::Game to_oracle(const GameInstance& g) {
    oracle::Game o;
    for (double p : g.grid.levels()) o.levels.push_back(p);
    for (double a : g.alphas) o.alphas.push_back(a);
    o.sigma2 = g.sigma2;
    o.V = g.V;
    o.M = g.curve.M();
    o.lambda = g.curve.lambda();
    o.gamma_req = g.qos.gamma_req;
    o.T = g.T;
    return o;
}

// Path-loss-like gains: from a 0.1R terminal (about 25) down to the cell edge (about 0.25),
// with fading spread.
std::vector<double> random_alphas(gen::Source& s, int K, double lo = 0.05, double hi = 50.0) {
    return s.log_uniform_vec(K, lo, hi);
}

IndexProfile random_profile(gen::Source& s, int K, int Q) {
    IndexProfile q(K);
    for (auto& x : q) x = s.integer(0, Q - 1);
    return q;
}

}  // namespace

TEST_CASE("effective gain, SINR and utility") {
    GameInstance g = make_game({1.0, 1.0});
    PowerProfile p{0.5, 1.0};
    CHECK(nu(0, p, g) == doctest::Approx(18.0));
    CHECK(sinr(0, p, g) == doctest::Approx(9.0));
    CHECK(sinr(1, p, g) == doctest::Approx(36.0 * 1.0 / 1.5));

    GameInstance one = make_game({2.0});
    CHECK(nu(0, {1.0}, one) == doctest::Approx(72.0));
    CHECK(sinr(0, {1.0 / 72.0}, one) == doctest::Approx(1.0));
    CHECK(sinr(0, {2.0 / 72.0}, one) == doctest::Approx(2.0));

    // more interference, smaller nu
    GameInstance three = make_game({1.0, 2.0, 3.0});
    PowerProfile q{1.0, 1.0, 1.0}, q2{1.0, 2.0, 2.0};
    CHECK(nu(0, q2, three) < nu(0, q, three));

    CHECK(utility(0, {1.0}, one) == doctest::Approx(one.curve.pd(72.0)));
    GameInstance slow = one;
    slow.T = 4.0;
    CHECK(utility(0, {1.0}, slow) == doctest::Approx(utility(0, {1.0}, one) / 4));
    CHECK(best_response_index(0.5, slow) == best_response_index(0.5, one));
    CHECK(utility(0, {1.0}, make_game({1e9})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(utility(0, {0.0}, one), std::invalid_argument);

    CHECK(social_welfare({1.0}, one) == doctest::Approx(utility(0, {1.0}, one)));
    GameInstance sym = make_game({1.0, 1.0, 1.0});
    const double w = social_welfare({0.1, 0.2, 0.3}, sym);
    CHECK(social_welfare({0.3, 0.1, 0.2}, sym) == doctest::Approx(w).epsilon(1e-14));
    double direct = 0;
    for (int k = 0; k < 3; ++k) direct += utility(k, {0.1, 0.2, 0.3}, sym);
    CHECK(w == doctest::Approx(direct).epsilon(1e-15));

    CHECK_THROWS_AS(make_game({}).validate(), ConfigError);
    CHECK_THROWS_AS(make_game({1.0, 0.0}).validate(), ConfigError);
}

TEST_CASE("feasible sets") {
    GameInstance g = make_game({1.0});
    const double greq = g.qos.gamma_req;
    // gamma_req / nu <= p_min: full grid
    GameInstance strong = make_game({10.0});
    CHECK(static_cast<int>(feasible_set(0, {1.0}, strong).size()) == strong.grid.size());
    // beyond p_max: empty
    GameInstance weak = make_game({greq / (36.0 * 2000.0)});
    CHECK(feasible_set(0, {1.0}, weak).empty());
    // threshold just above level index 2 (1-based level 3)
    const double alpha = greq / (36.0 * g.grid.level(2) * (1 + 1e-9));
    const auto fs = feasible_set(0, {1.0}, make_game({alpha}));
    REQUIRE(!fs.empty());
    CHECK(fs.front() == 3);
    CHECK(fs.back() == g.grid.size() - 1);
}

TEST_CASE("best response agrees with exhaustive and oracle scans") {
    gen::Source src(77);
    for (double step : {0.5, 1.0, 2.0}) {
        GameInstance g = make_game({1.0}, step);
        for (int i = 0; i < 1000; ++i) {
            const double n = src.log_uniform(1e-3, 1e4);
            INFO("nu=" << n << " step=" << step);
            CHECK(best_response_index(n, g) == best_response_index_exhaustive(n, g));
        }
    }
    // oracle: brute force written from the definitions
    for (int i = 0; i < 300; ++i) {
        const int K = src.integer(1, 4);
        GameInstance g = make_game(random_alphas(src, K));
        const oracle::Game o = to_oracle(g);
        const IndexProfile q = random_profile(src, K, g.grid.size());
        const PowerProfile p = to_powers(q, g.grid);
        for (int k = 0; k < K; ++k) {
            std::vector<int> qq(q.begin(), q.end());
            CHECK(g.grid.nearest(best_response(k, p, g)) == o.best_response(k, qq));
        }
    }
}

TEST_CASE("single player on an exact grid point") {
    GameInstance g = make_game({1.0});
    const double gs = gamma_star(g.curve, g.qos);
    for (int q : {5, 20, 40}) {
        const double n = gs / g.grid.level(q);
        CHECK(best_response_index(n, g) == q);
    }
}

TEST_CASE("ascending property") {
    gen::Source src(99);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const int K = src.integer(2, 5);
        GameInstance g = make_game(random_alphas(src, K));
        const int Q = g.grid.size();
        const IndexProfile q = random_profile(src, K, Q);
        const int k = src.integer(0, K - 1);
        IndexProfile up = q;
        for (int l = 0; l < K; ++l)
            if (l != k && src.coin()) up[l] = std::min(Q - 1, up[l] + src.integer(1, 5));
        const PowerProfile p = to_powers(q, g.grid), pu = to_powers(up, g.grid);
        // the full-grid fallback is a different rule; only compare regular responses
        if (feasible_set(k, p, g).empty() || feasible_set(k, pu, g).empty()) continue;
        ++checked;
        INFO("instance " << i);
        CHECK(best_response(k, pu, g) >= best_response(k, p, g));
    }
    CHECK(checked > 500);
}

TEST_CASE("existence condition") {
    const double gs = scenario().gamma_star();
    CHECK(existence_condition(8, 36, gs));
    CHECK_FALSE(existence_condition(9, 36, gs));
    CHECK(existence_condition(1, 36, 1e6));
    CHECK_FALSE(existence_condition(2, 36, 36.0));
    CHECK(scenario().k_max() == 8);
}

TEST_CASE("enumeration matches the brute-force oracle") {
    gen::Source src(123);
    for (int i = 0; i < 40; ++i) {
        const int K = src.integer(1, 3);
        const double step = K == 3 ? 2.0 : 1.0;
        GameInstance g = make_game(random_alphas(src, K), step);
        const auto lib = enumerate_gne(g);
        const auto ref = to_oracle(g).equilibria();
        REQUIRE(lib.size() == ref.size());
        for (std::size_t j = 0; j < lib.size(); ++j) CHECK(std::vector<int>(lib[j].begin(), lib[j].end()) == ref[j]);
        CHECK(std::is_sorted(lib.begin(), lib.end()));
        CHECK(enumerate_gne(g, 10'000'000, ExecPolicy::serial) == lib);
    }
}

TEST_CASE("single player has exactly the unconstrained argmax") {
    gen::Source src(5);
    for (int i = 0; i < 50; ++i) {
        GameInstance g = make_game(random_alphas(src, 1));
        const auto set = enumerate_gne(g);
        REQUIRE(set.size() == 1);
        CHECK(set[0][0] == best_response_index_exhaustive(nu(0, {1.0}, g), g));
    }
}

TEST_CASE("fixed-point soundness and rejection spot-check") {
    gen::Source src(8);
    int rejected = 0;
    for (int i = 0; i < 30; ++i) {
        const int K = src.integer(2, 4);
        GameInstance g = make_game(random_alphas(src, K));
        const auto set = enumerate_gne(g);
        for (const auto& q : set) {
            const PowerProfile p = to_powers(q, g.grid);
            for (int k = 0; k < K; ++k) CHECK(g.grid.nearest(best_response(k, p, g)) == q[k]);
        }
        for (int j = 0; j < 40; ++j) {
            const IndexProfile q = random_profile(src, K, g.grid.size());
            if (std::binary_search(set.begin(), set.end(), q)) continue;
            ++rejected;
            CHECK_FALSE(is_gne(q, g));
        }
    }
    CHECK(rejected >= 1000);
}

TEST_CASE("enumeration budget") {
    GameInstance g = make_game({1, 1, 1, 1, 1});
    CHECK(profile_count(51, 5) == 345025251ULL);
    CHECK(profile_count(1000, 10) == UINT64_MAX);
    try {
        enumerate_gne(g);
        FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
        const std::string m = e.what();
        CHECK(m.find("Q^K") != std::string::npos);
        CHECK(m.find("51") != std::string::npos);
    }
}

TEST_CASE("smallest equilibrium and welfare") {
    CHECK(smallest_gne({{3, 4}}) == IndexProfile{3, 4});
    CHECK(smallest_gne({{3, 4}, {4, 5}}) == IndexProfile{3, 4});
    CHECK_THROWS_AS(smallest_gne({}), EquilibriumError);
    CHECK_THROWS_AS(smallest_gne({{1, 5}, {2, 3}}), EquilibriumError);

    // Welfare ordering on random instances with several equilibria.
    gen::Source src(4242);
    int multi = 0;
    for (int i = 0; i < 300 && multi < 10; ++i) {
        const int K = src.integer(2, 4);
        GameInstance g = make_game(random_alphas(src, K, 5.0, 200.0));
        const auto set = enumerate_gne(g);
        if (set.size() < 2) continue;
        IndexProfile low;
        try {
            low = smallest_gne(set);
        } catch (const EquilibriumError&) {
            continue;
        }
        ++multi;
        const auto best = welfare_maximal(set, g);
        const auto pos = std::find(set.begin(), set.end(), low) - set.begin();
        CHECK(std::find(best.begin(), best.end(), static_cast<std::size_t>(pos)) != best.end());
    }
    MESSAGE("instances with multiple equilibria checked: " << multi);
}

TEST_CASE("continuous equilibrium") {
    const double gs = scenario().gamma_star();
    GameInstance one = make_game({2.0});
    const ContinuousGne c1 = continuous_gne(one);
    CHECK(c1.powers[0] == doctest::Approx(gs / (36.0 * 2.0)).epsilon(1e-14));
    gen::Source src(31);
    for (int i = 0; i < 200; ++i) {
        const int K = src.integer(1, 8);
        GameInstance g = make_game(random_alphas(src, K, 0.5, 5.0));
        const ContinuousGne c = continuous_gne(g);
        if (c.clamped) continue;
        for (int k = 0; k < K; ++k) CHECK(std::abs(sinr(k, c.powers, g) / gs - 1) < 1e-9);
    }
    CHECK_THROWS_AS(continuous_gne(make_game(std::vector<double>(9, 1.0))), EquilibriumError);
    // equal gains: the common power grows with the number of players, steeply near the pole
    double prev = 0.0;
    for (int K = 1; K <= 8; ++K) {
        const ContinuousGne c = continuous_gne(make_game(std::vector<double>(K, 1.0)));
        const double expect = gs / (36.0 - gs * (K - 1));
        if (!c.clamped) CHECK(c.powers[0] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(c.powers[0] > prev);
        prev = c.powers[0];
    }
}

TEST_CASE("normalized MSE") {
    CHECK(nmse({1, 2}, {1, 2}) == 0.0);
    CHECK(nmse({1, 2}, {2, 4}) == doctest::Approx(1.0));
    CHECK(nmse({1, 2}, {2, 2}) == doctest::Approx(0.2));
    CHECK_THROWS_AS(nmse({0, 0}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(nmse({1}, {1, 1}), std::invalid_argument);
}

TEST_CASE("supermodularity on the concave stretch") {
    gen::Source src(2024);
    const double gd = scenario().curve.gamma_dot(), gt = scenario().curve.gamma_tilde();
    for (int i = 0; i < 1000; ++i) {
        const int K = src.integer(2, 5);
        GameInstance g = make_game(random_alphas(src, K));
        PowerProfile p(K);
        for (auto& x : p) x = src.log_uniform(1e-2, 1e2);
        const int k = src.integer(0, K - 1);
        int l = src.integer(0, K - 2);
        if (l >= k) ++l;
        // place player k's SINR inside [gamma_dot, gamma_tilde]
        p[k] = src.uniform(gd, gt) / nu(k, p, g);
        INFO("point " << i);
        CHECK(supermodularity_check(g, p, k, l));
        const double fd = cross_partial_fd(g, p, k, l), an = cross_partial_analytic(g, p, k, l);
        CHECK(std::abs(fd - an) <= 1e-5 * std::abs(an) + 1e-12 * std::abs(utility_slope(k, p, g)) / p[l]);
    }
}

TEST_CASE("best-response dynamic reaches the smallest equilibrium") {
    gen::Source src(606);
    int n = 0;
    for (int i = 0; i < 60; ++i) {
        const int K = src.integer(1, 3);
        GameInstance g = make_game(random_alphas(src, K));
        const DynamicResult r = best_response_dynamic(g);
        const auto set = enumerate_gne(g);
        IndexProfile low;
        try {
            low = smallest_gne(set);
        } catch (const EquilibriumError&) {
            continue;
        }
        ++n;
        CHECK(r.converged);
        CHECK(r.profile == low);
    }
    CHECK(n > 40);
}

TEST_CASE("equilibrium set JSON") {
    GameInstance g = make_game({1.0, 2.0});
    const auto set = enumerate_gne(g);
    const auto j = nlohmann::json::parse(gne_set_json(set, g));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(j[i]["indices"].get<std::vector<int>>() == set[i]);
        CHECK(j[i]["powers"].size() == 2);
        CHECK(j[i]["welfare"].get<double>() == doctest::Approx(social_welfare(to_powers(set[i], g.grid), g)));
    }
}
