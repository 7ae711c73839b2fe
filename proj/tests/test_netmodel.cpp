// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ranging/errors.hpp"
#include "ranging/netmodel.hpp"
#include "ranging/rng.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace ranging;

TEST_CASE("power grid levels") {
    const PowerGrid g = build_power_grid(-20, 30, 1);
    CHECK(g.size() == 51);
    CHECK(to_db(g.min()) == doctest::Approx(-20).epsilon(1e-12));
    CHECK(to_db(g.max()) == doctest::Approx(30).epsilon(1e-12));
    // 1-based level 11 is index 10
    CHECK(to_db(g.level(10)) == doctest::Approx(-10).epsilon(1e-12));
    for (int q = 0; q + 1 < g.size(); ++q) {
        CHECK(g.level(q + 1) > g.level(q));
        CHECK(std::abs(g.level(q + 1) / g.level(q) / g.delta() - 1) < 1e-12);
    }
    const auto ref = oracle::geometric_levels(-20, 30, 1);
    for (int q = 0; q < g.size(); ++q) CHECK(std::abs(g.level(q) / double(ref[q]) - 1) < 1e-12);
}

TEST_CASE("degenerate and rejected grids") {
    const PowerGrid one = build_power_grid(0, 0, 1);
    CHECK(one.size() == 1);
    CHECK(one.level(0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_power_grid(-20, 30, 3), ConfigError);
    CHECK_THROWS_AS(build_power_grid(-20, 30, 0), ConfigError);
    CHECK_THROWS_AS(build_power_grid(30, -20, 1), ConfigError);
    try {
        build_power_grid(-20, 30, 3);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("-20") != std::string::npos);
        CHECK(msg.find("30") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
    CHECK(build_power_grid(-20, 30, 0.5).size() == 101);
    CHECK(build_power_grid(-20, 30, 2).size() == 26);
}

TEST_CASE("grid search helpers agree with a linear scan") {
    gen::Source src(11);
    for (double step : {0.5, 1.0, 2.0}) {
        const PowerGrid g = build_power_grid(-20, 30, step);
        for (int i = 0; i < 2000; ++i) {
            const double x = src.log_uniform(1e-3, 1e4);
            int first = g.size(), last = -1, near = 0;
            for (int q = 0; q < g.size(); ++q) {
                if (g.level(q) >= x && first == g.size()) first = q;
                if (g.level(q) <= x) last = q;
                if (std::abs(to_db(g.level(q)) - to_db(x)) < std::abs(to_db(g.level(near)) - to_db(x))) near = q;
            }
            CHECK(g.first_at_least(x) == first);
            CHECK(g.last_at_most(x) == last);
            CHECK(std::abs(to_db(g.level(g.nearest(x))) - to_db(x)) <=
                  std::abs(to_db(g.level(near)) - to_db(x)) + 1e-12);
        }
        // exact levels hit themselves
        for (int q = 0; q < g.size(); ++q) {
            CHECK(g.first_at_least(g.level(q)) == q);
            CHECK(g.last_at_most(g.level(q)) == q);
        }
    }
}

TEST_CASE("path loss") {
    CHECK(path_loss(0.5, 1.0, 2.0) == doctest::Approx(1.0));
    CHECK(path_loss(1.0, 1.0, 2.0) == doctest::Approx(0.25));
    CHECK(path_loss(0.1, 1.0, 2.0) == doctest::Approx(25.0));
    CHECK(path_loss(5.0, 10.0, 3.0) == doctest::Approx(1.0));
}

TEST_CASE("deployment sampling") {
    Rng a = make_stream(3, {1});
    const Deployment d = sample_deployment(5, 1.0, a);
    CHECK(d.size() == 5);
    for (double x : d.distances) CHECK((x >= 0.1 && x <= 1.0));
    Rng b = make_stream(3, {2});
    const Deployment one = sample_deployment(1, 10.0, b);
    CHECK(one.size() == 1);
    CHECK((one.distances[0] >= 1.0 && one.distances[0] <= 10.0));
    Rng c1 = make_stream(9, {4}), c2 = make_stream(9, {4});
    CHECK(sample_deployment(7, 1.0, c1).distances == sample_deployment(7, 1.0, c2).distances);
    Rng e = make_stream(1, {});
    CHECK_THROWS_AS(sample_deployment(0, 1.0, e), ConfigError);
}

TEST_CASE("streams are pure functions of seed and tags") {
    Rng a = make_stream(42, {7, 8}), b = make_stream(42, {7, 8}), c = make_stream(42, {8, 7}),
        d = make_stream(43, {7, 8});
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    CHECK(hash_tag("distance") != hash_tag("equilibria"));
}

TEST_CASE("vehicular-A profile") {
    const TapProfile p = vehicular_a_profile(89.28e-9);
    REQUIRE(p.delays.size() == 6);
    REQUIRE(p.powers.size() == 6);
    CHECK(std::accumulate(p.powers.begin(), p.powers.end(), 0.0) == doctest::Approx(1.0));
    const double ns[] = {0, 310, 710, 1090, 1730, 2510};
    const double db[] = {0, -1, -9, -10, -15, -20};
    for (int i = 0; i < 6; ++i) {
        CHECK(p.delays[i] == static_cast<int>(std::lround(ns[i] * 1e-9 / 89.28e-9)));
        CHECK(to_db(p.powers[i] / p.powers[0]) == doctest::Approx(db[i]).epsilon(1e-9));
    }
}

TEST_CASE("tile centers sit inside the usable band, equally spaced") {
    const SystemConfig cfg;
    const auto c = tile_centers(cfg);
    REQUIRE(static_cast<int>(c.size()) == cfg.M);
    for (double x : c) {
        CHECK(x - (cfg.V - 1) / 2.0 >= cfg.Nv);
        CHECK(x + (cfg.V - 1) / 2.0 <= cfg.N - cfg.Nv - 1);
    }
    for (std::size_t i = 2; i < c.size(); ++i) CHECK((c[i] - c[i - 1]) == doctest::Approx(c[1] - c[0]));
}

TEST_CASE("channel realizations") {
    const SystemConfig cfg;
    Rng rng = make_stream(5, {hash_tag("chan")});
    double sum_half = 0, sum_edge = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const ChannelRealization h = sample_channel(cfg, 0.5, rng);
        REQUIRE(static_cast<int>(h.tile_gains.size()) == cfg.M);
        double s = 0;
        for (auto g : h.tile_gains) s += std::norm(g);
        CHECK(h.alpha == doctest::Approx(s / cfg.M).epsilon(1e-14));
        CHECK(h.alpha > 0);
        sum_half += h.alpha;
        sum_edge += sample_channel(cfg, 1.0, rng).alpha;
    }
    CHECK(sum_half / n == doctest::Approx(1.0).epsilon(0.05));
    CHECK((sum_edge / sum_half) == doctest::Approx(0.25).epsilon(0.05));
    Rng a = make_stream(8, {}), b = make_stream(8, {});
    CHECK(sample_channel(cfg, 0.3, a).tile_gains == sample_channel(cfg, 0.3, b).tile_gains);
}

TEST_CASE("system config invariants") {
    SystemConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.rho() == doctest::Approx(128.0));
    SystemConfig bad = c;
    bad.mse_max = 196;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.lambda = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.V = 300;  // M*V beyond the usable band
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.V = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
