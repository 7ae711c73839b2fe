// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ranging/errors.hpp"
#include "ranging/scenario.hpp"
#include "ranging/sync.hpp"
#include "support/gen.hpp"

using namespace ranging;

namespace {

const Scenario& scenario() {
    static const Scenario s{Config{}};
    return s;
}

bool on_grid(double p, const PowerGrid& g) { return std::abs(g.level(g.nearest(p)) / p - 1) < 1e-12; }

std::vector<ChannelRealization> channels_for(const Deployment& dep, Rng& rng) {
    std::vector<ChannelRealization> out;
    for (double d : dep.distances) out.push_back(sample_channel(scenario().cfg.system, d, rng));
    return out;
}

}  // namespace

TEST_CASE("algorithm names") {
    CHECK(parse_algorithm("dlf_brsa") == Algorithm::dlf_brsa);
    CHECK(parse_algorithm("BEB-DSA") == Algorithm::beb_dsa);
    CHECK(to_string(Algorithm::dsa) == "dsa");
    CHECK_THROWS_AS(parse_algorithm("aloha"), ConfigError);
}

TEST_CASE("DLF-BRSA update") {
    const Scenario& sc = scenario();
    const double greq = sc.qos.gamma_req;
    STRuntime st = make_runtime(sc.grid, 3, 0);
    CHECK(st.power == sc.grid.min());
    CHECK(st.q == 0);

    STRuntime a = st;
    dlf_brsa_update(a, true, 2 * greq, sc.grid, sc.curve, sc.qos, 4);
    CHECK(a.exited);
    CHECK(a.n_exit == 4);
    CHECK(a.power == st.power);

    STRuntime b = st;
    dlf_brsa_update(b, true, greq, sc.grid, sc.curve, sc.qos, 4);
    CHECK_FALSE(b.exited);
    CHECK(b.power != st.power);

    // message form decodes first
    STRuntime c = st;
    dlf_brsa_update(c, FeedbackMessage{true, 3}, sc.quantizer, sc.grid, sc.curve, sc.qos, 1);
    CHECK(c.exited);

    // exact feedback: the update is the game best response
    gen::Source src(1);
    for (int i = 0; i < 200; ++i) {
        const GameInstance g = sc.game({src.log_uniform(1e-2, 1e2)});
        STRuntime s = make_runtime(sc.grid, 0, 0);
        const int q0 = src.integer(0, sc.grid.size() - 1);
        s.q = q0;
        s.power = sc.grid.level(q0);
        const double mu = sinr(0, {s.power}, g);
        dlf_brsa_update(s, false, mu, sc.grid, sc.curve, sc.qos, 0);
        CHECK(s.power == doctest::Approx(best_response(0, {sc.grid.level(q0)}, g)).epsilon(1e-15));
    }
}

TEST_CASE("DLF-BRSA with exact feedback follows the best-response dynamic") {
    const Scenario& sc = scenario();
    gen::Source src(2);
    for (int i = 0; i < 50; ++i) {
        const int K = src.integer(1, 4);
        const GameInstance g = sc.game(src.log_uniform_vec(K, 0.05, 50));
        std::vector<STRuntime> st;
        for (int k = 0; k < K; ++k) st.push_back(make_runtime(sc.grid, 0, k));
        for (int n = 1; n <= 15; ++n) {
            PowerProfile p;
            for (const auto& s : st) p.push_back(s.power);
            for (int k = 0; k < K; ++k) dlf_brsa_update(st[k], false, sinr(k, p, g), sc.grid, sc.curve, sc.qos, n);
            const DynamicResult ref = best_response_dynamic(g, n);
            for (int k = 0; k < K; ++k) CHECK(st[k].q == ref.profile[k]);
        }
    }
}

TEST_CASE("BRSA update") {
    const Scenario& sc = scenario();
    const double gs = sc.gamma_star(), lo = sc.grid.min(), hi = sc.grid.max();
    STRuntime st = make_runtime(sc.grid, 0, 0);
    st.power = 1.0;
    STRuntime a = st;
    brsa_update(a, false, gs, gs, sc.qos.gamma_req, lo, hi, 0);
    CHECK(a.power == doctest::Approx(1.0));
    brsa_update(a, false, gs / 2, gs, sc.qos.gamma_req, lo, hi, 1);
    CHECK(a.power == doctest::Approx(2.0));
    brsa_update(a, false, -1.0, gs, sc.qos.gamma_req, lo, hi, 2);
    CHECK(a.power == doctest::Approx(2.0));
    brsa_update(a, false, 1e-9, gs, sc.qos.gamma_req, lo, hi, 3);
    CHECK(a.power == hi);
    brsa_update(a, true, sc.qos.gamma_req * 1.01, gs, sc.qos.gamma_req, lo, hi, 4);
    CHECK(a.exited);

    // exact-SINR stub converges to the continuous equilibrium
    gen::Source src(3);
    for (int i = 0; i < 50; ++i) {
        const int K = src.integer(1, 5);
        const GameInstance g = sc.game(src.log_uniform_vec(K, 0.5, 5));
        const ContinuousGne c = continuous_gne(g);
        if (c.clamped) continue;
        std::vector<STRuntime> s(K, st);
        for (int n = 0; n < 400; ++n) {
            PowerProfile p;
            for (const auto& x : s) p.push_back(x.power);
            for (int k = 0; k < K; ++k) brsa_update(s[k], false, sinr(k, p, g), gs, sc.qos.gamma_req, lo, hi, n);
        }
        for (int k = 0; k < K; ++k) CHECK(std::abs(s[k].power / c.powers[k] - 1) < 1e-6);
    }
}

TEST_CASE("DSA update") {
    const Scenario& sc = scenario();
    STRuntime st = make_runtime(sc.grid, 0, 0);
    dsa_update(st, false, 0, sc.qos.gamma_req, sc.grid, 0);
    CHECK(st.power == doctest::Approx(sc.grid.min() * sc.grid.delta()));
    for (int n = 1; n < 9; ++n) dsa_update(st, false, 0, sc.qos.gamma_req, sc.grid, n);
    CHECK(st.power == doctest::Approx(sc.grid.min() * std::pow(sc.grid.delta(), 9)));
    for (int n = 0; n < 100; ++n) dsa_update(st, false, 0, sc.qos.gamma_req, sc.grid, n);
    CHECK(st.power == sc.grid.max());
    dsa_update(st, true, 2 * sc.qos.gamma_req, sc.qos.gamma_req, sc.grid, 7);
    CHECK(st.exited);
}

TEST_CASE("BEB-DSA update") {
    const Scenario& sc = scenario();
    Rng rng = make_stream(4, {});
    STRuntime st = make_runtime(sc.grid, 0, 0);
    st.backoff_remaining = 3;
    beb_dsa_update(st, false, 0, sc.qos.gamma_req, sc.grid, 6, rng, 0);
    CHECK(st.backoff_remaining == 2);
    CHECK(st.power == sc.grid.min());

    // first round: Geometric(1) adds nothing, one frame
    for (int i = 0; i < 100; ++i) {
        STRuntime s = make_runtime(sc.grid, 0, 0);
        beb_dsa_update(s, false, 0, sc.qos.gamma_req, sc.grid, 6, rng, 0);
        CHECK(s.backoff_remaining == 0);
        CHECK(s.q == 1);
        CHECK(s.backoff_round == 1);
    }
    // mean wait in round c is 2^c frames
    double total = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        STRuntime s = make_runtime(sc.grid, 0, 0);
        s.backoff_round = 3;
        beb_dsa_update(s, false, 0, sc.qos.gamma_req, sc.grid, 6, rng, 0);
        total += 1 + s.backoff_remaining;
    }
    CHECK(total / n == doctest::Approx(8.0).epsilon(0.05));

    STRuntime s = make_runtime(sc.grid, 0, 0);
    for (int i = 0; i < 5000; ++i) {
        beb_dsa_update(s, false, 0, sc.qos.gamma_req, sc.grid, 6, rng, i);
        CHECK(s.power <= sc.grid.max());
        CHECK(s.backoff_round <= 6);
    }
}

TEST_CASE("sessions") {
    const Scenario& sc = scenario();
    SUBCASE("strong single terminal exits at once") {
        Deployment dep{{0.1}};
        ChannelRealization h;
        h.tile_gains.assign(4, cplx(30, 0));
        h.alpha = 900;
        Rng rng = make_stream(5, {});
        const SessionTrace t = run_session(sc, dep, {h}, AlgorithmKind::dlf(), rng, 50);
        REQUIRE(t.st[0].n_exit.has_value());
        CHECK(*t.st[0].n_exit <= 1);
        CHECK(t.st[0].powers[0] == sc.grid.min());
    }
    SUBCASE("hopeless noise censors everyone") {
        Config cfg;
        cfg.system.sigma2 = 1e12;
        const Scenario loud(cfg);
        Rng rng = make_stream(6, {});
        const Deployment dep = sample_deployment(3, 1.0, rng);
        const auto ch = channels_for(dep, rng);
        const SessionTrace t = run_session(loud, dep, ch, AlgorithmKind::dlf(), rng, 10);
        CHECK(t.censored);
        CHECK(t.frames == 10);
        for (const auto& s : t.st) CHECK_FALSE(s.n_exit.has_value());
        const SessionMetrics m = session_metrics(t, 5e-3);
        CHECK_FALSE(m.defined);
        CHECK(m.censored == 3);
    }
    SUBCASE("determinism, grid membership, absorbing exit, feedback budget") {
        gen::Source src(7);
        for (const AlgorithmKind alg : {AlgorithmKind::dlf(), AlgorithmKind::dlf(true), AlgorithmKind::brsa(),
                                        AlgorithmKind::dsa(), AlgorithmKind::beb(6)}) {
            for (int i = 0; i < 10; ++i) {
                Rng r0 = make_stream(100 + i, {});
                const Deployment dep = sample_deployment(src.integer(1, 6), 1.0, r0);
                const auto ch = channels_for(dep, r0);
                Rng r1 = make_stream(200 + i, {}), r2 = make_stream(200 + i, {});
                const SessionTrace a = run_session(sc, dep, ch, alg, r1, 2000);
                const SessionTrace b = run_session(sc, dep, ch, alg, r2, 2000);
                std::ostringstream ja, jb;
                write_trace_jsonl(ja, a, i);
                write_trace_jsonl(jb, b, i);
                CHECK(ja.str() == jb.str());
                for (const auto& s : a.st) {
                    if (s.n_exit) CHECK(static_cast<int>(s.powers.size()) == *s.n_exit + 1);
                    if (s.n_exit) CHECK(*s.n_exit < a.frames);
                    CHECK(s.powers.front() == sc.grid.min());
                    for (double p : s.powers) {
                        if (alg.kind == Algorithm::brsa)
                            CHECK((p >= sc.grid.min() && p <= sc.grid.max()));
                        else
                            CHECK(on_grid(p, sc.grid));
                    }
                }
                const bool quantized = !(alg.kind == Algorithm::brsa || alg.unquantized);
                for (int bits : a.feedback_bits) CHECK(bits == (quantized ? 4 * sc.cfg.sync.codes : -1));
                CHECK(static_cast<int>(a.feedback_bits.size()) == a.frames);
            }
        }
    }
    SUBCASE("input guards") {
        Rng rng = make_stream(8, {});
        Deployment dep{{0.5, 0.5}};
        CHECK_THROWS_AS(run_session(sc, dep, {}, AlgorithmKind::dlf(), rng, 10), std::invalid_argument);
        const auto ch = channels_for(dep, rng);
        CHECK_THROWS_AS(run_session(sc, dep, ch, AlgorithmKind::dlf(), rng, 0), ConfigError);
        Deployment many{std::vector<double>(9, 0.5)};
        CHECK_THROWS_AS(run_session(sc, many, channels_for(many, rng), AlgorithmKind::dlf(), rng, 10), ConfigError);
    }
}

TEST_CASE("session metrics") {
    SessionTrace t;
    t.st.resize(3);
    t.st[0].n_exit = 3;
    t.st[0].powers = {2, 2, 2, 2};
    const double lo = 0.01, d = from_db(1);
    t.st[1].n_exit = 2;
    t.st[1].powers = {lo, lo * d, lo * d * d};
    t.st[2].powers = {1, 1};  // censored
    const SessionMetrics m = session_metrics(t, 5e-3);
    CHECK(m.st[0].p_avg == doctest::Approx(2));
    CHECK(m.st[1].p_avg == doctest::Approx((lo + lo * d + lo * d * d) / 3));
    CHECK(m.st[0].energy == doctest::Approx(5e-3 * 8));
    CHECK(m.censored == 1);
    CHECK(m.defined);
    CHECK(m.n_exit_avg == doctest::Approx(2.5));
    CHECK(m.T_avg == doctest::Approx(12.5e-3));
    CHECK(m.p_avg_db == doctest::Approx(to_db((2 + m.st[1].p_avg) / 2)));
    const SessionMetrics only = session_metrics(t, 5e-3, 1);
    CHECK(only.n_exit_avg == doctest::Approx(2));

    SessionTrace four;
    four.st.resize(1);
    four.st[0].n_exit = 4;
    four.st[0].powers.assign(5, 1.0);
    CHECK(session_metrics(four, 5e-3).T_avg == doctest::Approx(20e-3));
}

TEST_CASE("trace export") {
    const Scenario& sc = scenario();
    Rng rng = make_stream(9, {});
    const Deployment dep = sample_deployment(3, 1.0, rng);
    const auto ch = channels_for(dep, rng);
    const SessionTrace t = run_session(sc, dep, ch, AlgorithmKind::dlf(), rng, 100);
    std::ostringstream os;
    write_trace_jsonl(os, t, 17);
    std::istringstream in(os.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        for (const char* key : {"trial", "k", "algorithm", "n_exit", "p_avg_db", "theta_true", "theta_hat", "sq_err", "powers"})
            CHECK(j.contains(key));
        CHECK(j["trial"] == 17);
        CHECK(j["k"] == n);
        CHECK(j["powers"].size() == t.st[n].powers.size());
        ++n;
    }
    CHECK(n == 3);
}
