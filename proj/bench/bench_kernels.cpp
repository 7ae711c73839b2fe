// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "ranging/config.hpp"
#include "ranging/game.hpp"
#include "ranging/parallel.hpp"
#include "ranging/phy.hpp"
#include "ranging/rng.hpp"
#include "ranging/scenario.hpp"
#include "ranging/sync.hpp"

using namespace ranging;

namespace {

const Scenario& scenario() {
    static const Scenario sc{Config{}};
    return sc;
}

GameInstance instance(int K) {
    Rng rng = make_stream(7, {static_cast<std::uint64_t>(K)});
    const Deployment dep = sample_deployment(K, scenario().cfg.system.R, rng);
    std::vector<double> alphas;
    for (double d : dep.distances) alphas.push_back(sample_channel(scenario().cfg.system, d, rng).alpha);
    return scenario().game(alphas);
}

void enumerate(benchmark::State& st, ExecPolicy policy) {
    const GameInstance g = instance(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(enumerate_gne(g, 200'000'000, policy));
    st.counters["profiles"] = static_cast<double>(profile_count(g.grid.size(), g.K()));
}

void BM_enumerate_serial(benchmark::State& st) { enumerate(st, ExecPolicy::serial); }
void BM_enumerate_parallel(benchmark::State& st) { enumerate(st, ExecPolicy::parallel); }
BENCHMARK(BM_enumerate_serial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_enumerate_parallel)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

// Sessions across trials, one worker vs all.
void BM_sessions(benchmark::State& st) {
    const int jobs = static_cast<int>(st.range(0));
    const Scenario& sc = scenario();
    const RangingReceiver rx(sc.cfg.system);
    for (auto _ : st) {
        const auto frames = map_trials<int>(32, jobs, [&](int t) {
            Rng rng = make_stream(3, {static_cast<std::uint64_t>(t)});
            const Deployment dep = sample_deployment(5, sc.cfg.system.R, rng);
            std::vector<ChannelRealization> ch;
            for (double d : dep.distances) ch.push_back(sample_channel(sc.cfg.system, d, rng));
            return run_session(sc, dep, ch, AlgorithmKind::dlf(), rng, 200, rx).frames;
        });
        benchmark::DoNotOptimize(frames);
    }
}
BENCHMARK(BM_sessions)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

// Timing search: free functions vs the precomputed receiver table.
struct Search {
    SystemConfig cfg;
    CodeBook book;
    TileObservation obs;
    Search() : obs(4, 36) {
        Rng rng = make_stream(5, {});
        book = make_codebook(1, cfg.M * cfg.V, rng);
        const ChannelRealization h = sample_channel(cfg, 0.5 * cfg.R, rng);
        obs = synthesize_tiles(cfg, {Emitter{&book.codes[0], 0.1, &h, 40}}, rng);
    }
};

void BM_search_direct(benchmark::State& st) {
    const Search s;
    for (auto _ : st) {
        const TimingEstimate te = estimate_timing(s.obs, s.book.codes[0], s.cfg.theta_max, s.cfg.N);
        benchmark::DoNotOptimize(glrt_detect(s.obs, s.book.codes[0], te.theta_hat, 0.12, s.cfg.N));
        benchmark::DoNotOptimize(estimate_sinr(s.obs, s.book.codes[0], te.theta_hat, s.cfg.N));
    }
}
void BM_search_table(benchmark::State& st) {
    const Search s;
    const RangingReceiver rx(s.cfg);
    for (auto _ : st) benchmark::DoNotOptimize(rx.process(s.obs, s.book.codes[0], 0.12));
}
BENCHMARK(BM_search_direct)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_search_table)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
