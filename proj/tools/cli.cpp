// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranging/config.hpp"
#include "ranging/detection.hpp"
#include "ranging/errors.hpp"
#include "ranging/experiments.hpp"
#include "ranging/feedback.hpp"
#include "ranging/game.hpp"
#include "ranging/netmodel.hpp"
#include "ranging/parallel.hpp"
#include "ranging/rng.hpp"
#include "ranging/scenario.hpp"
#include "ranging/sync.hpp"

namespace ranging::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string outdir = ".";
    int jobs = 0;
    std::vector<std::string> overrides;
};

// Raised for problems the user can fix on the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) throw UsageError(what + " is not an unsigned 64-bit integer: '" + text + "'");
    return v;
}

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("RANGING_SIM_SEED"); env && *env) return parse_seed(env, "RANGING_SIM_SEED");
    return 1;
}

Config load(const Common& c) {
    Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
    for (const auto& o : c.overrides) apply_override(cfg, o);
    return cfg;
}

fs::path ensure_outdir(const Common& c) {
    fs::path p(c.outdir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + c.outdir + "': " + ec.message());
    return p;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(prec);
    s << x;
    return s.str();
}

// ---- calibrate ----

int cmd_calibrate(const Common& c, std::ostream& out, std::ostream& err) {
    const Config cfg = load(c);
    cfg.validate();
    const SystemConfig& sys = cfg.system;
    // the threshold and QoS target come first so they still print when a curve root-find fails
    const double lambda = sys.lambda.value_or(calibrate_threshold(sys.pfa_target, sys.M, sys.V));
    out << "lambda          " << fmt(lambda, 6) << (sys.lambda ? "  (explicit)" : "  (calibrated)") << '\n'
        << "rho             " << fmt(sys.rho(), 3) << '\n'
        << "gamma_req_db    " << fmt(to_db(gamma_req(sys.N, sys.M, sys.V, sys.rho()))) << '\n';
    std::optional<Scenario> sc;
    try {
        sc.emplace(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    const double gs = sc->gamma_star();
    out << "gamma_dot_db    " << fmt(to_db(sc->curve.gamma_dot())) << '\n'
        << "gamma_tilde_db  " << fmt(to_db(sc->curve.gamma_tilde())) << '\n'
        << "gamma_star_db   " << fmt(to_db(gs)) << '\n'
        << "pd_at_tilde     " << fmt(sc->curve.pd(sc->curve.gamma_tilde())) << '\n'
        << "k_max           " << sc->k_max() << '\n'
        << "delta_gamma_db  " << fmt(resolution(sc->quantizer)) << '\n'
        << "grid_levels     " << sc->grid.size() << '\n';
    return ok;
}

// ---- gne ----

struct GneOptions {
    int K = 2;
    std::optional<double> delta_db;
    int trials = 1;
};

int cmd_gne(const Common& c, const GneOptions& o, std::ostream& out, std::ostream& err) {
    Config cfg = load(c);
    if (o.delta_db) cfg.grid.delta_db = *o.delta_db;
    if (o.K < 1) throw UsageError("--K must be at least 1");
    if (o.trials < 1) throw UsageError("--trials must be at least 1");
    const Scenario sc(cfg);
    const std::uint64_t seed = resolve_seed(c);
    const fs::path dir = ensure_outdir(c);

    // Fail early with the budget message instead of once per trial.
    const std::uint64_t profiles = profile_count(sc.grid.size(), o.K);
    if (profiles > cfg.game.enum_budget)
        throw BudgetError("enumeration needs Q^K = " + std::to_string(sc.grid.size()) + "^" + std::to_string(o.K) +
                          " = " + std::to_string(profiles) + " profiles, budget is " +
                          std::to_string(cfg.game.enum_budget) + " (raise game.enum_budget or the power step)");

    struct Trial {
        nlohmann::ordered_json record;
        double count = 0.0;
        std::optional<double> nmse, welfare;
    };
    const auto trials = map_trials<Trial>(o.trials, c.jobs, [&](int t) {
        Rng rng = make_stream(seed, {hash_tag("gne"), static_cast<std::uint64_t>(o.K), static_cast<std::uint64_t>(t)});
        const Deployment dep = sample_deployment(o.K, cfg.system.R, rng);
        std::vector<double> alphas;
        for (double d : dep.distances) alphas.push_back(sample_channel(cfg.system, d, rng).alpha);
        const GameInstance g = sc.game(alphas);
        const auto set = enumerate_gne(g, cfg.game.enum_budget, ExecPolicy::serial);

        Trial tr;
        tr.count = static_cast<double>(set.size());
        auto& j = tr.record;
        j["trial"] = t;
        j["distances"] = dep.distances;
        j["alphas"] = alphas;
        j["gne"] = nlohmann::ordered_json::parse(gne_set_json(set, g));
        try {
            const IndexProfile low = smallest_gne(set);
            const PowerProfile pd = to_powers(low, g.grid);
            j["smallest"] = low;
            j["smallest_welfare"] = social_welfare(pd, g);
            if (existence_condition(o.K, g.V, sc.gamma_star())) {
                const PowerProfile pc = continuous_gne(g).powers;
                tr.nmse = nmse(pc, pd);
                tr.welfare = social_welfare(pd, g) / social_welfare(pc, g);
                j["nmse"] = *tr.nmse;
                j["welfare_ratio"] = *tr.welfare;
            }
        } catch (const EquilibriumError&) {
            j["smallest"] = nullptr;
        }
        return tr;
    });

    nlohmann::ordered_json doc;
    doc["K"] = o.K;
    doc["delta_db"] = cfg.grid.delta_db;
    doc["seed"] = seed;
    doc["trials"] = nlohmann::ordered_json::array();
    double count = 0.0, nm = 0.0, wf = 0.0;
    int n_nm = 0;
    for (const auto& tr : trials) {
        doc["trials"].push_back(tr.record);
        count += tr.count;
        if (tr.nmse) {
            nm += *tr.nmse;
            wf += *tr.welfare;
            ++n_nm;
        }
    }
    const fs::path file = dir / ("gne_K" + std::to_string(o.K) + ".json");
    write_file(file, doc.dump(2) + "\n");

    out << "K " << o.K << "  delta_db " << cfg.grid.delta_db << "  trials " << o.trials << '\n'
        << "mean_gne_count  " << fmt(count / o.trials) << '\n';
    if (n_nm > 0)
        out << "mean_nmse       " << fmt(nm / n_nm, 6) << '\n' << "mean_welfare_ratio " << fmt(wf / n_nm, 6) << '\n';
    else
        out << "mean_nmse       n/a\n";
    err << "wrote " << file.string() << '\n';
    return ok;
}

// ---- run ----

struct RunOptions {
    std::string algorithm = "dlf_brsa";
    int K = 5;
    bool unquantized = false;
    std::optional<double> d1;
    std::optional<int> max_frames;
};

int cmd_run(const Common& c, const RunOptions& o, std::ostream& out, std::ostream& err) {
    const Algorithm a = parse_algorithm(o.algorithm);
    const Config cfg = load(c);
    if (o.K < 1) throw UsageError("--K must be at least 1");
    const Scenario sc(cfg);
    const std::uint64_t seed = resolve_seed(c);
    const fs::path dir = ensure_outdir(c);

    AlgorithmKind alg;
    switch (a) {
        case Algorithm::dlf_brsa: alg = AlgorithmKind::dlf(o.unquantized); break;
        case Algorithm::brsa: alg = AlgorithmKind::brsa(); break;
        case Algorithm::dsa: alg = AlgorithmKind::dsa(); break;
        case Algorithm::beb_dsa: alg = AlgorithmKind::beb(cfg.sync.beb_cmax); break;
    }
    if (o.unquantized && a != Algorithm::dlf_brsa) throw UsageError("--unquantized applies to dlf_brsa only");

    const std::uint64_t tag = hash_tag("run");
    Rng rng = make_stream(seed, {tag, static_cast<std::uint64_t>(o.K)});
    Deployment dep;
    if (o.d1) {
        if (!(*o.d1 > 0.0)) throw UsageError("--d1 must be positive");
        dep.distances.push_back(*o.d1 * cfg.system.R);
        if (o.K > 1) {
            const Deployment rest = sample_deployment(o.K - 1, cfg.system.R, rng);
            dep.distances.insert(dep.distances.end(), rest.distances.begin(), rest.distances.end());
        }
    } else {
        dep = sample_deployment(o.K, cfg.system.R, rng);
    }
    std::vector<ChannelRealization> channels;
    for (double d : dep.distances) channels.push_back(sample_channel(cfg.system, d, rng));

    Rng srng = make_stream(seed, {tag, static_cast<std::uint64_t>(o.K), 1});
    const SessionTrace trace = run_session(sc, dep, channels, alg, srng, o.max_frames.value_or(cfg.sync.max_frames));

    const fs::path file = dir / ("run_" + trace.algorithm + "_K" + std::to_string(o.K) + ".jsonl");
    std::ostringstream jl;
    write_trace_jsonl(jl, trace, 0);
    write_file(file, jl.str());

    const SessionMetrics m = session_metrics(trace, cfg.system.Tf);
    out << "algorithm " << trace.algorithm << "  K " << o.K << "  frames " << trace.frames << "  false_alarms "
        << trace.false_alarms << (trace.censored ? "  censored" : "") << '\n';
    for (std::size_t k = 0; k < m.st.size(); ++k) {
        const STMetrics& s = m.st[k];
        out << "st " << k << "  d " << fmt(dep.distances[k], 3) << "  n_exit ";
        if (s.censored)
            out << "censored";
        else
            out << s.n_exit;
        out << "  p_avg_db " << fmt(s.p_avg_db, 2) << "  sq_err " << fmt(s.sq_err, 0) << '\n';
    }
    if (m.defined)
        out << "summary  p_avg_db " << fmt(m.p_avg_db, 2) << "  n_exit_avg " << fmt(m.n_exit_avg, 2) << "  T_avg_ms "
            << fmt(m.T_avg * 1e3, 2) << '\n';
    err << "wrote " << file.string() << '\n';
    return ok;
}

// ---- sweep ----

struct SweepOptions {
    std::string figure;
    std::optional<int> trials;
    std::vector<int> K_values;
    std::vector<double> deltas;
    std::vector<int> B_values;
    std::vector<double> distances;
    std::vector<std::string> variants;
    std::optional<int> K_fixed;
};

int cmd_sweep(const Common& c, const SweepOptions& o, std::ostream& out, std::ostream& err) {
    const FigureId f = parse_figure(o.figure);
    const Config cfg = load(c);
    SweepSpec spec = default_spec(f, cfg);
    spec.seed = resolve_seed(c);
    spec.jobs = c.jobs;
    if (o.trials) spec.trials = *o.trials;
    if (!o.K_values.empty()) spec.K_values = o.K_values;
    if (!o.deltas.empty()) spec.delta_db_values = o.deltas;
    if (!o.B_values.empty()) spec.B_values = o.B_values;
    if (!o.distances.empty()) spec.distances = o.distances;
    if (!o.variants.empty()) spec.variants = o.variants;
    if (o.K_fixed) spec.K_fixed = *o.K_fixed;
    const fs::path dir = ensure_outdir(c);

    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult r = run_sweep(spec);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path csv = dir / (o.figure + ".csv");
    const fs::path meta = dir / (o.figure + ".meta.json");
    emit_csv(r, csv.string());
    emit_metadata(spec, r, wall, meta.string());
    for (const auto& n : r.notes) err << "note: " << n << '\n';
    out << csv.string() << '\n' << meta.string() << '\n';
    return ok;
}

// ---- validate ----

double binomial_tail(double x, int a, int b) {
    // I_x[a,b] = P(Bin(a+b-1, x) >= a)
    const int n = a + b - 1;
    long double s = 0.0L;
    for (int j = a; j <= n; ++j) {
        const long double lc = std::lgamma(n + 1.0L) - std::lgamma(j + 1.0L) - std::lgamma(n - j + 1.0L);
        s += std::exp(lc + j * std::log(static_cast<long double>(x)) + (n - j) * std::log1p(-static_cast<long double>(x)));
    }
    return static_cast<double>(s);
}

int cmd_validate(const Common& c, std::ostream& out) {
    const Config cfg = load(c);
    int failed = 0;
    auto check = [&](const std::string& name, const std::function<std::string()>& body) {
        std::string detail;
        bool pass = false;
        try {
            detail = body();
            pass = detail.empty() || detail.rfind("ok", 0) == 0;
        } catch (const std::exception& e) {
            detail = e.what();
        }
        if (!pass) ++failed;
        out << (pass ? "PASS  " : "FAIL  ") << name << (detail.empty() ? "" : "  " + detail) << '\n';
    };

    check("config", [&] {
        cfg.validate();
        return std::string();
    });
    check("rho_positive", [&] {
        const double rho = cfg.system.rho();
        return rho > 0.0 ? "ok rho=" + fmt(rho, 3) : "mse_max - bias2 = " + fmt(rho, 3) + " is not positive";
    });
    check("power_grid", [&] {
        const PowerGrid g = build_power_grid(cfg.grid.p_min_db, cfg.grid.p_max_db, cfg.grid.delta_db);
        const double top = to_db(g.max());
        if (std::abs(top - cfg.grid.p_max_db) > 1e-9) return "top level " + fmt(top, 12) + " dB misses p_max_db";
        for (int q = 0; q < g.size(); ++q)
            if (std::abs(to_db(g.level(q)) - (cfg.grid.p_min_db + q * cfg.grid.delta_db)) > 1e-9)
                return "level " + std::to_string(q) + " off its dB position";
        return "ok Q=" + std::to_string(g.size());
    });
    check("quantizer_roundtrip", [&] {
        const QuantizerSpec q = make_quantizer(cfg.feedback.B, cfg.feedback.gamma_min_db, cfg.feedback.gamma_max_db);
        const double step = resolution(q);
        // Excess over the floor from 0 dB up to the range top: decoded value within half a step.
        const double top = to_db(q.gamma_max - q.gamma_min);
        for (int i = 0; i <= 200; ++i) {
            const double excess_db = top * i / 200.0;
            const double g = q.gamma_min + from_db(excess_db);
            const double back = to_db(decode(encode(g, q), q));
            if (std::abs(back - excess_db) > step / 2 + 1e-9) return "excess " + fmt(excess_db) + " dB decodes to " + fmt(back) + " dB";
        }
        int prev = 0;
        for (int i = 0; i <= 400; ++i) {
            const int idx = encode(q.gamma_min * std::pow(q.gamma_max * 2 / q.gamma_min, i / 400.0), q);
            if (idx < prev) return std::string("encode not monotone");
            prev = idx;
        }
        return "ok step=" + fmt(step) + " dB, max index " + std::to_string(max_reachable_index(q));
    });
    check("beta_oracle", [&] {
        const int a = cfg.system.M * (cfg.system.V - 1), b = cfg.system.M;
        double worst = 0.0;
        for (double x : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999}) {
            const double lib = incomplete_beta(x, a, b), ref = binomial_tail(x, a, b);
            worst = std::max(worst, std::abs(lib - ref) / std::max(ref, 1e-300));
        }
        return worst < 1e-10 ? "ok max rel err " + fmt(worst * 1e12, 3) + "e-12" : "max rel err " + std::to_string(worst);
    });
    check("gamma_req_arithmetic", [&] {
        const SystemConfig& s = cfg.system;
        const double lib = gamma_req(s.N, s.M, s.V, s.rho());
        const double pi = std::acos(-1.0);
        const double ref = 3.0 * s.N * s.N / (2.0 * s.M * pi * pi * (double(s.V) * s.V - 1.0) * s.rho());
        if (std::abs(lib - ref) > 1e-12 * ref) return std::string("mismatch");
        return "ok " + fmt(to_db(lib)) + " dB";
    });
    out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
    return failed == 0 ? ok : failure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy-efficient OFDMA ranging simulator"};
    app.set_version_flag("--version", build_version());
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--config", c.config_path, "key = value config file");
    app.add_option("--seed", c.seed, "RNG seed (default: $RANGING_SIM_SEED, then 1)");
    app.add_option("--outdir", c.outdir, "Directory for data files")->capture_default_str();
    app.add_option("--jobs", c.jobs, "Worker threads, 0 = all available")->capture_default_str()->check(CLI::NonNegativeNumber);
    app.add_option("--set", c.overrides, "Config override KEY=VALUE (repeatable, last wins)");

    auto* calibrate = app.add_subcommand("calibrate", "Print the derived constants");

    GneOptions go;
    auto* gne = app.add_subcommand("gne", "Enumerate equilibria of random instances");
    gne->add_option("--K", go.K, "Terminals")->capture_default_str();
    gne->add_option("--delta-db", go.delta_db, "Power step in dB (default: grid.delta_db)");
    gne->add_option("--trials", go.trials, "Random instances")->capture_default_str();

    RunOptions ro;
    auto* runc = app.add_subcommand("run", "One synchronization session with a JSON-lines trace");
    runc->add_option("--algorithm", ro.algorithm, "dlf_brsa | brsa | dsa | beb_dsa")->capture_default_str();
    runc->add_option("--K", ro.K, "Terminals")->capture_default_str();
    runc->add_flag("--unquantized", ro.unquantized, "dlf_brsa without feedback rounding");
    runc->add_option("--d1", ro.d1, "Pin terminal 0 at this distance (fraction of R)");
    runc->add_option("--max-frames", ro.max_frames, "Frame cap (default: sync.max_frames)");

    SweepOptions so;
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep for one figure, CSV + metadata");
    std::string ids;
    for (const auto& id : figure_ids()) ids += (ids.empty() ? "" : " | ") + id;
    sweep->add_option("--figure", so.figure, ids)->required();
    sweep->add_option("--trials", so.trials, "Trials per point");
    sweep->add_option("--K", so.K_values, "Terminal counts");
    sweep->add_option("--delta-db", so.deltas, "Power steps (equilibrium figures)");
    sweep->add_option("--B", so.B_values, "Feedback bits, 0 = unrounded (power/iters vs K)");
    sweep->add_option("--distances", so.distances, "d1/R values (distance figures)");
    sweep->add_option("--variants", so.variants, "Subset of dlf_brsa dsa beb_dsa (distance figures)");
    sweep->add_option("--K-fixed", so.K_fixed, "Terminals in distance figures");

    auto* validate = app.add_subcommand("validate", "Fast invariant checks on a config");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return usage;
    }

    try {
        if (*calibrate) return cmd_calibrate(c, out, err);
        if (*gne) return cmd_gne(c, go, out, err);
        if (*runc) return cmd_run(c, ro, out, err);
        if (*sweep) return cmd_sweep(c, so, out, err);
        if (*validate) return cmd_validate(c, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    return usage;
}

}  // namespace ranging::cli
