// SPDX-License-Identifier: Apache-2.0

#include "ranging/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ranging/errors.hpp"
#include "ranging/game.hpp"
#include "ranging/parallel.hpp"
#include "ranging/phy.hpp"
#include "ranging/rng.hpp"
#include "ranging/scenario.hpp"
#include "ranging/sync.hpp"

#ifndef RANGING_GIT_DESCRIBE
#define RANGING_GIT_DESCRIBE "unknown"
#endif

namespace ranging {

namespace {

const std::vector<std::pair<FigureId, std::string>>& figure_table() {
    static const std::vector<std::pair<FigureId, std::string>> t = {
        {FigureId::nmse_vs_K, "nmse_vs_K"},   {FigureId::welfare_vs_K, "welfare_vs_K"},
        {FigureId::power_vs_K, "power_vs_K"}, {FigureId::iters_vs_K, "iters_vs_K"},
        {FigureId::power_vs_d, "power_vs_d"}, {FigureId::time_vs_d, "time_vs_d"},
        {FigureId::mse_vs_d, "mse_vs_d"},     {FigureId::gne_counts, "gne_counts"},
    };
    return t;
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return nan_v;
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

SweepRow make_row(std::vector<std::string> keys, std::string metric, const std::vector<double>& vals, long censored) {
    return SweepRow{std::move(keys), std::move(metric), mean_of(vals), std_of(vals), static_cast<long>(vals.size()),
                    censored};
}

// Powers: dB of the linear mean, spread of the per-sample dB values.
SweepRow make_db_row(std::vector<std::string> keys, std::string metric, const std::vector<double>& linear,
                     long censored) {
    std::vector<double> db;
    for (double x : linear) db.push_back(to_db(x));
    SweepRow r = make_row(std::move(keys), std::move(metric), db, censored);
    r.mean = linear.empty() ? nan_v : to_db(mean_of(linear));
    return r;
}

SweepResult keep_metrics(SweepResult r, const std::vector<std::string>& metrics) {
    std::vector<SweepRow> kept;
    for (auto& row : r.rows)
        for (const auto& m : metrics)
            if (row.metric == m) kept.push_back(std::move(row));
    r.rows = std::move(kept);
    return r;
}

void require(const SweepSpec& spec, bool ok, const std::string& what) {
    if (!ok) throw ConfigError("sweep " + to_string(spec.figure) + ": " + what);
}

std::vector<double> sample_gains(const SystemConfig& sys, const Deployment& dep, Rng& rng,
                                 std::vector<ChannelRealization>* channels = nullptr) {
    std::vector<double> alphas;
    for (double d : dep.distances) {
        ChannelRealization ch = sample_channel(sys, d, rng);
        alphas.push_back(ch.alpha);
        if (channels) channels->push_back(std::move(ch));
    }
    return alphas;
}

// ---- equilibrium study ----

struct EqTrial {
    std::vector<double> count;
    std::vector<double> nmse;
    std::vector<double> welfare;
    std::vector<char> usable;  // a smallest GNE exists and the continuous GNE was computed
};

// Rows for one K over the given steps. `deltas[i] < 0` marks a gap.
void equilibrium_rows(const SweepSpec& spec, const Scenario& sc, int K, const std::vector<double>& deltas,
                      const std::vector<std::string>& delta_labels, SweepResult& out, bool counts_only) {
    const auto budget = spec.base.game.enum_budget;
    const auto trials = map_trials<EqTrial>(spec.trials, spec.jobs, [&](int t) {
        Rng rng = make_stream(spec.seed, {hash_tag("equilibria"), static_cast<std::uint64_t>(K),
                                          static_cast<std::uint64_t>(t)});
        const Deployment dep = sample_deployment(K, sc.cfg.system.R, rng);
        const std::vector<double> alphas = sample_gains(sc.cfg.system, dep, rng);
        EqTrial o;
        o.count.assign(deltas.size(), 0.0);
        o.nmse.assign(deltas.size(), 0.0);
        o.welfare.assign(deltas.size(), 0.0);
        o.usable.assign(deltas.size(), 0);
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (deltas[i] < 0) continue;
            const GameInstance g = sc.game(alphas, deltas[i]);
            const auto set = enumerate_gne(g, budget);
            o.count[i] = static_cast<double>(set.size());
            if (counts_only || set.empty()) continue;
            IndexProfile low;
            try {
                low = smallest_gne(set);
            } catch (const EquilibriumError&) {
                continue;
            }
            const PowerProfile pc = continuous_gne(g).powers;
            const PowerProfile pd = to_powers(low, g.grid);
            o.nmse[i] = nmse(pc, pd);
            o.welfare[i] = social_welfare(pd, g) / social_welfare(pc, g);
            o.usable[i] = 1;
        }
        return o;
    });

    for (std::size_t i = 0; i < deltas.size(); ++i) {
        std::vector<std::string> keys{std::to_string(K), delta_labels[i]};
        if (deltas[i] < 0) {
            for (const char* m : {"gne_count", "nmse", "welfare_ratio"}) {
                out.rows.push_back(SweepRow{keys, m, nan_v, 0.0, 0, spec.trials});
                if (counts_only) break;
            }
            continue;
        }
        std::vector<double> count, nm, wf;
        long dropped = 0;
        for (const auto& o : trials) {
            count.push_back(o.count[i]);
            if (counts_only) continue;
            if (o.usable[i]) {
                nm.push_back(o.nmse[i]);
                wf.push_back(o.welfare[i]);
            } else {
                ++dropped;
            }
        }
        out.rows.push_back(make_row(keys, "gne_count", count, 0));
        if (counts_only) continue;
        out.rows.push_back(make_row(keys, "nmse", nm, dropped));
        out.rows.push_back(make_row(keys, "welfare_ratio", wf, dropped));
    }
}

int levels_for(const Config& c, double delta_db) {
    return build_power_grid(c.grid.p_min_db, c.grid.p_max_db, delta_db).size();
}

// ---- session sweeps ----

struct Variant {
    std::string name;
    Scenario scenario;
    AlgorithmKind alg;
};

Scenario with_bits(const Config& base, int B) {
    Config c = base;
    if (B > 0) c.feedback.B = B;
    return Scenario(c);
}

struct SessionSample {
    std::vector<std::vector<STMetrics>> per_variant;
};

void session_rows(const std::vector<Variant>& variants, const std::vector<SessionSample>& samples,
                  const std::string& point, double Tf, std::optional<int> only, SweepResult& out) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::vector<double> p, n, t, e, se;
        long censored = 0;
        for (const auto& s : samples)
            for (std::size_t k = 0; k < s.per_variant[v].size(); ++k) {
                if (only && static_cast<int>(k) != *only) continue;
                const STMetrics& m = s.per_variant[v][k];
                if (m.censored) {
                    ++censored;
                    continue;
                }
                p.push_back(m.p_avg);
                n.push_back(m.n_exit);
                t.push_back(1e3 * Tf * m.n_exit);
                e.push_back(m.energy);
                se.push_back(m.sq_err);
            }
        const std::vector<std::string> keys{point, variants[v].name};
        out.rows.push_back(make_db_row(keys, "p_avg_db", p, censored));
        out.rows.push_back(make_row(keys, "n_exit_avg", n, censored));
        out.rows.push_back(make_row(keys, "T_avg_ms", t, censored));
        out.rows.push_back(make_row(keys, "energy", e, censored));
        if (only) out.rows.push_back(make_row(keys, "mse_theta", se, censored));
    }
}

}  // namespace

std::string to_string(FigureId f) {
    for (const auto& [id, name] : figure_table())
        if (id == f) return name;
    return "unknown";
}

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& e : figure_table()) v.push_back(e.second);
        return v;
    }();
    return ids;
}

FigureId parse_figure(const std::string& name) {
    for (const auto& [id, n] : figure_table())
        if (n == name) return id;
    std::string valid;
    for (const auto& n : figure_ids()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown figure id '" + name + "' (valid: " + valid + ")");
}

SweepSpec default_spec(FigureId f, const Config& base) {
    SweepSpec s;
    s.figure = f;
    s.base = base;
    switch (f) {
        case FigureId::nmse_vs_K:
        case FigureId::welfare_vs_K:
            s.trials = 500;
            s.K_values = {1, 2, 3, 4};
            s.delta_db_values = {0.5, 1.0, 2.0};
            break;
        case FigureId::gne_counts:
            s.trials = 500;
            s.K_values = {2, 3, 4, 5};
            s.delta_db_values = {1.0};
            break;
        case FigureId::power_vs_K:
        case FigureId::iters_vs_K:
            s.trials = 1000;
            s.K_values = {1, 2, 3, 4, 5, 6, 7, 8};
            s.B_values = {1, 2, 3, 8, 0};
            break;
        case FigureId::power_vs_d:
        case FigureId::time_vs_d:
        case FigureId::mse_vs_d:
            s.trials = 1000;
            s.K_fixed = 5;
            s.distances = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
            break;
    }
    return s;
}

const SweepRow* SweepResult::find(const std::vector<std::string>& keys, const std::string& metric) const {
    for (const auto& r : rows) {
        if (r.metric != metric) continue;
        bool match = true;
        for (std::size_t i = 0; i < keys.size() && i < r.keys.size(); ++i)
            if (!keys[i].empty() && keys[i] != r.keys[i]) match = false;
        if (match) return &r;
    }
    return nullptr;
}

SweepResult run_equilibrium_sweep(const SweepSpec& spec) {
    require(spec, spec.trials >= 1, "trials must be positive");
    require(spec, !spec.K_values.empty() && !spec.delta_db_values.empty(), "K and delta lists must be nonempty");
    const Scenario sc(spec.base);
    SweepResult out;
    out.figure = to_string(spec.figure);
    out.key_columns = {"K", "delta_db"};
    for (int K : spec.K_values) {
        require(spec, K >= 1, "K must be positive");
        if (!existence_condition(K, sc.cfg.system.V, sc.gamma_star())) {
            out.notes.push_back("K=" + std::to_string(K) + ": no continuous GNE (gamma*(K-1) >= V), rows left empty");
            std::vector<double> gaps(spec.delta_db_values.size(), -1.0);
            std::vector<std::string> labels;
            for (double d : spec.delta_db_values) labels.push_back(num(d));
            equilibrium_rows(spec, sc, K, gaps, labels, out, false);
            continue;
        }
        std::vector<double> deltas;
        std::vector<std::string> labels;
        for (double d : spec.delta_db_values) {
            labels.push_back(num(d));
            const auto need = profile_count(levels_for(spec.base, d), K);
            if (need > spec.base.game.enum_budget) {
                out.notes.push_back("K=" + std::to_string(K) + " delta_db=" + num(d) + ": " +
                                    std::to_string(need) + " profiles exceed the enumeration budget, gap row");
                deltas.push_back(-1.0);
            } else {
                deltas.push_back(d);
            }
        }
        equilibrium_rows(spec, sc, K, deltas, labels, out, false);
    }
    return out;
}

SweepResult run_fig_nmse(const SweepSpec& spec) { return keep_metrics(run_equilibrium_sweep(spec), {"nmse"}); }

SweepResult run_fig_welfare(const SweepSpec& spec) {
    return keep_metrics(run_equilibrium_sweep(spec), {"welfare_ratio"});
}

SweepResult run_gne_counts(const SweepSpec& spec) {
    require(spec, spec.trials >= 1, "trials must be positive");
    require(spec, !spec.K_values.empty(), "K list must be nonempty");
    const Scenario sc(spec.base);
    const double step = spec.delta_db_values.empty() ? spec.base.grid.delta_db : spec.delta_db_values.front();
    constexpr double fallback = 2.0;
    SweepResult out;
    out.figure = to_string(spec.figure);
    out.key_columns = {"K", "delta_db"};
    for (int K : spec.K_values) {
        require(spec, K >= 1, "K must be positive");
        double d = step;
        const auto budget = spec.base.game.enum_budget;
        if (profile_count(levels_for(spec.base, d), K) > budget) {
            if (profile_count(levels_for(spec.base, fallback), K) <= budget) {
                out.notes.push_back("K=" + std::to_string(K) + ": delta_db=" + num(step) +
                                    " exceeds the enumeration budget, substituted delta_db=" + num(fallback));
                d = fallback;
            } else {
                out.notes.push_back("K=" + std::to_string(K) + ": beyond the enumeration budget even at delta_db=" +
                                    num(fallback) + ", gap row");
                d = -1.0;
            }
        }
        equilibrium_rows(spec, sc, K, {d}, {num(d < 0 ? step : d)}, out, true);
    }
    return out;
}

SweepResult run_session_K_sweep(const SweepSpec& spec) {
    require(spec, spec.trials >= 1, "trials must be positive");
    require(spec, !spec.K_values.empty(), "K list must be nonempty");
    require(spec, !spec.B_values.empty() || spec.include_brsa, "no algorithm variants selected");
    std::vector<Variant> variants;
    for (int B : spec.B_values) {
        require(spec, B >= 0, "B must be non-negative (0 = unquantized)");
        variants.push_back(Variant{B == 0 ? "dlf_Binf" : "dlf_B" + std::to_string(B), with_bits(spec.base, B),
                                   AlgorithmKind::dlf(B == 0)});
    }
    if (spec.include_brsa) variants.push_back(Variant{"brsa", Scenario(spec.base), AlgorithmKind::brsa()});

    const SystemConfig& sys = spec.base.system;
    const RangingReceiver rx(sys);
    SweepResult out;
    out.figure = to_string(spec.figure);
    out.key_columns = {"K", "variant"};
    out.notes.push_back(std::string("feedback decode mode: ") +
                        (spec.base.feedback.add_floor_offset ? "floor offset restored" : "literal"));
    for (int K : spec.K_values) {
        require(spec, K >= 1 && K <= spec.base.sync.codes, "K must lie in [1, sync.codes]");
        const auto samples = map_trials<SessionSample>(spec.trials, spec.jobs, [&](int t) {
            const std::uint64_t tag = hash_tag("sessions_K");
            Rng rng = make_stream(spec.seed, {tag, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(t)});
            const Deployment dep = sample_deployment(K, sys.R, rng);
            std::vector<ChannelRealization> ch;
            sample_gains(sys, dep, rng, &ch);
            SessionSample s;
            for (const auto& v : variants) {
                Rng srng =
                    make_stream(spec.seed, {tag, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(t), 1});
                const SessionTrace tr = run_session(v.scenario, dep, ch, v.alg, srng, spec.base.sync.max_frames, rx);
                s.per_variant.push_back(session_metrics(tr, sys.Tf).st);
            }
            return s;
        });
        session_rows(variants, samples, std::to_string(K), sys.Tf, std::nullopt, out);
    }
    return out;
}

SweepResult run_fig_power_vs_K(const SweepSpec& spec) {
    return keep_metrics(run_session_K_sweep(spec), {"p_avg_db", "energy"});
}

SweepResult run_fig_iters_vs_K(const SweepSpec& spec) {
    return keep_metrics(run_session_K_sweep(spec), {"n_exit_avg", "T_avg_ms"});
}

SweepResult run_fig_distance(const SweepSpec& spec) {
    require(spec, spec.trials >= 1, "trials must be positive");
    require(spec, !spec.distances.empty(), "distance list must be nonempty");
    require(spec, spec.K_fixed >= 1 && spec.K_fixed <= spec.base.sync.codes, "K must lie in [1, sync.codes]");
    const int cmax = spec.base.sync.beb_cmax;
    std::vector<Variant> variants;
    const Scenario base(spec.base);
    for (const auto& [name, alg] : {std::pair{"dlf_brsa", AlgorithmKind::dlf()}, std::pair{"dsa", AlgorithmKind::dsa()},
                                    std::pair{"beb_dsa", AlgorithmKind::beb(cmax)}})
        if (spec.variants.empty() || std::find(spec.variants.begin(), spec.variants.end(), name) != spec.variants.end())
            variants.push_back(Variant{name, base, alg});
    require(spec, !variants.empty(), "no known variant selected (dlf_brsa, dsa, beb_dsa)");
    const SystemConfig& sys = spec.base.system;
    const RangingReceiver rx(sys);
    const int K = spec.K_fixed;
    SweepResult out;
    out.figure = to_string(spec.figure);
    out.key_columns = {"d_over_R", "variant"};
    out.notes.push_back(std::string("feedback decode mode: ") +
                        (spec.base.feedback.add_floor_offset ? "floor offset restored" : "literal"));
    for (std::size_t di = 0; di < spec.distances.size(); ++di) {
        const double d1 = spec.distances[di];
        require(spec, d1 > 0.0, "distances must be positive");
        const auto samples = map_trials<SessionSample>(spec.trials, spec.jobs, [&](int t) {
            const std::uint64_t tag = hash_tag("distance");
            Rng rng = make_stream(spec.seed, {tag, static_cast<std::uint64_t>(di), static_cast<std::uint64_t>(t)});
            Deployment dep;
            dep.distances.push_back(d1 * sys.R);
            if (K > 1) {
                const Deployment others = sample_deployment(K - 1, sys.R, rng);
                dep.distances.insert(dep.distances.end(), others.distances.begin(), others.distances.end());
            }
            std::vector<ChannelRealization> ch;
            sample_gains(sys, dep, rng, &ch);
            SessionSample s;
            for (const auto& v : variants) {
                Rng srng =
                    make_stream(spec.seed, {tag, static_cast<std::uint64_t>(di), static_cast<std::uint64_t>(t), 1});
                const SessionTrace tr = run_session(v.scenario, dep, ch, v.alg, srng, spec.base.sync.max_frames, rx);
                s.per_variant.push_back(session_metrics(tr, sys.Tf).st);
            }
            return s;
        });
        session_rows(variants, samples, num(d1), sys.Tf, 0, out);
    }
    return out;
}

SweepResult run_sweep(const SweepSpec& spec) {
    switch (spec.figure) {
        case FigureId::nmse_vs_K: return run_fig_nmse(spec);
        case FigureId::welfare_vs_K: return run_fig_welfare(spec);
        case FigureId::gne_counts: return run_gne_counts(spec);
        case FigureId::power_vs_K: return run_fig_power_vs_K(spec);
        case FigureId::iters_vs_K: return run_fig_iters_vs_K(spec);
        case FigureId::power_vs_d: return keep_metrics(run_fig_distance(spec), {"p_avg_db", "energy"});
        case FigureId::time_vs_d: return keep_metrics(run_fig_distance(spec), {"T_avg_ms", "n_exit_avg"});
        case FigureId::mse_vs_d: return keep_metrics(run_fig_distance(spec), {"mse_theta"});
    }
    throw ConfigError("unhandled figure id");
}

// ---- CSV ----

namespace {

const std::vector<std::string> metric_columns = {"metric", "mean", "std", "count", "censored"};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

double parse_number(const std::string& s) {
    if (s == "nan") return nan_v;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("csv: bad number '" + s + "'");
    return v;
}

}  // namespace

std::string to_csv(const SweepResult& r) {
    std::string s;
    std::vector<std::string> header = r.key_columns;
    header.insert(header.end(), metric_columns.begin(), metric_columns.end());
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + csv_field(header[i]);
    s += '\n';
    for (const auto& row : r.rows) {
        for (const auto& k : row.keys) s += csv_field(k) + ",";
        s += csv_field(row.metric) + "," + num(row.mean) + "," + num(row.std) + "," + std::to_string(row.count) +
             "," + std::to_string(row.censored) + "\n";
    }
    return s;
}

SweepResult parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    SweepResult r;
    if (!std::getline(in, line)) return r;
    auto header = split_csv_line(line);
    if (header.size() < metric_columns.size()) throw std::runtime_error("csv: header too short");
    const std::size_t nkeys = header.size() - metric_columns.size();
    r.key_columns.assign(header.begin(), header.begin() + nkeys);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size()) throw std::runtime_error("csv: row width differs from header");
        SweepRow row;
        row.keys.assign(f.begin(), f.begin() + nkeys);
        row.metric = f[nkeys];
        row.mean = parse_number(f[nkeys + 1]);
        row.std = parse_number(f[nkeys + 2]);
        row.count = std::stol(f[nkeys + 3]);
        row.censored = std::stol(f[nkeys + 4]);
        r.rows.push_back(std::move(row));
    }
    return r;
}

void emit_csv(const SweepResult& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_csv(r);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string build_version() { return RANGING_GIT_DESCRIBE; }

void emit_metadata(const SweepSpec& spec, const SweepResult& r, double wall_seconds, const std::string& path) {
    nlohmann::ordered_json j;
    j["figure"] = r.figure;
    j["seed"] = spec.seed;
    j["trials"] = spec.trials;
    j["K_values"] = spec.K_values;
    j["delta_db_values"] = spec.delta_db_values;
    j["B_values"] = spec.B_values;
    j["distances"] = spec.distances;
    j["K_fixed"] = spec.K_fixed;
    j["variants"] = spec.variants;
    j["notes"] = r.notes;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config_snapshot(spec.base)) cfg[k] = v;
    j["config"] = cfg;
    j["build"] = build_version();
    j["wall_time_s"] = wall_seconds;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace ranging
