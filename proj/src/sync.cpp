// SPDX-License-Identifier: Apache-2.0

#include "ranging/sync.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "ranging/errors.hpp"

namespace ranging {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::dlf_brsa: return "dlf_brsa";
        case Algorithm::brsa: return "brsa";
        case Algorithm::dsa: return "dsa";
        case Algorithm::beb_dsa: return "beb_dsa";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return c == '-' ? '_' : std::tolower(c); });
    if (n == "dlf_brsa") return Algorithm::dlf_brsa;
    if (n == "brsa") return Algorithm::brsa;
    if (n == "dsa") return Algorithm::dsa;
    if (n == "beb_dsa") return Algorithm::beb_dsa;
    throw ConfigError("unknown algorithm '" + name + "' (expected one of: dlf_brsa, brsa, dsa, beb_dsa)");
}

STRuntime make_runtime(const PowerGrid& grid, int theta, int code_id) {
    STRuntime st;
    st.q = 0;
    st.power = grid.level(0);
    st.theta_true = theta;
    st.code_id = code_id;
    return st;
}

bool exit_rule(bool detected, double mu, double gamma_req) { return detected && mu > gamma_req; }

namespace {

bool try_exit(STRuntime& st, bool detected, double mu, double gamma_req, int n) {
    if (!exit_rule(detected, mu, gamma_req)) return false;
    st.exited = true;
    st.n_exit = n;
    return true;
}

void set_level(STRuntime& st, const PowerGrid& grid, int q) {
    st.q = q;
    st.power = grid.level(q);
}

}  // namespace

void dlf_brsa_update(STRuntime& st, bool detected, double mu, const PowerGrid& grid, const DetectionCurve& curve,
                     const QoS& qos, int n, double T) {
    if (try_exit(st, detected, mu, qos.gamma_req, n)) return;
    // nu estimated as mu / p_k[n]
    set_level(st, grid, best_response_index(mu / st.power, grid, curve, qos.gamma_req, T));
}

void dlf_brsa_update(STRuntime& st, const FeedbackMessage& msg, const QuantizerSpec& spec, const PowerGrid& grid,
                     const DetectionCurve& curve, const QoS& qos, int n, double T) {
    dlf_brsa_update(st, msg.detected, decode(msg.index, spec), grid, curve, qos, n, T);
}

void brsa_update(STRuntime& st, bool detected, double gamma_hat, double gamma_star, double gamma_req, double p_min,
                 double p_max, int n) {
    if (try_exit(st, detected, gamma_hat, gamma_req, n)) return;
    if (!(gamma_hat > 0.0)) return;
    st.power = std::clamp(gamma_star * st.power / gamma_hat, p_min, p_max);
}

void dsa_update(STRuntime& st, bool detected, double mu, double gamma_req, const PowerGrid& grid, int n) {
    if (try_exit(st, detected, mu, gamma_req, n)) return;
    set_level(st, grid, std::min(st.q + 1, grid.size() - 1));
}

void beb_dsa_update(STRuntime& st, bool detected, double mu, double gamma_req, const PowerGrid& grid, int cmax,
                    Rng& rng, int n) {
    if (try_exit(st, detected, mu, gamma_req, n)) return;
    if (st.backoff_remaining > 0) {
        --st.backoff_remaining;
        return;
    }
    set_level(st, grid, std::min(st.q + 1, grid.size() - 1));
    std::geometric_distribution<int> geo(std::ldexp(1.0, -st.backoff_round));
    const int wait = 1 + geo(rng);
    st.backoff_remaining = wait - 1;
    st.backoff_round = std::min(st.backoff_round + 1, cmax);
}

SessionTrace run_session(const Scenario& sc, const Deployment& dep, const std::vector<ChannelRealization>& channels,
                         const AlgorithmKind& alg, Rng& rng, int max_frames) {
    const RangingReceiver rx(sc.cfg.system);
    return run_session(sc, dep, channels, alg, rng, max_frames, rx);
}

SessionTrace run_session(const Scenario& sc, const Deployment& dep, const std::vector<ChannelRealization>& channels,
                         const AlgorithmKind& alg, Rng& rng, int max_frames, const RangingReceiver& rx) {
    const SystemConfig& sys = sc.cfg.system;
    const int K = dep.size();
    if (static_cast<int>(channels.size()) != K)
        throw std::invalid_argument("run_session: one channel realization per terminal is required");
    if (max_frames < 1) throw ConfigError("run_session: max_frames must be at least 1");
    const int n_codes = sc.cfg.sync.codes;
    if (n_codes < K) throw ConfigError("run_session: sync.codes must be at least the number of terminals");

    const CodeBook book = make_codebook(n_codes, sys.M * sys.V, rng);
    std::uniform_int_distribution<int> offset(0, static_cast<int>(std::floor(sys.theta_max)));
    std::vector<STRuntime> st;
    for (int k = 0; k < K; ++k) st.push_back(make_runtime(sc.grid, offset(rng), k));

    const bool quantized = alg.kind != Algorithm::brsa && !(alg.kind == Algorithm::dlf_brsa && alg.unquantized);
    const int bits = quantized ? frame_feedback_bits(sc.quantizer.B, n_codes) : -1;
    const double target = sc.gamma_star();

    SessionTrace trace;
    trace.algorithm = to_string(alg.kind);
    if (alg.kind == Algorithm::dlf_brsa && alg.unquantized) trace.algorithm += "_unquantized";

    std::vector<int> owner(n_codes, -1);
    for (int k = 0; k < K; ++k) owner[st[k].code_id] = k;
    std::vector<Emitter> emitters;
    std::vector<CodeReport> reports(n_codes);

    for (int n = 0; n < max_frames; ++n) {
        emitters.clear();
        for (int k = 0; k < K; ++k)
            if (!st[k].exited) emitters.push_back(Emitter{&book.codes[st[k].code_id], st[k].power, &channels[k], st[k].theta_true});
        if (emitters.empty()) break;

        const TileObservation obs = synthesize_tiles(sys, emitters, rng);
        const double energy = obs.energy();
        for (int c = 0; c < n_codes; ++c) {
            reports[c] = rx.process(obs, book.codes[c], sc.lambda, energy);
            const int k = owner[c];
            if (reports[c].detected && (k < 0 || st[k].exited)) ++trace.false_alarms;
        }

        for (int k = 0; k < K; ++k) {
            STRuntime& s = st[k];
            if (s.exited) continue;
            const CodeReport& rep = reports[s.code_id];
            s.theta_hat = rep.timing.theta_hat;
            s.power_history.push_back(s.power);

            double mu;
            if (quantized)
                mu = decode(encode(rep.sinr_hat, sc.quantizer), sc.quantizer);
            else if (alg.kind == Algorithm::brsa)
                mu = rep.sinr_hat;
            else
                mu = decode_unrounded(rep.sinr_hat, sc.quantizer);
            s.mu_history.push_back(mu);

            switch (alg.kind) {
                case Algorithm::dlf_brsa:
                    dlf_brsa_update(s, rep.detected, mu, sc.grid, sc.curve, sc.qos, n, sys.T);
                    break;
                case Algorithm::brsa:
                    brsa_update(s, rep.detected, mu, target, sc.qos.gamma_req, sc.grid.min(), sc.grid.max(), n);
                    break;
                case Algorithm::dsa:
                    dsa_update(s, rep.detected, mu, sc.qos.gamma_req, sc.grid, n);
                    break;
                case Algorithm::beb_dsa:
                    beb_dsa_update(s, rep.detected, mu, sc.qos.gamma_req, sc.grid, alg.beb_cmax, rng, n);
                    break;
            }
        }
        trace.feedback_bits.push_back(bits);
        trace.frames = n + 1;
    }

    trace.st.resize(K);
    for (int k = 0; k < K; ++k) {
        STTrace& t = trace.st[k];
        t.n_exit = st[k].n_exit;
        t.powers = std::move(st[k].power_history);
        t.mu = std::move(st[k].mu_history);
        t.theta_true = st[k].theta_true;
        t.theta_hat = st[k].theta_hat;
        const double e = t.theta_hat - t.theta_true;
        t.sq_err = e * e;
        if (!t.n_exit) trace.censored = true;
    }
    return trace;
}

SessionMetrics session_metrics(const SessionTrace& trace, double Tf, std::optional<int> only) {
    SessionMetrics m;
    double p_sum = 0.0;
    double n_sum = 0.0;
    int exited = 0;
    for (int k = 0; k < static_cast<int>(trace.st.size()); ++k) {
        const STTrace& t = trace.st[k];
        STMetrics s;
        s.censored = !t.n_exit.has_value();
        double sum = 0.0;
        for (double p : t.powers) sum += p;
        s.energy = Tf * sum;
        if (!t.powers.empty()) {
            s.p_avg = sum / t.powers.size();
            s.p_avg_db = to_db(s.p_avg);
        }
        s.n_exit = t.n_exit.value_or(-1);
        s.sq_err = t.sq_err;
        m.st.push_back(s);

        if (only && *only != k) continue;
        if (s.censored) {
            ++m.censored;
            continue;
        }
        p_sum += s.p_avg;
        n_sum += s.n_exit;
        ++exited;
    }
    if (exited > 0) {
        m.defined = true;
        m.p_avg_db = to_db(p_sum / exited);
        m.n_exit_avg = n_sum / exited;
        m.T_avg = Tf * m.n_exit_avg;
    }
    return m;
}

void write_trace_jsonl(std::ostream& os, const SessionTrace& trace, long trial) {
    for (std::size_t k = 0; k < trace.st.size(); ++k) {
        const STTrace& t = trace.st[k];
        nlohmann::ordered_json j;
        j["trial"] = trial;
        j["k"] = k;
        j["algorithm"] = trace.algorithm;
        if (t.n_exit)
            j["n_exit"] = *t.n_exit;
        else
            j["n_exit"] = nullptr;
        double sum = 0.0;
        for (double p : t.powers) sum += p;
        if (t.powers.empty())
            j["p_avg_db"] = nullptr;
        else
            j["p_avg_db"] = to_db(sum / t.powers.size());
        j["theta_true"] = t.theta_true;
        j["theta_hat"] = t.theta_hat;
        j["sq_err"] = t.sq_err;
        std::vector<double> db;
        for (double p : t.powers) db.push_back(to_db(p));
        j["powers"] = db;
        os << j.dump() << '\n';
    }
}

}  // namespace ranging
