// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ranging/feedback.hpp"
#include "ranging/game.hpp"
#include "ranging/netmodel.hpp"
#include "ranging/phy.hpp"
#include "ranging/scenario.hpp"

namespace ranging {

enum class Algorithm { dlf_brsa, brsa, dsa, beb_dsa };

struct AlgorithmKind {
    Algorithm kind = Algorithm::dlf_brsa;
    // DLF-BRSA only: skip the rounding step of the feedback quantizer (B -> infinity).
    bool unquantized = false;
    int beb_cmax = 6;  // BEB-DSA only

    static AlgorithmKind dlf(bool unquantized = false) { return {Algorithm::dlf_brsa, unquantized, 6}; }
    static AlgorithmKind brsa() { return {Algorithm::brsa, true, 6}; }
    static AlgorithmKind dsa() { return {Algorithm::dsa, false, 6}; }
    static AlgorithmKind beb(int cmax = 6) { return {Algorithm::beb_dsa, false, cmax}; }
};

std::string to_string(Algorithm a);
// dlf_brsa | brsa | dsa | beb_dsa (dashes accepted). Throws ConfigError listing the names.
Algorithm parse_algorithm(const std::string& name);

struct STRuntime {
    int q = 0;                 // grid index (discrete algorithms)
    double power = 0.0;        // p_k[n]
    int theta_true = 0;
    int code_id = 0;
    bool exited = false;
    std::optional<int> n_exit;
    int backoff_remaining = 0;
    int backoff_round = 0;     // c, completed BEB rounds
    std::vector<double> power_history;
    std::vector<double> mu_history;
    int theta_hat = 0;         // last estimate
};

// Starting state: lowest level of the grid.
STRuntime make_runtime(const PowerGrid& grid, int theta, int code_id);

// detected && mu > gamma_req
bool exit_rule(bool detected, double mu, double gamma_req);

// The updates below record nothing in the histories; they either mark the terminal as exited
// at frame n or move its power.
void dlf_brsa_update(STRuntime& st, bool detected, double mu, const PowerGrid& grid, const DetectionCurve& curve,
                     const QoS& qos, int n, double T = 1.0);
void dlf_brsa_update(STRuntime& st, const FeedbackMessage& msg, const QuantizerSpec& spec, const PowerGrid& grid,
                     const DetectionCurve& curve, const QoS& qos, int n, double T = 1.0);
// Continuous proportional update p <- clamp(gamma* p / gamma_hat, p_min, p_max); holds on
// gamma_hat <= 0.
void brsa_update(STRuntime& st, bool detected, double gamma_hat, double gamma_star, double gamma_req, double p_min,
                 double p_max, int n);
void dsa_update(STRuntime& st, bool detected, double mu, double gamma_req, const PowerGrid& grid, int n);
// Holds while backoff_remaining > 0; otherwise steps up one level and draws a new backoff
// n_e ~ Geometric(2^-c) on {1, 2, ...}, waiting n_e - 1 further frames.
void beb_dsa_update(STRuntime& st, bool detected, double mu, double gamma_req, const PowerGrid& grid, int cmax,
                    Rng& rng, int n);

struct STTrace {
    std::optional<int> n_exit;
    std::vector<double> powers;  // p_k[n], n = 0.. last transmitted frame
    std::vector<double> mu;      // feedback value per frame
    int theta_true = 0;
    int theta_hat = 0;           // at exit, or last estimate when censored
    double sq_err = 0.0;         // (theta_hat - theta_true)^2
};

struct SessionTrace {
    std::string algorithm;
    std::vector<STTrace> st;
    int frames = 0;
    std::vector<int> feedback_bits;  // per frame; (1+B)|C|, or -1 when the feedback is unquantized
    int false_alarms = 0;            // detections on codes with no active terminal
    bool censored = false;           // frame cap reached with terminals still active
};

// Runs the frame loop: every code is searched each frame; active terminals get their
// GLRT bit and feedback value and update. Codes, offsets and noise come from rng.
SessionTrace run_session(const Scenario& sc, const Deployment& dep, const std::vector<ChannelRealization>& channels,
                         const AlgorithmKind& alg, Rng& rng, int max_frames);
SessionTrace run_session(const Scenario& sc, const Deployment& dep, const std::vector<ChannelRealization>& channels,
                         const AlgorithmKind& alg, Rng& rng, int max_frames, const RangingReceiver& rx);

struct STMetrics {
    bool censored = false;
    double p_avg = 0.0;     // linear time-average over n = 0..n_exit
    double p_avg_db = 0.0;
    double energy = 0.0;    // Tf * sum of powers
    int n_exit = 0;
    double sq_err = 0.0;
};

struct SessionMetrics {
    std::vector<STMetrics> st;
    bool defined = false;   // at least one designated terminal exited
    double p_avg_db = 0.0;  // dB of the mean linear p_avg
    double n_exit_avg = 0.0;
    double T_avg = 0.0;     // Tf * n_exit_avg
    int censored = 0;
};

// Averages over the designated terminal only when `only` is given.
SessionMetrics session_metrics(const SessionTrace& trace, double Tf, std::optional<int> only = std::nullopt);

// One JSON object per terminal, one per line.
void write_trace_jsonl(std::ostream& os, const SessionTrace& trace, long trial);

}  // namespace ranging
