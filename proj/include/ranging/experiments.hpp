// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranging/config.hpp"

namespace ranging {

enum class FigureId { nmse_vs_K, welfare_vs_K, power_vs_K, iters_vs_K, power_vs_d, time_vs_d, mse_vs_d, gne_counts };

std::string to_string(FigureId f);
// Throws ConfigError listing the valid ids.
FigureId parse_figure(const std::string& name);
const std::vector<std::string>& figure_ids();

struct SweepSpec {
    FigureId figure = FigureId::gne_counts;
    int trials = 500;
    std::vector<int> K_values;
    std::vector<double> delta_db_values;  // equilibrium sweeps
    std::vector<int> B_values;            // K sweeps of the session engine; 0 = unquantized feedback
    bool include_brsa = true;
    std::vector<double> distances;        // d1/R
    int K_fixed = 5;                      // distance sweeps
    std::vector<std::string> variants;    // distance sweeps: subset of dlf_brsa, dsa, beb_dsa (empty = all)
    Config base;
    std::uint64_t seed = 1;
    int jobs = 0;                         // 0 = all available
};

// Desk-scale defaults for a figure: 500 trials for equilibrium sweeps, 1000 for session sweeps.
SweepSpec default_spec(FigureId f, const Config& base);

struct SweepRow {
    std::vector<std::string> keys;  // one per SweepResult::key_columns
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    long count = 0;     // samples entering the mean
    long censored = 0;  // samples excluded (censored sessions, dropped instances, gaps)

    bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
    std::string figure;
    std::vector<std::string> key_columns;
    std::vector<SweepRow> rows;
    std::vector<std::string> notes;  // substitutions and gaps, copied into the metadata

    // Rows whose keys match (empty string = wildcard) and metric equals.
    const SweepRow* find(const std::vector<std::string>& keys, const std::string& metric) const;
};

// Equilibrium study per (K, delta): rows gne_count, nmse, welfare_ratio, dropped.
SweepResult run_equilibrium_sweep(const SweepSpec& spec);
SweepResult run_fig_nmse(const SweepSpec& spec);
SweepResult run_fig_welfare(const SweepSpec& spec);
// Mean |E*| per K; Q^K beyond the budget falls back to a 2 dB step (noted).
SweepResult run_gne_counts(const SweepSpec& spec);

// Sessions per (K, variant): rows p_avg_db, n_exit_avg, T_avg_ms, energy.
SweepResult run_session_K_sweep(const SweepSpec& spec);
SweepResult run_fig_power_vs_K(const SweepSpec& spec);
SweepResult run_fig_iters_vs_K(const SweepSpec& spec);

// Terminal 1 pinned at each d1/R: rows p_avg_db, T_avg_ms, mse_theta, n_exit_avg for
// DLF-BRSA, DSA and BEB-DSA.
SweepResult run_fig_distance(const SweepSpec& spec);

// Dispatch on spec.figure; distance figures keep their own metric.
SweepResult run_sweep(const SweepSpec& spec);

std::string to_csv(const SweepResult& r);
SweepResult parse_csv(const std::string& text);
// Throws std::runtime_error on an unwritable path.
void emit_csv(const SweepResult& r, const std::string& path);
void emit_metadata(const SweepSpec& spec, const SweepResult& r, double wall_seconds, const std::string& path);

std::string build_version();

}  // namespace ranging
