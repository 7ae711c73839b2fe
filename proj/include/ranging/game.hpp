// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranging/detection.hpp"
#include "ranging/netmodel.hpp"

namespace ranging {

using PowerProfile = std::vector<double>;  // linear powers
using IndexProfile = std::vector<int>;     // 0-based grid indices

struct GameInstance {
    PowerGrid grid;
    std::vector<double> alphas;
    double sigma2 = 1.0;
    int V = 36;
    DetectionCurve curve;
    QoS qos;
    double T = 1.0;

    int K() const { return static_cast<int>(alphas.size()); }
    // Throws ConfigError for K < 1 or a non-positive gain.
    void validate() const;
};

PowerProfile to_powers(const IndexProfile& q, const PowerGrid& grid);

// V alpha_k / (sigma2 + sum_{l != k} alpha_l p_l)
double nu(int k, const PowerProfile& p, const GameInstance& g);
double sinr(int k, const PowerProfile& p, const GameInstance& g);
// Pd(gamma_k) / (p_k T). Throws std::invalid_argument for p_k <= 0.
double utility(int k, const PowerProfile& p, const GameInstance& g);
double social_welfare(const PowerProfile& p, const GameInstance& g);

// Grid indices q with level(q) >= gamma_req / nu_k, ascending. May be empty.
std::vector<int> feasible_set(int k, const PowerProfile& p, const GameInstance& g);

// Best response for a given effective gain nu = gamma_k / p_k: maximize Pd(nu p)/(p T) over
// the feasible levels (all levels when none is feasible), smallest index on ties.
//
// Pd(gamma)/gamma falls, rises to its peak at gamma_tilde and falls again, so on any upper
// segment of the grid the maximum sits at the segment's first level or at one of the two
// levels around gamma_tilde/nu. Only those three are evaluated.
int best_response_index(double nu_k, const GameInstance& g);
int best_response_index(double nu_k, const PowerGrid& grid, const DetectionCurve& curve, double gamma_req,
                        double T = 1.0);
// Same contract, scanning every level. Reference for tests.
int best_response_index_exhaustive(double nu_k, const GameInstance& g);

double best_response(int k, const PowerProfile& p, const GameInstance& g);

// gamma* (K-1) < V
bool existence_condition(int K, int V, double gamma_star);

enum class ExecPolicy { serial, parallel };

// Every profile where each component is its own (tie-broken) best response, sorted
// lexicographically. Throws BudgetError when Q^K exceeds the budget.
std::vector<IndexProfile> enumerate_gne(const GameInstance& g, std::uint64_t budget = 10'000'000,
                                        ExecPolicy policy = ExecPolicy::parallel);

// Q^K, saturating at UINT64_MAX.
std::uint64_t profile_count(int Q, int K);

bool is_gne(const IndexProfile& q, const GameInstance& g);

// Component-wise minimum of the set. Throws EquilibriumError when the set is empty or has no
// member below all others.
IndexProfile smallest_gne(const std::vector<IndexProfile>& set);
// Positions of the members attaining maximal welfare (exact ties included).
std::vector<std::size_t> welfare_maximal(const std::vector<IndexProfile>& set, const GameInstance& g);

struct ContinuousGne {
    PowerProfile powers;
    bool clamped = false;  // some component left [p_min, p_max]
};
// Closed form with gamma_k = gamma* for all k. Throws EquilibriumError when
// existence_condition fails.
ContinuousGne continuous_gne(const GameInstance& g);

// ||pc - pd||^2 / ||pc||^2
double nmse(const PowerProfile& pc, const PowerProfile& pd);

// du_k/dp_k = (gamma Pd'(gamma) - Pd(gamma)) / (p_k^2 T)
double utility_slope(int k, const PowerProfile& p, const GameInstance& g);
// d2u_k/(dp_l dp_k) = -alpha_l gamma^3 Pd''(gamma) / (V alpha_k p_k^3 T)
double cross_partial_analytic(const GameInstance& g, const PowerProfile& p, int k, int l);
// Richardson-extrapolated central difference of utility_slope in p_l.
double cross_partial_fd(const GameInstance& g, const PowerProfile& p, int k, int l);
// cross_partial_fd >= -1e-8
bool supermodularity_check(const GameInstance& g, const PowerProfile& p, int k, int l);

struct DynamicResult {
    IndexProfile profile;
    int steps = 0;       // iterations until the profile stopped changing
    bool converged = false;
};
// Simultaneous best-response iteration from the given start (all lowest levels by default).
DynamicResult best_response_dynamic(const GameInstance& g, int max_steps = 200, IndexProfile start = {});

// JSON array of profiles with indices, powers, SINRs, utilities and welfare.
std::string gne_set_json(const std::vector<IndexProfile>& set, const GameInstance& g);

}  // namespace ranging
