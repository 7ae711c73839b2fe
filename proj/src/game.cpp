// SPDX-License-Identifier: Apache-2.0

#include "ranging/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ranging/errors.hpp"

namespace ranging {

void GameInstance::validate() const {
    if (alphas.empty()) throw ConfigError("game instance needs at least one player");
    for (double a : alphas)
        if (!(a > 0.0)) throw ConfigError("game instance: channel gains must be positive");
    if (!(sigma2 > 0.0)) throw ConfigError("game instance: sigma2 must be positive");
    if (!(T > 0.0)) throw ConfigError("game instance: T must be positive");
}

PowerProfile to_powers(const IndexProfile& q, const PowerGrid& grid) {
    PowerProfile p(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) p[k] = grid.level(q[k]);
    return p;
}

double nu(int k, const PowerProfile& p, const GameInstance& g) {
    double interference = g.sigma2;
    for (int l = 0; l < g.K(); ++l)
        if (l != k) interference += g.alphas[l] * p[l];
    return g.V * g.alphas[k] / interference;
}

double sinr(int k, const PowerProfile& p, const GameInstance& g) { return nu(k, p, g) * p[k]; }

double utility(int k, const PowerProfile& p, const GameInstance& g) {
    if (!(p[k] > 0.0)) throw std::invalid_argument("utility: power must be positive");
    return g.curve.pd(sinr(k, p, g)) / (p[k] * g.T);
}

double social_welfare(const PowerProfile& p, const GameInstance& g) {
    double s = 0.0;
    for (int k = 0; k < g.K(); ++k) s += utility(k, p, g);
    return s;
}

std::vector<int> feasible_set(int k, const PowerProfile& p, const GameInstance& g) {
    const int lo = g.grid.first_at_least(g.qos.gamma_req / nu(k, p, g));
    std::vector<int> out;
    for (int q = lo; q < g.grid.size(); ++q) out.push_back(q);
    return out;
}

namespace {

inline double level_utility(int q, double nu_k, const PowerGrid& grid, const DetectionCurve& curve, double T) {
    const double p = grid.level(q);
    return curve.pd(nu_k * p) / (p * T);
}

inline double level_utility(int q, double nu_k, const GameInstance& g) {
    return level_utility(q, nu_k, g.grid, g.curve, g.T);
}

int lowest_candidate(double nu_k, const PowerGrid& grid, double gamma_req) {
    const int lo = grid.first_at_least(gamma_req / nu_k);
    return lo < grid.size() ? lo : 0;  // nothing feasible: whole grid
}

int lowest_candidate(double nu_k, const GameInstance& g) { return lowest_candidate(nu_k, g.grid, g.qos.gamma_req); }

}  // namespace

int best_response_index(double nu_k, const GameInstance& g) {
    return best_response_index(nu_k, g.grid, g.curve, g.qos.gamma_req, g.T);
}

int best_response_index(double nu_k, const PowerGrid& grid, const DetectionCurve& curve, double gamma_req,
                        double T) {
    const int Q = grid.size();
    const int lo = lowest_candidate(nu_k, grid, gamma_req);
    const int above = grid.last_at_most(curve.gamma_tilde() / nu_k) + 1;

    int cand[3];
    int n = 0;
    cand[n++] = lo;
    if (above - 1 > lo) cand[n++] = above - 1;
    if (above > lo && above < Q) cand[n++] = above;

    int best = cand[0];
    double best_u = level_utility(best, nu_k, grid, curve, T);
    for (int i = 1; i < n; ++i) {
        const double u = level_utility(cand[i], nu_k, grid, curve, T);
        if (u > best_u) {
            best_u = u;
            best = cand[i];
        }
    }
    return best;
}

int best_response_index_exhaustive(double nu_k, const GameInstance& g) {
    const int lo = lowest_candidate(nu_k, g);
    int best = lo;
    double best_u = level_utility(lo, nu_k, g);
    for (int q = lo + 1; q < g.grid.size(); ++q) {
        const double u = level_utility(q, nu_k, g);
        if (u > best_u) {
            best_u = u;
            best = q;
        }
    }
    return best;
}

double best_response(int k, const PowerProfile& p, const GameInstance& g) {
    return g.grid.level(best_response_index(nu(k, p, g), g));
}

bool existence_condition(int K, int V, double gamma_star) { return gamma_star * (K - 1) < V; }

std::uint64_t profile_count(int Q, int K) {
    std::uint64_t n = 1;
    for (int k = 0; k < K; ++k) {
        if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(Q))
            return std::numeric_limits<std::uint64_t>::max();
        n *= static_cast<std::uint64_t>(Q);
    }
    return n;
}

bool is_gne(const IndexProfile& q, const GameInstance& g) {
    const PowerProfile p = to_powers(q, g.grid);
    for (int k = 0; k < g.K(); ++k)
        if (best_response_index(nu(k, p, g), g) != q[k]) return false;
    return true;
}

namespace {

// Player 0 is pinned to its best response against the others, so only Q^(K-1) candidate
// profiles need checking. Returns true and fills q when the profile with others given by
// `code` is a GNE.
bool check_code(std::uint64_t code, const GameInstance& g, IndexProfile& q, PowerProfile& p) {
    const int K = g.K();
    const int Q = g.grid.size();
    for (int k = 1; k < K; ++k) {
        q[k] = static_cast<int>(code % Q);
        code /= Q;
        p[k] = g.grid.level(q[k]);
    }
    q[0] = best_response_index(nu(0, p, g), g);
    p[0] = g.grid.level(q[0]);
    for (int k = 1; k < K; ++k)
        if (best_response_index(nu(k, p, g), g) != q[k]) return false;
    return true;
}

}  // namespace

std::vector<IndexProfile> enumerate_gne(const GameInstance& g, std::uint64_t budget, ExecPolicy policy) {
    g.validate();
    const int K = g.K();
    const int Q = g.grid.size();
    const std::uint64_t total = profile_count(Q, K);
    if (total > budget) {
        std::ostringstream os;
        os << "GNE enumeration needs Q^K = " << Q << "^" << K << " = " << total << " profiles, above the budget of "
           << budget << "; use a coarser grid, fewer players or raise game.enum_budget";
        throw BudgetError(os.str());
    }
    const std::uint64_t codes = profile_count(Q, K - 1);

    std::vector<IndexProfile> found;
    if (policy == ExecPolicy::serial) {
        IndexProfile q(K);
        PowerProfile p(K);
        for (std::uint64_t c = 0; c < codes; ++c)
            if (check_code(c, g, q, p)) found.push_back(q);
    } else {
#pragma omp parallel
        {
            std::vector<IndexProfile> local;
            IndexProfile q(K);
            PowerProfile p(K);
#pragma omp for schedule(static) nowait
            for (std::int64_t c = 0; c < static_cast<std::int64_t>(codes); ++c)
                if (check_code(static_cast<std::uint64_t>(c), g, q, p)) local.push_back(q);
#pragma omp critical
            found.insert(found.end(), local.begin(), local.end());
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

IndexProfile smallest_gne(const std::vector<IndexProfile>& set) {
    if (set.empty()) throw EquilibriumError("smallest_gne: empty equilibrium set");
    IndexProfile low = set.front();
    for (const auto& q : set)
        for (std::size_t k = 0; k < q.size(); ++k) low[k] = std::min(low[k], q[k]);
    if (std::find(set.begin(), set.end(), low) == set.end())
        throw EquilibriumError("smallest_gne: no member is component-wise below all others");
    return low;
}

std::vector<std::size_t> welfare_maximal(const std::vector<IndexProfile>& set, const GameInstance& g) {
    std::vector<double> w;
    for (const auto& q : set) w.push_back(social_welfare(to_powers(q, g.grid), g));
    std::vector<std::size_t> out;
    if (w.empty()) return out;
    const double top = *std::max_element(w.begin(), w.end());
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] == top) out.push_back(i);
    return out;
}

ContinuousGne continuous_gne(const GameInstance& g) {
    g.validate();
    const double target = gamma_star(g.curve, g.qos);
    const int K = g.K();
    if (!existence_condition(K, g.V, target)) {
        std::ostringstream os;
        os << "continuous GNE does not exist: gamma* (K-1) = " << target * (K - 1) << " >= V = " << g.V;
        throw EquilibriumError(os.str());
    }
    const double received = target * g.sigma2 / (g.V - (K - 1) * target);
    ContinuousGne out;
    out.powers.resize(K);
    for (int k = 0; k < K; ++k) {
        const double p = received / g.alphas[k];
        const double c = std::clamp(p, g.grid.min(), g.grid.max());
        if (c != p) out.clamped = true;
        out.powers[k] = c;
    }
    return out;
}

double nmse(const PowerProfile& pc, const PowerProfile& pd) {
    if (pc.size() != pd.size()) throw std::invalid_argument("nmse: profiles differ in length");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < pc.size(); ++i) {
        num += (pc[i] - pd[i]) * (pc[i] - pd[i]);
        den += pc[i] * pc[i];
    }
    if (den == 0.0) throw std::invalid_argument("nmse: reference profile has zero norm");
    return num / den;
}

double utility_slope(int k, const PowerProfile& p, const GameInstance& g) {
    const double gamma = sinr(k, p, g);
    return tangent_residual(g.curve, gamma) / (p[k] * p[k] * g.T);
}

double cross_partial_analytic(const GameInstance& g, const PowerProfile& p, int k, int l) {
    const double gamma = sinr(k, p, g);
    return -g.alphas[l] * gamma * gamma * gamma * g.curve.d2pd(gamma) /
           (g.V * g.alphas[k] * p[k] * p[k] * p[k] * g.T);
}

double cross_partial_fd(const GameInstance& g, const PowerProfile& p, int k, int l) {
    // Step sized so that nu_k moves by about 1e-3 relative.
    double interference = g.sigma2;
    for (int j = 0; j < g.K(); ++j)
        if (j != k) interference += g.alphas[j] * p[j];
    const double h = 1e-3 * interference / g.alphas[l];

    PowerProfile q = p;
    auto slope_at = [&](double pl) {
        q[l] = pl;
        return utility_slope(k, q, g);
    };
    auto central = [&](double step) { return (slope_at(p[l] + step) - slope_at(p[l] - step)) / (2.0 * step); };
    // Keep p_l - h positive.
    const double step = std::min(h, 0.5 * p[l]);
    return (4.0 * central(step / 2.0) - central(step)) / 3.0;
}

bool supermodularity_check(const GameInstance& g, const PowerProfile& p, int k, int l) {
    return cross_partial_fd(g, p, k, l) >= -1e-8;
}

DynamicResult best_response_dynamic(const GameInstance& g, int max_steps, IndexProfile start) {
    const int K = g.K();
    DynamicResult r;
    r.profile = start.empty() ? IndexProfile(K, 0) : std::move(start);
    IndexProfile next(K);
    for (int step = 0; step <= max_steps; ++step) {
        const PowerProfile p = to_powers(r.profile, g.grid);
        for (int k = 0; k < K; ++k) next[k] = best_response_index(nu(k, p, g), g);
        if (next == r.profile) {
            r.converged = true;
            r.steps = step;
            return r;
        }
        if (step == max_steps) break;
        r.profile = next;
    }
    r.steps = max_steps;
    return r;
}

std::string gne_set_json(const std::vector<IndexProfile>& set, const GameInstance& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& q : set) {
        const PowerProfile p = to_powers(q, g.grid);
        nlohmann::json item;
        item["indices"] = q;
        item["powers"] = p;
        std::vector<double> s, u;
        for (int k = 0; k < g.K(); ++k) {
            s.push_back(sinr(k, p, g));
            u.push_back(utility(k, p, g));
        }
        item["sinr"] = s;
        item["utility"] = u;
        item["welfare"] = social_welfare(p, g);
        arr.push_back(std::move(item));
    }
    return arr.dump();
}

}  // namespace ranging
