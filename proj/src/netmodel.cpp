// SPDX-License-Identifier: Apache-2.0

#include "ranging/netmodel.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <sstream>

#include "ranging/errors.hpp"

namespace ranging {

void SystemConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
    if (N < 1 || M < 1 || V < 1) fail("N, M and V must be positive");
    if (V < 2) fail("V must be at least 2 (the timing bound needs V^2 - 1 > 0)");
    if (Nv < 0) fail("Nv must be non-negative");
    if (M * V > usable_subcarriers()) fail("M*V must not exceed N - 2*Nv");
    if (Ts <= 0.0) fail("Ts must be positive");
    if (sigma2 <= 0.0) fail("sigma2 must be positive");
    if (!(pfa_target > 0.0 && pfa_target < 1.0)) fail("pfa_target must lie in (0,1)");
    if (lambda && !(*lambda > 0.0 && *lambda < 1.0)) fail("lambda must lie in (0,1)");
    if (!(mse_max > bias2)) fail("mse_max must exceed bias2 (rho > 0)");
    if (theta_max < 0.0) fail("theta_max must be non-negative");
    if (R <= 0.0) fail("R must be positive");
    if (Tf <= 0.0 || T <= 0.0) fail("Tf and T must be positive");
}

PowerGrid::PowerGrid(double p_min_db, double delta_db, int levels)
    : p_min_db_(p_min_db), delta_db_(delta_db), delta_(from_db(delta_db)) {
    if (levels < 1) throw ConfigError("power grid needs at least one level");
    levels_.reserve(levels);
    for (int q = 0; q < levels; ++q) levels_.push_back(from_db(p_min_db + q * delta_db));
}

int PowerGrid::first_at_least(double threshold) const {
    auto it = std::lower_bound(levels_.begin(), levels_.end(), threshold);
    return static_cast<int>(it - levels_.begin());
}

int PowerGrid::last_at_most(double value) const {
    auto it = std::upper_bound(levels_.begin(), levels_.end(), value);
    return static_cast<int>(it - levels_.begin()) - 1;
}

int PowerGrid::nearest(double p) const {
    if (size() == 1) return 0;
    const double q = (to_db(p) - p_min_db_) / delta_db_;
    return std::clamp(static_cast<int>(std::lround(q)), 0, size() - 1);
}

PowerGrid build_power_grid(double p_min_db, double p_max_db, double delta_db) {
    auto describe = [&] {
        std::ostringstream os;
        os << "(p_min_db=" << p_min_db << ", p_max_db=" << p_max_db << ", delta_db=" << delta_db << ")";
        return os.str();
    };
    if (!(delta_db > 0.0)) throw ConfigError("power grid: delta_db must be positive " + describe());
    if (p_max_db < p_min_db) throw ConfigError("power grid: p_max_db below p_min_db " + describe());
    const double steps = (p_max_db - p_min_db) / delta_db;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9)
        throw ConfigError("power grid: range is not a multiple of the step " + describe());
    return PowerGrid(p_min_db, delta_db, static_cast<int>(rounded) + 1);
}

double path_loss(double d, double R, double varsigma) {
    return std::pow(d / (R / 2.0), -varsigma);
}

Deployment sample_deployment(int K, double R, Rng& rng) {
    if (K < 1) throw ConfigError("deployment needs at least one terminal");
    std::uniform_real_distribution<double> uni(R / 10.0, R);
    Deployment dep;
    dep.distances.reserve(K);
    for (int k = 0; k < K; ++k) dep.distances.push_back(uni(rng));
    return dep;
}

TapProfile vehicular_a_profile(double Ts) {
    static constexpr std::array<double, 6> delay_ns{0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0};
    static constexpr std::array<double, 6> power_db{0.0, -1.0, -9.0, -10.0, -15.0, -20.0};
    TapProfile prof;
    double total = 0.0;
    for (std::size_t i = 0; i < delay_ns.size(); ++i) {
        prof.delays.push_back(static_cast<int>(std::lround(delay_ns[i] * 1e-9 / Ts)));
        prof.powers.push_back(from_db(power_db[i]));
        total += prof.powers.back();
    }
    for (auto& p : prof.powers) p /= total;
    return prof;
}

std::vector<double> tile_centers(const SystemConfig& cfg) {
    const int segment = cfg.usable_subcarriers() / cfg.M;
    std::vector<double> centers(cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
        const int start = cfg.Nv + m * segment + (segment - cfg.V) / 2;
        centers[m] = start + (cfg.V - 1) / 2.0;
    }
    return centers;
}

ChannelRealization sample_channel(const SystemConfig& cfg, double d, Rng& rng) {
    const TapProfile prof = vehicular_a_profile(cfg.Ts);
    const double gain = std::sqrt(path_loss(d, cfg.R, cfg.varsigma));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<cplx> taps(prof.powers.size());
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double s = std::sqrt(prof.powers[i] / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        taps[i] = cplx(s * re, s * im);
    }

    ChannelRealization ch;
    ch.tile_gains.resize(cfg.M);
    const auto centers = tile_centers(cfg);
    double energy = 0.0;
    for (int m = 0; m < cfg.M; ++m) {
        cplx h(0.0, 0.0);
        for (std::size_t i = 0; i < taps.size(); ++i) {
            const double phase = -2.0 * std::numbers::pi * centers[m] * prof.delays[i] / cfg.N;
            h += taps[i] * std::polar(1.0, phase);
        }
        ch.tile_gains[m] = gain * h;
        energy += std::norm(ch.tile_gains[m]);
    }
    ch.alpha = energy / cfg.M;
    return ch;
}

}  // namespace ranging
