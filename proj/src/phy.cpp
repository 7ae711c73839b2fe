// SPDX-License-Identifier: Apache-2.0

#include "ranging/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "ranging/errors.hpp"

namespace ranging {

CodeBook make_codebook(int count, int length, Rng& rng) {
    if (count < 1 || length < 1) throw ConfigError("codebook needs positive size and length");
    static const cplx alphabet[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    std::uniform_int_distribution<int> pick(0, 3);
    CodeBook book;
    std::set<std::vector<int>> seen;
    while (book.size() < count) {
        std::vector<int> symbols(length);
        for (auto& s : symbols) s = pick(rng);
        if (!seen.insert(symbols).second) continue;
        Code c(length);
        for (int n = 0; n < length; ++n) c[n] = alphabet[symbols[n]];
        book.codes.push_back(std::move(c));
    }
    return book;
}

double TileObservation::energy() const {
    double e = 0.0;
    for (const auto& x : data) e += x.real() * x.real() + x.imag() * x.imag();
    return e;
}

std::vector<cplx> steering_vector(double theta, int V, int N) {
    std::vector<cplx> a(V);
    for (int v = 0; v < V; ++v) a[v] = std::polar(1.0, -2.0 * std::numbers::pi * v * theta / N);
    return a;
}

TileObservation synthesize_tiles(const SystemConfig& cfg, const std::vector<Emitter>& emitters, Rng& rng) {
    const int M = cfg.M;
    const int V = cfg.V;
    TileObservation obs(M, V);
    for (const auto& e : emitters) {
        if (static_cast<int>(e.code->size()) != M * V) throw std::invalid_argument("code length must be M*V");
        const double amp = std::sqrt(e.power);
        const auto a = steering_vector(e.theta, V, cfg.N);
        for (int m = 0; m < M; ++m) {
            const cplx g = amp * e.channel->tile_gains[m];
            cplx* x = obs.tile(m);
            const cplx* c = e.code->data() + static_cast<std::size_t>(m) * V;
            for (int v = 0; v < V; ++v) x[v] += g * c[v] * a[v];
        }
    }
    std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.sigma2 / 2.0));
    for (auto& x : obs.data) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        x += cplx(re, im);
    }
    return obs;
}

TileObservation synthesize_tiles(const SystemConfig& cfg, const std::vector<Code>& codes,
                                 const std::vector<double>& powers, const std::vector<ChannelRealization>& channels,
                                 const std::vector<int>& thetas, Rng& rng) {
    const std::size_t K = codes.size();
    if (powers.size() != K || channels.size() != K || thetas.size() != K)
        throw std::invalid_argument("synthesize_tiles: per-terminal lists differ in length");
    std::vector<Emitter> em(K);
    for (std::size_t k = 0; k < K; ++k) em[k] = Emitter{&codes[k], powers[k], &channels[k], thetas[k]};
    return synthesize_tiles(cfg, em, rng);
}

double glrt_statistic(const TileObservation& obs, const Code& code, double theta, int N) {
    const int V = obs.V;
    const auto a = steering_vector(theta, V, N);
    double sum = 0.0;
    for (int m = 0; m < obs.M; ++m) {
        const cplx* x = obs.tile(m);
        const cplx* c = code.data() + static_cast<std::size_t>(m) * V;
        cplx acc(0.0, 0.0);
        for (int v = 0; v < V; ++v) acc += std::conj(a[v]) * std::conj(c[v]) * x[v];
        sum += std::norm(acc);
    }
    return sum / V;
}

TimingEstimate estimate_timing(const TileObservation& obs, const Code& code, double theta_max, int N) {
    TimingEstimate best{0, glrt_statistic(obs, code, 0.0, N)};
    const int last = static_cast<int>(std::floor(theta_max));
    for (int t = 1; t <= last; ++t) {
        const double s = glrt_statistic(obs, code, t, N);
        if (s > best.statistic) best = TimingEstimate{t, s};
    }
    return best;
}

bool glrt_accept(double statistic, double energy, double lambda) {
    if (!(energy > 0.0)) return false;
    return statistic / energy >= lambda;
}

bool glrt_detect(const TileObservation& obs, const Code& code, int theta_hat, double lambda, int N) {
    return glrt_accept(glrt_statistic(obs, code, theta_hat, N), obs.energy(), lambda);
}

double sinr_from_statistic(double statistic, double energy, int V) {
    const double den = energy - statistic;
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return (V * statistic - energy) / den;
}

double estimate_sinr(const TileObservation& obs, const Code& code, int theta_hat, int N) {
    return sinr_from_statistic(glrt_statistic(obs, code, theta_hat, N), obs.energy(), obs.V);
}

RangingReceiver::RangingReceiver(const SystemConfig& cfg)
    : M_(cfg.M), V_(cfg.V), offsets_(static_cast<int>(std::floor(cfg.theta_max)) + 1) {
    re_.resize(static_cast<std::size_t>(offsets_) * V_);
    im_.resize(re_.size());
    for (int t = 0; t < offsets_; ++t)
        for (int v = 0; v < V_; ++v) {
            const double ph = 2.0 * std::numbers::pi * v * t / cfg.N;
            re_[t * V_ + v] = std::cos(ph);
            im_[t * V_ + v] = std::sin(ph);
        }
}

CodeReport RangingReceiver::process(const TileObservation& obs, const Code& code, double lambda) const {
    return process(obs, code, lambda, obs.energy());
}

CodeReport RangingReceiver::process(const TileObservation& obs, const Code& code, double lambda,
                                    double energy) const {
    // Despread once: y = conj(c) .* x, split into real and imaginary planes.
    const std::size_t n = static_cast<std::size_t>(M_) * V_;
    double yr[1024];
    double yi[1024];
    std::vector<double> big_r, big_i;
    double* pr = yr;
    double* pi = yi;
    if (n > 1024) {
        big_r.resize(n);
        big_i.resize(n);
        pr = big_r.data();
        pi = big_i.data();
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double cr = code[i].real(), ci = code[i].imag();
        const double xr = obs.data[i].real(), xi = obs.data[i].imag();
        pr[i] = cr * xr + ci * xi;
        pi[i] = cr * xi - ci * xr;
    }

    CodeReport rep;
    rep.energy = energy;
    double best = -1.0;
    for (int t = 0; t < offsets_; ++t) {
        const double* ar = re_.data() + static_cast<std::size_t>(t) * V_;
        const double* ai = im_.data() + static_cast<std::size_t>(t) * V_;
        double sum = 0.0;
        for (int m = 0; m < M_; ++m) {
            const double* ur = pr + static_cast<std::size_t>(m) * V_;
            const double* ui = pi + static_cast<std::size_t>(m) * V_;
            double sr = 0.0, si = 0.0;
            for (int v = 0; v < V_; ++v) {
                sr += ar[v] * ur[v] - ai[v] * ui[v];
                si += ar[v] * ui[v] + ai[v] * ur[v];
            }
            sum += sr * sr + si * si;
        }
        sum /= V_;
        if (sum > best) {
            best = sum;
            rep.timing.theta_hat = t;
        }
    }
    rep.timing.statistic = best;
    rep.detected = glrt_accept(best, energy, lambda);
    rep.sinr_hat = sinr_from_statistic(best, energy, V_);
    return rep;
}

}  // namespace ranging
