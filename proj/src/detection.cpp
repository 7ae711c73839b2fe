// SPDX-License-Identifier: Apache-2.0

#include "ranging/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "ranging/errors.hpp"

namespace ranging {

double incomplete_beta(double x, int a, int b) {
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream os;
        os << "incomplete_beta: x=" << x << " outside [0,1]";
        throw NumericError(os.str());
    }
    if (a < 1 || b < 1) throw NumericError("incomplete_beta: parameters must be positive");
    return boost::math::ibeta(static_cast<double>(a), static_cast<double>(b), x);
}

DetectionCurve::DetectionCurve(int M, int V, double lambda)
    : M_(M), V_(V), a_(M * (V - 1)), b_(M), lambda_(lambda) {
    if (M < 1 || V < 2) throw ConfigError("detection curve needs M >= 1 and V >= 2");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("detection threshold must lie in (0,1)");

    log_beta_ = std::lgamma(a_) + std::lgamma(b_) - std::lgamma(a_ + b_);
    const int n = a_ + b_ - 1;
    for (int j = a_; j <= n; ++j)
        log_binom_.push_back(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0));

    gamma_dot_ = find_gamma_dot(*this);
    gamma_tilde_ = find_gamma_tilde(*this);
}

double DetectionCurve::complement(double gamma) const {
    return lambda_ / (1.0 + (1.0 - lambda_) * gamma);
}

double DetectionCurve::argument(double gamma) const {
    return (1.0 + gamma) * (1.0 - lambda_) / (1.0 + (1.0 - lambda_) * gamma);
}

double DetectionCurve::pd(double gamma) const {
    if (std::isinf(gamma)) return 1.0;
    const double y = complement(gamma);
    const double log_x = std::log1p(-y);
    const double log_y = std::log(y);
    const int n = a_ + b_ - 1;
    double sum = 0.0;
    for (int j = a_; j <= n; ++j)
        sum += std::exp(log_binom_[j - a_] + j * log_x + (n - j) * log_y);
    return std::min(sum, 1.0);
}

// x^{a-1} (1-x)^{b-1} / B(a,b), with x and 1-x returned for reuse.
double DetectionCurve::density_term(double gamma, double& x, double& y) const {
    y = complement(gamma);
    x = 1.0 - y;
    double log_g = (a_ - 1) * std::log1p(-y) - log_beta_;
    if (b_ > 1) log_g += (b_ - 1) * std::log(y);
    return std::exp(log_g);
}

double DetectionCurve::dpd(double gamma) const {
    double x, y;
    const double g = density_term(gamma, x, y);
    const double s = 1.0 + (1.0 - lambda_) * gamma;
    return g * lambda_ * (1.0 - lambda_) / (s * s);
}

double DetectionCurve::d2pd(double gamma) const {
    double x, y;
    const double g = density_term(gamma, x, y);
    const double s = 1.0 + (1.0 - lambda_) * gamma;
    const double dx = lambda_ * (1.0 - lambda_) / (s * s);
    const double d2x = -2.0 * (1.0 - lambda_) * dx / s;
    const double dg = g * ((a_ - 1) / x - (b_ - 1) / y);
    return dg * dx * dx + g * d2x;
}

double detection_probability(double gamma, const DetectionCurve& curve) { return curve.pd(gamma); }

double calibrate_threshold(double pfa, int M, int V) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("calibrate_threshold: pfa must lie in (0,1)");
    const int a = M * (V - 1);
    const int b = M;
    // I_{1-lambda}[a,b] falls monotonically from 1 (lambda=0) to 0 (lambda=1).
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(1.0 - mid, a, b) > pfa)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

template <class F>
double bisect(F&& f, double lo, double hi) {
    const bool lo_positive = f(lo) > 0.0;
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if ((f(mid) > 0.0) == lo_positive)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double find_gamma_dot(const DetectionCurve& curve) {
    // Log-spaced scan for the first + -> - sign change of Pd''.
    constexpr int steps = 4000;
    const double log_lo = std::log(1e-6);
    const double log_hi = std::log(1e6);
    double prev_g = std::exp(log_lo);
    double prev = curve.d2pd(prev_g);
    for (int i = 1; i <= steps; ++i) {
        const double g = std::exp(log_lo + (log_hi - log_lo) * i / steps);
        const double cur = curve.d2pd(g);
        if (prev > 0.0 && cur <= 0.0)
            return bisect([&](double t) { return curve.d2pd(t); }, prev_g, g);
        prev = cur;
        prev_g = g;
    }
    std::ostringstream os;
    os << "no inflection point of Pd found in [1e-6, 1e6] (M=" << curve.M() << ", V=" << curve.V()
       << ", lambda=" << curve.lambda() << ")";
    throw NumericError(os.str());
}

double tangent_residual(const DetectionCurve& curve, double gamma) {
    return gamma * curve.dpd(gamma) - curve.pd(gamma);
}

double find_gamma_tilde(const DetectionCurve& curve) {
    const double lo = curve.gamma_dot() > 0.0 ? curve.gamma_dot() : find_gamma_dot(curve);
    auto h = [&](double g) { return tangent_residual(curve, g); };
    if (!(h(lo) > 0.0)) {
        std::ostringstream os;
        os << "tangent residual not positive at the inflection point " << lo << " (value " << h(lo) << ")";
        throw NumericError(os.str());
    }
    double hi = 2.0 * lo;
    int expansions = 0;
    while (h(hi) > 0.0) {
        hi *= 2.0;
        if (++expansions > 200) {
            std::ostringstream os;
            os << "could not bracket gamma_tilde above " << lo << " (last upper bound " << hi << ")";
            throw NumericError(os.str());
        }
    }
    return bisect(h, lo, hi);
}

double gamma_req(int N, int M, int V, double rho) {
    if (V < 2) throw ConfigError("gamma_req: V must be at least 2 (V^2 - 1 vanishes)");
    if (!(rho > 0.0)) throw ConfigError("gamma_req: rho must be positive");
    if (N < 1 || M < 1) throw ConfigError("gamma_req: N and M must be positive");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 3.0 * double(N) * double(N) / (2.0 * M * pi2 * (double(V) * V - 1.0)) / rho;
}

QoS make_qos(const SystemConfig& cfg) {
    QoS q;
    q.mse_max = cfg.mse_max;
    q.rho = cfg.rho();
    q.gamma_req = gamma_req(cfg.N, cfg.M, cfg.V, q.rho);
    return q;
}

double gamma_star(const DetectionCurve& curve, const QoS& qos) {
    return std::max(qos.gamma_req, curve.gamma_tilde());
}

}  // namespace ranging
