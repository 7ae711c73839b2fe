// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ranging/netmodel.hpp"

namespace ranging {

// Regularized incomplete beta I_x[a,b] for positive integer parameters.
// Throws NumericError when x is outside [0,1].
double incomplete_beta(double x, int a, int b);

// Probability of correct code detection as a function of the SINR:
//   Pd(gamma) = I_{x(gamma)}[M(V-1), M],  x(gamma) = (1+gamma)(1-lambda) / (1+(1-lambda)gamma)
//
// The curve is sigmoidal: convex below the inflection point gamma_dot, concave above it.
// gamma_tilde is where the ray from the origin touches the curve, i.e. where Pd(gamma)/gamma
// peaks. Both points are solved once at construction; evaluation is cheap and thread-safe.
//
// Evaluation uses the integer-parameter identity
//   I_x[a,b] = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}
// with 1-x = lambda / (1+(1-lambda)gamma) formed directly, which keeps full relative precision
// as gamma grows. Derivatives are analytic: dI/dx = x^{a-1}(1-x)^{b-1}/B(a,b) times dx/dgamma.
class DetectionCurve {
  public:
    DetectionCurve(int M, int V, double lambda);

    int M() const { return M_; }
    int V() const { return V_; }
    int a() const { return a_; }
    int b() const { return b_; }
    double lambda() const { return lambda_; }

    double argument(double gamma) const;  // x(gamma)
    double pd(double gamma) const;
    double dpd(double gamma) const;
    double d2pd(double gamma) const;

    double gamma_dot() const { return gamma_dot_; }
    double gamma_tilde() const { return gamma_tilde_; }

  private:
    double complement(double gamma) const;  // 1 - x(gamma)
    double density_term(double gamma, double& x, double& y) const;

    int M_;
    int V_;
    int a_;
    int b_;
    double lambda_;
    double log_beta_;                 // log B(a, b)
    std::vector<double> log_binom_;   // log C(a+b-1, j), j = a..a+b-1
    double gamma_dot_ = 0.0;
    double gamma_tilde_ = 0.0;
};

double detection_probability(double gamma, const DetectionCurve& curve);

// lambda with I_{1-lambda}[M(V-1), M] = pfa, by bisection.
double calibrate_threshold(double pfa, int M, int V);

// Re-solve the characteristic points from scratch (the curve caches the same values).
double find_gamma_dot(const DetectionCurve& curve);
double find_gamma_tilde(const DetectionCurve& curve);

// gamma*Pd'(gamma) - Pd(gamma); zero at gamma_tilde, positive on [gamma_dot, gamma_tilde).
double tangent_residual(const DetectionCurve& curve, double gamma);

struct QoS {
    double mse_max = 0.0;
    double rho = 0.0;
    double gamma_req = 0.0;  // linear SINR meeting the timing-MSE bound with equality
};

// 3 N^2 / (2 M pi^2 (V^2 - 1) rho). Throws ConfigError for V < 2 or rho <= 0.
double gamma_req(int N, int M, int V, double rho);

QoS make_qos(const SystemConfig& cfg);

inline double gamma_tilde(const DetectionCurve& curve) { return curve.gamma_tilde(); }
inline double gamma_dot(const DetectionCurve& curve) { return curve.gamma_dot(); }
double gamma_star(const DetectionCurve& curve, const QoS& qos);

}  // namespace ranging
