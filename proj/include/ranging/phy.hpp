// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ranging/netmodel.hpp"

namespace ranging {

using Code = std::vector<cplx>;  // length M*V, unit modulus

struct CodeBook {
    std::vector<Code> codes;
    int size() const { return static_cast<int>(codes.size()); }
};

// QPSK entries {+-1, +-j}, i.i.d.; redraws until all codes differ.
CodeBook make_codebook(int count, int length, Rng& rng);

// M tiles of V DFT outputs, tile-major.
struct TileObservation {
    int M = 0;
    int V = 0;
    std::vector<cplx> data;

    TileObservation() = default;
    TileObservation(int m, int v) : M(m), V(v), data(static_cast<std::size_t>(m) * v) {}
    cplx* tile(int m) { return data.data() + static_cast<std::size_t>(m) * V; }
    const cplx* tile(int m) const { return data.data() + static_cast<std::size_t>(m) * V; }
    double energy() const;  // sum_m ||X(m)||^2
};

struct TimingEstimate {
    int theta_hat = 0;
    double statistic = 0.0;
};

// a(theta)_v = exp(-j 2 pi v theta / N)
std::vector<cplx> steering_vector(double theta, int V, int N);

// One transmitting terminal as seen by the receiver.
struct Emitter {
    const Code* code = nullptr;
    double power = 0.0;
    const ChannelRealization* channel = nullptr;
    int theta = 0;
};

// X(m) = sum_k sqrt(p_k) C_k(m) a(theta_k) H_k(m) + n(m), n(m) ~ CN(0, sigma2 I).
TileObservation synthesize_tiles(const SystemConfig& cfg, const std::vector<Emitter>& emitters, Rng& rng);
// List form; throws std::invalid_argument on length mismatch.
TileObservation synthesize_tiles(const SystemConfig& cfg, const std::vector<Code>& codes,
                                 const std::vector<double>& powers, const std::vector<ChannelRealization>& channels,
                                 const std::vector<int>& thetas, Rng& rng);

// (1/V) sum_m |a(theta)^H C(m)^H X(m)|^2
double glrt_statistic(const TileObservation& obs, const Code& code, double theta, int N);
// Integer grid argmax over [0, floor(theta_max)], smallest theta on ties.
TimingEstimate estimate_timing(const TileObservation& obs, const Code& code, double theta_max, int N);
// Lambda(theta_hat) / energy >= lambda; false for a zero observation.
bool glrt_detect(const TileObservation& obs, const Code& code, int theta_hat, double lambda, int N);
bool glrt_accept(double statistic, double energy, double lambda);
// (V Lambda - E) / (E - Lambda); +inf when the denominator is not positive.
double estimate_sinr(const TileObservation& obs, const Code& code, int theta_hat, int N);
double sinr_from_statistic(double statistic, double energy, int V);

struct CodeReport {
    TimingEstimate timing;
    double energy = 0.0;
    bool detected = false;
    double sinr_hat = 0.0;
};

// Table-driven receiver: the conjugate steering vectors for every candidate offset are
// precomputed once, and the per-code search runs in plain real arithmetic. Produces the same
// decisions as the free functions above.
class RangingReceiver {
  public:
    explicit RangingReceiver(const SystemConfig& cfg);

    CodeReport process(const TileObservation& obs, const Code& code, double lambda) const;
    // Shares the energy computation across codes.
    CodeReport process(const TileObservation& obs, const Code& code, double lambda, double energy) const;

    int offsets() const { return offsets_; }

  private:
    int M_;
    int V_;
    int offsets_;
    std::vector<double> re_;  // [theta][v] of exp(+j 2 pi v theta / N)
    std::vector<double> im_;
};

}  // namespace ranging
