// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "ranging/rng.hpp"

namespace ranging {

using cplx = std::complex<double>;

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// OFDMA ranging-channel layout and QoS constants. Powers are relative to sigma2.
struct SystemConfig {
    int N = 1024;                 // subcarriers
    int Nv = 92;                  // null subcarriers per spectrum edge
    int M = 4;                    // tiles
    int V = 36;                   // subcarriers per tile
    double Ts = 89.28e-9;         // sampling period [s]
    double sigma2 = 1.0;          // noise variance
    double pfa_target = 1e-5;     // false-alarm target used to calibrate lambda
    std::optional<double> lambda; // GLRT threshold; calibrated from pfa_target when unset
    double mse_max = 324.0;       // timing MSE bound [samples^2]
    double bias2 = 196.0;         // squared timing bias [samples^2]
    double theta_max = 112.0;     // round-trip delay bound [samples]
    double R = 1.0;               // cell radius
    double varsigma = 2.0;        // path-loss exponent
    double Tf = 5e-3;             // frame time [s]
    double T = 1.0;               // block duration in the utility denominator [s]

    double rho() const { return mse_max - bias2; }
    int usable_subcarriers() const { return N - 2 * Nv; }

    // Throws ConfigError on violated invariants.
    void validate() const;
};

// Finite logarithmic power set: level(q) = p_min * delta^q, q = 0..Q-1.
class PowerGrid {
  public:
    PowerGrid(double p_min_db, double delta_db, int levels);

    int size() const { return static_cast<int>(levels_.size()); }
    double level(int q) const { return levels_[q]; }
    const std::vector<double>& levels() const { return levels_; }
    double min() const { return levels_.front(); }
    double max() const { return levels_.back(); }
    double delta() const { return delta_; }
    double delta_db() const { return delta_db_; }
    double min_db() const { return p_min_db_; }

    // Smallest q with level(q) >= threshold, or size() when none.
    int first_at_least(double threshold) const;
    // Largest q with level(q) <= value, or -1 when none.
    int last_at_most(double value) const;
    // Index of the level nearest to p on the dB scale.
    int nearest(double p) const;

  private:
    double p_min_db_;
    double delta_db_;
    double delta_;
    std::vector<double> levels_;
};

// Throws ConfigError if the dB range is not an integer multiple of delta_db.
PowerGrid build_power_grid(double p_min_db, double p_max_db, double delta_db);

// (d / (R/2))^-varsigma: unit gain at half the cell radius.
double path_loss(double d, double R, double varsigma);

struct Deployment {
    std::vector<double> distances;
    int size() const { return static_cast<int>(distances.size()); }
};

// K i.i.d. distances, uniform on [R/10, R].
Deployment sample_deployment(int K, double R, Rng& rng);

struct ChannelRealization {
    std::vector<cplx> tile_gains;  // H(m), m = 0..M-1
    double alpha = 0.0;            // (1/M) sum |H(m)|^2, path loss included
};

// Six-tap vehicular-A tapped delay line on the Ts grid.
struct TapProfile {
    std::vector<int> delays;       // samples
    std::vector<double> powers;    // linear, sum to one
};
TapProfile vehicular_a_profile(double Ts);

// Fractional subcarrier index of each tile center (tiles equally spaced over the usable band).
std::vector<double> tile_centers(const SystemConfig& cfg);

ChannelRealization sample_channel(const SystemConfig& cfg, double d, Rng& rng);

}  // namespace ranging
