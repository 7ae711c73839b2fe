// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ranging/config.hpp"
#include "ranging/detection.hpp"
#include "ranging/feedback.hpp"
#include "ranging/game.hpp"
#include "ranging/netmodel.hpp"

namespace ranging {

// Everything derived once from a Config: grid, calibrated threshold, detection curve, QoS
// target and quantizer. Immutable after construction.
struct Scenario {
    explicit Scenario(const Config& c);

    Config cfg;
    PowerGrid grid;
    double lambda;
    DetectionCurve curve;
    QoS qos;
    QuantizerSpec quantizer;

    double gamma_star() const { return ranging::gamma_star(curve, qos); }
    // floor(1 + V / gamma*)
    int k_max() const;

    GameInstance game(std::vector<double> alphas) const;
    // Same instance on a different power step (range kept).
    GameInstance game(std::vector<double> alphas, double delta_db) const;
};

}  // namespace ranging
