// SPDX-License-Identifier: Apache-2.0

#include "ranging/scenario.hpp"

#include <cmath>

namespace ranging {

namespace {

const Config& checked(const Config& c) {
    c.validate();
    return c;
}

}  // namespace

Scenario::Scenario(const Config& c)
    : cfg(checked(c)),
      grid(build_power_grid(c.grid.p_min_db, c.grid.p_max_db, c.grid.delta_db)),
      lambda(c.system.lambda ? *c.system.lambda : calibrate_threshold(c.system.pfa_target, c.system.M, c.system.V)),
      curve(c.system.M, c.system.V, lambda),
      qos(make_qos(c.system)),
      quantizer(make_quantizer(c.feedback.B, c.feedback.gamma_min_db, c.feedback.gamma_max_db,
                               c.feedback.add_floor_offset)) {}

int Scenario::k_max() const { return static_cast<int>(std::floor(1.0 + cfg.system.V / gamma_star())); }

GameInstance Scenario::game(std::vector<double> alphas) const {
    return GameInstance{grid, std::move(alphas), cfg.system.sigma2, cfg.system.V, curve, qos, cfg.system.T};
}

GameInstance Scenario::game(std::vector<double> alphas, double delta_db) const {
    return GameInstance{build_power_grid(cfg.grid.p_min_db, cfg.grid.p_max_db, delta_db),
                        std::move(alphas),
                        cfg.system.sigma2,
                        cfg.system.V,
                        curve,
                        qos,
                        cfg.system.T};
}

}  // namespace ranging
