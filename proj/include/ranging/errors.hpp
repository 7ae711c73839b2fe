// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ranging {

// Invalid configuration value, unknown key, or inconsistent parameter set.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Root finding or special-function evaluation failed.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Exhaustive equilibrium search would exceed the configured profile budget.
class BudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Equilibrium set is empty or has no component-wise minimum.
class EquilibriumError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace ranging
