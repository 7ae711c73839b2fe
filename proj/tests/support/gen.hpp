// SPDX-License-Identifier: Apache-2.0
//
// Small hand-rolled generators for property tests. Each property draws its cases from a
// fixed-seed engine so a failure reproduces; the case index is reported with the failure.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gen {

struct Source {
    explicit Source(std::uint64_t seed) : eng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<double> log_uniform_vec(int n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = log_uniform(lo, hi);
        return v;
    }

    std::mt19937_64 eng;
};

}  // namespace gen
