// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ranging {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a of a label, used to tag streams by figure or purpose.
std::uint64_t hash_tag(std::string_view label);

// Independent stream for (seed, tag...). Pure function of its inputs, so trial
// workers can derive their own stream without touching shared state.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

}  // namespace ranging
