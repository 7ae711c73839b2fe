// SPDX-License-Identifier: Apache-2.0

#include "ranging/rng.hpp"

#include <array>

namespace ranging {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = splitmix64(seed);
    for (auto t : tags) {
        state = splitmix64(state ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    }
    // Expand to a full seed sequence so nearby states do not give correlated engines.
    std::array<std::uint32_t, 8> words{};
    for (auto& w : words) {
        state = splitmix64(state);
        w = static_cast<std::uint32_t>(state >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace ranging
