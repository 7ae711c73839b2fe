// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ranging/netmodel.hpp"

namespace ranging {

struct GridConfig {
    double p_min_db = -20.0;
    double p_max_db = 30.0;
    double delta_db = 1.0;
};

struct FeedbackConfig {
    int B = 3;
    double gamma_min_db = -8.0;
    double gamma_max_db = 16.0;
    bool add_floor_offset = false;
};

struct GameConfig {
    std::uint64_t enum_budget = 10'000'000;  // max joint profiles Q^K
};

struct SyncConfig {
    int codes = 8;          // |C|, must cover K
    int max_frames = 5000;
    int beb_cmax = 6;
};

struct Config {
    SystemConfig system;
    GridConfig grid;
    FeedbackConfig feedback;
    GameConfig game;
    SyncConfig sync;

    // Throws ConfigError.
    void validate() const;
};

// Flat `key = value` text, `#` starts a comment. System keys may be bare (`V = 36`) or
// prefixed (`system.V = 36`); the rest are dotted (`feedback.B = 3`). `lambda = auto`
// clears an explicit threshold.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

void apply_override(Config& cfg, std::string_view key, std::string_view value);
// "key=value"
void apply_override(Config& cfg, std::string_view assignment);

// Canonical key/value pairs in a fixed order; parse_config of the joined lines gives back an
// equal config.
std::vector<std::pair<std::string, std::string>> config_snapshot(const Config& cfg);
std::string format_config(const Config& cfg);

std::vector<std::string> config_keys();

}  // namespace ranging
