// SPDX-License-Identifier: Apache-2.0

#include "ranging/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "ranging/errors.hpp"

namespace ranging {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
    return out;
}

long long to_integer(std::string_view key, std::string_view v) {
    // Accept 2e8-style literals for budgets as long as they are integral.
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<long long>(d)))
        throw ConfigError("config key '" + std::string(key) + "': not an integer: '" + std::string(v) + "'");
    return static_cast<long long>(d);
}

int to_int(std::string_view key, std::string_view v) {
    const long long x = to_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError("config key '" + std::string(key) + "': out of range");
    return static_cast<int>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + std::string(key) + "': not a boolean: '" + std::string(v) + "'");
}

std::string fmt(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

struct Entry {
    const char* key;
    std::function<void(Config&, std::string_view)> set;
    std::function<std::string(const Config&)> get;
};

#define RANGING_DOUBLE(KEY, FIELD)                                                        \
    Entry {                                                                               \
        KEY, [](Config& c, std::string_view v) { c.FIELD = to_double(KEY, v); },          \
            [](const Config& c) { return fmt(c.FIELD); }                                  \
    }
#define RANGING_INT(KEY, FIELD)                                                           \
    Entry {                                                                               \
        KEY, [](Config& c, std::string_view v) { c.FIELD = to_int(KEY, v); },             \
            [](const Config& c) { return std::to_string(c.FIELD); }                       \
    }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        RANGING_INT("N", system.N),
        RANGING_INT("Nv", system.Nv),
        RANGING_INT("M", system.M),
        RANGING_INT("V", system.V),
        RANGING_DOUBLE("Ts", system.Ts),
        RANGING_DOUBLE("sigma2", system.sigma2),
        RANGING_DOUBLE("pfa_target", system.pfa_target),
        Entry{"lambda",
              [](Config& c, std::string_view v) {
                  if (v == "auto")
                      c.system.lambda.reset();
                  else
                      c.system.lambda = to_double("lambda", v);
              },
              [](const Config& c) { return c.system.lambda ? fmt(*c.system.lambda) : std::string("auto"); }},
        RANGING_DOUBLE("mse_max", system.mse_max),
        RANGING_DOUBLE("bias2", system.bias2),
        RANGING_DOUBLE("theta_max", system.theta_max),
        RANGING_DOUBLE("R", system.R),
        RANGING_DOUBLE("varsigma", system.varsigma),
        RANGING_DOUBLE("Tf", system.Tf),
        RANGING_DOUBLE("T", system.T),
        RANGING_DOUBLE("grid.p_min_db", grid.p_min_db),
        RANGING_DOUBLE("grid.p_max_db", grid.p_max_db),
        RANGING_DOUBLE("grid.delta_db", grid.delta_db),
        RANGING_INT("feedback.B", feedback.B),
        RANGING_DOUBLE("feedback.gamma_min_db", feedback.gamma_min_db),
        RANGING_DOUBLE("feedback.gamma_max_db", feedback.gamma_max_db),
        Entry{"feedback.add_floor_offset",
              [](Config& c, std::string_view v) { c.feedback.add_floor_offset = to_bool("feedback.add_floor_offset", v); },
              [](const Config& c) { return std::string(c.feedback.add_floor_offset ? "true" : "false"); }},
        Entry{"game.enum_budget",
              [](Config& c, std::string_view v) {
                  const long long b = to_integer("game.enum_budget", v);
                  if (b < 1) throw ConfigError("config key 'game.enum_budget': must be positive");
                  c.game.enum_budget = static_cast<std::uint64_t>(b);
              },
              [](const Config& c) { return std::to_string(c.game.enum_budget); }},
        RANGING_INT("sync.codes", sync.codes),
        RANGING_INT("sync.max_frames", sync.max_frames),
        RANGING_INT("sync.beb_cmax", sync.beb_cmax),
    };
    return table;
}

#undef RANGING_DOUBLE
#undef RANGING_INT

const Entry& find_entry(std::string_view key) {
    if (key.starts_with("system.")) key.remove_prefix(7);
    for (const auto& e : entries())
        if (key == e.key) return e;
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void Config::validate() const {
    system.validate();
    if (!(grid.delta_db > 0.0)) throw ConfigError("invalid config: grid.delta_db must be positive");
    if (feedback.B < 1 || feedback.B > 30) throw ConfigError("invalid config: feedback.B must lie in [1, 30]");
    if (!(feedback.gamma_max_db > feedback.gamma_min_db))
        throw ConfigError("invalid config: feedback.gamma_max_db must exceed feedback.gamma_min_db");
    if (sync.codes < 1) throw ConfigError("invalid config: sync.codes must be positive");
    if (sync.max_frames < 1) throw ConfigError("invalid config: sync.max_frames must be positive");
    if (sync.beb_cmax < 0) throw ConfigError("invalid config: sync.beb_cmax must be non-negative");
    build_power_grid(grid.p_min_db, grid.p_max_db, grid.delta_db);
}

void apply_override(Config& cfg, std::string_view key, std::string_view value) {
    find_entry(trim(key)).set(cfg, trim(value));
}

void apply_override(Config& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

Config parse_config(std::string_view text) {
    Config cfg;
    int lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            apply_override(cfg, line);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::vector<std::pair<std::string, std::string>> config_snapshot(const Config& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : entries()) out.emplace_back(e.key, e.get(cfg));
    return out;
}

std::string format_config(const Config& cfg) {
    std::string s;
    for (const auto& [k, v] : config_snapshot(cfg)) s += k + " = " + v + "\n";
    return s;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& e : entries()) keys.emplace_back(e.key);
    return keys;
}

}  // namespace ranging
