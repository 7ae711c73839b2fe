// SPDX-License-Identifier: Apache-2.0

#include "ranging/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ranging/errors.hpp"
#include "ranging/netmodel.hpp"

namespace ranging {

QuantizerSpec make_quantizer(int B, double gamma_min_db, double gamma_max_db, bool add_floor_offset) {
    if (B < 1 || B > 30) throw ConfigError("quantizer: B must lie in [1, 30]");
    if (!(gamma_max_db > gamma_min_db)) throw ConfigError("quantizer: gamma_max must exceed gamma_min");
    QuantizerSpec q;
    q.B = B;
    q.gamma_min = from_db(gamma_min_db);
    q.gamma_max = from_db(gamma_max_db);
    q.add_floor_offset = add_floor_offset;
    return q;
}

double resolution(const QuantizerSpec& spec) {
    return (to_db(spec.gamma_max) - to_db(spec.gamma_min)) / (spec.levels() - 1);
}

int encode(double gamma_hat, const QuantizerSpec& spec) {
    if (std::isnan(gamma_hat)) return 0;
    const double clamped = std::clamp(gamma_hat, spec.gamma_min, spec.gamma_max);
    const double excess = clamped - spec.gamma_min;
    if (excess <= 0.0) return 0;
    const long idx = std::lround(to_db(excess) / resolution(spec));
    return static_cast<int>(std::clamp<long>(idx, 0, spec.levels() - 1));
}

double decode(int index, const QuantizerSpec& spec) {
    if (index < 0 || index >= spec.levels())
        throw std::out_of_range("feedback index " + std::to_string(index) + " outside [0, " +
                                std::to_string(spec.levels() - 1) + "]");
    const double mu = from_db(resolution(spec) * index);
    return spec.add_floor_offset ? spec.gamma_min + mu : mu;
}

double decode_unrounded(double gamma_hat, const QuantizerSpec& spec) {
    double db = 0.0;
    if (!std::isnan(gamma_hat)) {
        const double excess = std::clamp(gamma_hat, spec.gamma_min, spec.gamma_max) - spec.gamma_min;
        if (excess > 0.0) db = std::clamp(to_db(excess), 0.0, resolution(spec) * (spec.levels() - 1));
    }
    const double mu = from_db(db);
    return spec.add_floor_offset ? spec.gamma_min + mu : mu;
}

int max_reachable_index(const QuantizerSpec& spec) { return encode(spec.gamma_max, spec); }

std::vector<std::uint8_t> pack(const FeedbackMessage& msg, int B) {
    if (msg.index < 0 || msg.index >= (1 << B)) throw std::out_of_range("feedback index does not fit in B bits");
    const int bits = message_bits(B);
    std::vector<std::uint8_t> out((bits + 7) / 8, 0);
    const std::uint64_t word = (static_cast<std::uint64_t>(msg.index) << 1) | (msg.detected ? 1u : 0u);
    for (int i = 0; i < bits; ++i)
        if ((word >> i) & 1u) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

FeedbackMessage unpack(std::span<const std::uint8_t> bytes, int B) {
    const int bits = message_bits(B);
    if (static_cast<int>(bytes.size()) * 8 < bits) throw std::invalid_argument("feedback message truncated");
    std::uint64_t word = 0;
    for (int i = 0; i < bits; ++i)
        if ((bytes[i / 8] >> (i % 8)) & 1u) word |= std::uint64_t{1} << i;
    return FeedbackMessage{(word & 1u) != 0, static_cast<int>(word >> 1)};
}

}  // namespace ranging
