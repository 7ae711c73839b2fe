// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ranging {

// B-bit logarithmic SINR quantizer.
struct QuantizerSpec {
    int B = 3;
    double gamma_min = 0.0;        // linear
    double gamma_max = 0.0;        // linear
    bool add_floor_offset = false; // decode returns gamma_min + mu instead of mu

    int levels() const { return 1 << B; }
};

// Throws ConfigError on B < 1 or a non-increasing range.
QuantizerSpec make_quantizer(int B, double gamma_min_db, double gamma_max_db, bool add_floor_offset = false);

// Step in dB: (gamma_max_dB - gamma_min_dB) / (2^B - 1).
double resolution(const QuantizerSpec& spec);

// Clamp to [gamma_min, gamma_max], take dB of the excess over gamma_min, divide by the step
// and round half away from zero. NaN and anything at the floor give 0; +inf clamps to gamma_max.
int encode(double gamma_hat, const QuantizerSpec& spec);

// mu = 10^(step_dB * index / 10), plus gamma_min in offset mode. Throws on a bad index.
double decode(int index, const QuantizerSpec& spec);

// decode(encode(x)) with the rounding step removed: the limit of the feedback chain as B grows.
// Keeps the range clamp and the 0 dB floor of index 0.
double decode_unrounded(double gamma_hat, const QuantizerSpec& spec);

// Largest index encode can produce (the upper clamp maps to it).
int max_reachable_index(const QuantizerSpec& spec);

struct FeedbackMessage {
    bool detected = false;
    int index = 0;

    bool operator==(const FeedbackMessage&) const = default;
};

inline int message_bits(int B) { return 1 + B; }
inline int frame_feedback_bits(int B, int codes) { return message_bits(B) * codes; }

// Bit 0 is the detection flag, bits 1..B the index LSB first; bytes filled LSB first and
// zero padded to a whole number of bytes.
std::vector<std::uint8_t> pack(const FeedbackMessage& msg, int B);
FeedbackMessage unpack(std::span<const std::uint8_t> bytes, int B);

}  // namespace ranging
