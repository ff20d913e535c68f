#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hybridnet/core.hpp"

namespace hybridnet {

using Bits = std::vector<std::uint8_t>;

enum class Encoding { thermometer, positional_binary };

/// Uniform scalar quantizer onto `levels` levels spanning [lo, hi].
///
/// Thermometer codes use levels-1 bits (bit i set iff level > i), so the
/// Hamming distance between two codes equals their level difference.
/// Positional-binary codes use ceil(log2 levels) bits, MSB first.
struct Quantizer {
    int levels = 256;
    double lo = 0.0;
    double hi = 1.0;
    Encoding encoding = Encoding::thermometer;

    [[nodiscard]] std::size_t bits() const;
    /// Clamps into [lo, hi] and rounds to the nearest level.
    [[nodiscard]] int level(double value) const;
    [[nodiscard]] double value_of(int level) const;

    bool operator==(const Quantizer&) const = default;
};

Bits encode(double value, const Quantizer& q);

/// Thermometer codes decode by counting ones, so a non-monotone code such as
/// 1010 still yields a level. Binary codes are clamped to levels-1.
double decode(std::span<const std::uint8_t> bits, const Quantizer& q);

struct BinaryPattern {
    Bits input;
    Bits output;
};

/// Three-layer corner-classification network trained in a single pass.
///
/// Each training pattern becomes one hidden unit. Its input weights are +1
/// where the pattern has a 1 and -1 where it has a 0; the bias weight is
/// r - s + 1 with s the number of ones. For input x at Hamming distance d
/// from the exemplar the hidden pre-activation is r + 1 - d, so the unit fires
/// exactly on the Hamming ball of radius r. Output weights are +1/-1 for
/// target bits 1/0. All activations are the binary step with step(0) = 0.
class Cc4Network {
public:
    struct HiddenUnit {
        std::vector<std::int8_t> weights;  // +1 / -1, one per input bit
        int bias_weight = 0;
        std::vector<std::int8_t> output_weights;  // +1 / -1, one per output bit
        bool operator==(const HiddenUnit&) const = default;
    };

    Cc4Network() = default;
    Cc4Network(int radius, std::size_t input_bits, std::size_t output_bits, std::vector<HiddenUnit> units);

    /// Throws on an empty pattern list, inconsistent widths, non-binary
    /// values or a negative radius.
    static Cc4Network train(std::span<const BinaryPattern> patterns, int radius);

    /// Weighted input sum of every hidden unit, bias included.
    [[nodiscard]] std::vector<int> pre_step_sums(std::span<const std::uint8_t> x) const;
    [[nodiscard]] Bits hidden_activations(std::span<const std::uint8_t> x) const;
    [[nodiscard]] Bits predict(std::span<const std::uint8_t> x) const;

    [[nodiscard]] int radius() const noexcept { return radius_; }
    [[nodiscard]] std::size_t input_bits() const noexcept { return input_bits_; }
    [[nodiscard]] std::size_t output_bits() const noexcept { return output_bits_; }
    [[nodiscard]] std::size_t hidden_count() const noexcept { return units_.size(); }
    [[nodiscard]] const std::vector<HiddenUnit>& units() const noexcept { return units_; }

    bool operator==(const Cc4Network&) const = default;

private:
    void check_input(std::span<const std::uint8_t> x) const;

    int radius_ = 0;
    std::size_t input_bits_ = 0;
    std::size_t output_bits_ = 0;
    std::vector<HiddenUnit> units_;
};

inline Cc4Network train_cc4(std::span<const BinaryPattern> patterns, int radius) {
    return Cc4Network::train(patterns, radius);
}

/// Analog wrapper: each input dimension is quantized separately and the
/// codes are concatenated; the radius applies to the concatenated code.
class Cc4Regressor {
public:
    Cc4Regressor() = default;
    Cc4Regressor(std::vector<Quantizer> input_q, Quantizer output_q, Cc4Network net);

    static Cc4Regressor train(const Dataset& data, std::vector<Quantizer> input_q, Quantizer output_q,
                              int radius);

    /// Quantizers spanning the observed range of each input dimension and of
    /// the (scalar) target.
    static std::pair<std::vector<Quantizer>, Quantizer> fit_quantizers(const Dataset& data, int levels,
                                                                       Encoding encoding);

    [[nodiscard]] Bits encode_input(std::span<const double> x) const;
    [[nodiscard]] double predict(std::span<const double> x) const;

    [[nodiscard]] const Cc4Network& network() const noexcept { return net_; }
    [[nodiscard]] const std::vector<Quantizer>& input_quantizers() const noexcept { return input_q_; }
    [[nodiscard]] const Quantizer& output_quantizer() const noexcept { return output_q_; }

    bool operator==(const Cc4Regressor&) const = default;

private:
    std::vector<Quantizer> input_q_;
    Quantizer output_q_;
    Cc4Network net_;
};

}  // namespace hybridnet
