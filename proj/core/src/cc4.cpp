#include "hybridnet/cc4.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace hybridnet {

std::size_t Quantizer::bits() const {
    if (levels < 2) throw Error("Quantizer: levels must be >= 2");
    if (encoding == Encoding::thermometer) return static_cast<std::size_t>(levels - 1);
    return static_cast<std::size_t>(std::bit_width(static_cast<unsigned>(levels - 1)));
}

int Quantizer::level(double value) const {
    if (levels < 2) throw Error("Quantizer: levels must be >= 2");
    if (!(hi > lo)) return 0;
    const double v = std::clamp(value, lo, hi);
    const double scaled = (v - lo) / (hi - lo) * static_cast<double>(levels - 1);
    return std::clamp(static_cast<int>(std::lround(scaled)), 0, levels - 1);
}

double Quantizer::value_of(int lvl) const {
    if (levels < 2) throw Error("Quantizer: levels must be >= 2");
    return lo + static_cast<double>(lvl) / static_cast<double>(levels - 1) * (hi - lo);
}

Bits encode(double value, const Quantizer& q) {
    const int lvl = q.level(value);
    const std::size_t n = q.bits();
    Bits out(n, 0);
    if (q.encoding == Encoding::thermometer) {
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i) < lvl ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < n; ++i) out[n - 1 - i] = (static_cast<unsigned>(lvl) >> i) & 1U;
    }
    return out;
}

double decode(std::span<const std::uint8_t> bits, const Quantizer& q) {
    if (bits.size() != q.bits()) throw Error("decode: code length does not match quantizer");
    int lvl = 0;
    if (q.encoding == Encoding::thermometer) {
        lvl = static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    } else {
        for (auto b : bits) lvl = (lvl << 1) | (b ? 1 : 0);
        lvl = std::min(lvl, q.levels - 1);
    }
    return q.value_of(lvl);
}

// ---------------------------------------------------------------------------

Cc4Network::Cc4Network(int radius, std::size_t input_bits, std::size_t output_bits,
                       std::vector<HiddenUnit> units)
    : radius_(radius), input_bits_(input_bits), output_bits_(output_bits), units_(std::move(units)) {
    if (radius_ < 0) throw Error("Cc4Network: radius must be >= 0");
    for (const auto& u : units_) {
        if (u.weights.size() != input_bits_ || u.output_weights.size() != output_bits_) {
            throw Error("Cc4Network: hidden unit has inconsistent widths");
        }
        const auto not_unit = [](std::int8_t w) { return w != 1 && w != -1; };
        if (std::any_of(u.weights.begin(), u.weights.end(), not_unit) ||
            std::any_of(u.output_weights.begin(), u.output_weights.end(), not_unit)) {
            throw Error("Cc4Network: non-bias weights must be +1 or -1");
        }
    }
}

Cc4Network Cc4Network::train(std::span<const BinaryPattern> patterns, int radius) {
    if (patterns.empty()) throw Error("train_cc4: empty pattern list");
    if (radius < 0) throw Error("train_cc4: radius must be >= 0");
    const std::size_t n_in = patterns.front().input.size();
    const std::size_t n_out = patterns.front().output.size();
    const auto is_bit = [](std::uint8_t b) { return b <= 1; };

    std::vector<HiddenUnit> units;
    units.reserve(patterns.size());
    for (const auto& p : patterns) {
        if (p.input.size() != n_in || p.output.size() != n_out) {
            throw Error("train_cc4: inconsistent pattern widths");
        }
        if (!std::all_of(p.input.begin(), p.input.end(), is_bit) ||
            !std::all_of(p.output.begin(), p.output.end(), is_bit)) {
            throw Error("train_cc4: patterns must be 0/1");
        }
        HiddenUnit u;
        u.weights.resize(n_in);
        int ones = 0;
        for (std::size_t j = 0; j < n_in; ++j) {
            u.weights[j] = p.input[j] ? 1 : -1;
            ones += p.input[j];
        }
        u.bias_weight = radius - ones + 1;
        u.output_weights.resize(n_out);
        for (std::size_t m = 0; m < n_out; ++m) u.output_weights[m] = p.output[m] ? 1 : -1;
        units.push_back(std::move(u));
    }
    return Cc4Network(radius, n_in, n_out, std::move(units));
}

void Cc4Network::check_input(std::span<const std::uint8_t> x) const {
    if (x.size() != input_bits_) {
        throw Error("Cc4Network: input has " + std::to_string(x.size()) + " bits, expected " +
                    std::to_string(input_bits_));
    }
}

std::vector<int> Cc4Network::pre_step_sums(std::span<const std::uint8_t> x) const {
    check_input(x);
    std::vector<int> sums(units_.size());
    for (std::size_t i = 0; i < units_.size(); ++i) {
        const auto& w = units_[i].weights;
        int acc = units_[i].bias_weight;  // bias input is constant 1
        for (std::size_t j = 0; j < input_bits_; ++j) acc += w[j] * static_cast<int>(x[j]);
        sums[i] = acc;
    }
    return sums;
}

Bits Cc4Network::hidden_activations(std::span<const std::uint8_t> x) const {
    const auto sums = pre_step_sums(x);
    Bits h(sums.size());
    std::transform(sums.begin(), sums.end(), h.begin(), [](int s) { return s > 0 ? 1 : 0; });
    return h;
}

Bits Cc4Network::predict(std::span<const std::uint8_t> x) const {
    const Bits h = hidden_activations(x);
    std::vector<int> acc(output_bits_, 0);
    for (std::size_t i = 0; i < units_.size(); ++i) {
        if (!h[i]) continue;
        for (std::size_t m = 0; m < output_bits_; ++m) acc[m] += units_[i].output_weights[m];
    }
    Bits out(output_bits_);
    std::transform(acc.begin(), acc.end(), out.begin(), [](int s) { return s > 0 ? 1 : 0; });
    return out;
}

// ---------------------------------------------------------------------------

Cc4Regressor::Cc4Regressor(std::vector<Quantizer> input_q, Quantizer output_q, Cc4Network net)
    : input_q_(std::move(input_q)), output_q_(output_q), net_(std::move(net)) {
    std::size_t total = 0;
    for (const auto& q : input_q_) total += q.bits();
    if (total != net_.input_bits() || output_q_.bits() != net_.output_bits()) {
        throw Error("Cc4Regressor: quantizer widths do not match network");
    }
}

std::pair<std::vector<Quantizer>, Quantizer> Cc4Regressor::fit_quantizers(const Dataset& data, int levels,
                                                                          Encoding encoding) {
    if (data.empty()) throw Error("Cc4Regressor::fit_quantizers: empty dataset");
    if (data.target_dim() != 1) throw Error("Cc4Regressor: scalar targets only");
    const auto norm_in = Normalizer::fit(data.inputs());
    const auto norm_out = Normalizer::fit(data.targets());
    std::vector<Quantizer> in_q;
    for (std::size_t d = 0; d < norm_in.dims(); ++d) {
        in_q.push_back({levels, norm_in.lo()[d], norm_in.hi()[d], encoding});
    }
    return {std::move(in_q), Quantizer{levels, norm_out.lo()[0], norm_out.hi()[0], encoding}};
}

Bits Cc4Regressor::encode_input(std::span<const double> x) const {
    if (x.size() != input_q_.size()) {
        throw Error("Cc4Regressor: input has " + std::to_string(x.size()) + " dims, expected " +
                    std::to_string(input_q_.size()));
    }
    Bits code;
    code.reserve(net_.input_bits());
    for (std::size_t d = 0; d < x.size(); ++d) {
        const Bits part = encode(x[d], input_q_[d]);
        code.insert(code.end(), part.begin(), part.end());
    }
    return code;
}

Cc4Regressor Cc4Regressor::train(const Dataset& data, std::vector<Quantizer> input_q, Quantizer output_q,
                                 int radius) {
    if (data.empty()) throw Error("Cc4Regressor::train: empty dataset");
    if (data.input_dim() != input_q.size()) throw Error("Cc4Regressor::train: one quantizer per input dim");
    if (data.target_dim() != 1) throw Error("Cc4Regressor: scalar targets only");

    Cc4Regressor shell;
    shell.input_q_ = std::move(input_q);
    shell.output_q_ = output_q;

    std::vector<BinaryPattern> patterns;
    patterns.reserve(data.size());
    for (const auto& s : data) {
        patterns.push_back({shell.encode_input(s.input), encode(s.target[0], output_q)});
    }
    auto net = Cc4Network::train(patterns, radius);
    return Cc4Regressor(std::move(shell.input_q_), output_q, std::move(net));
}

double Cc4Regressor::predict(std::span<const double> x) const {
    const Bits out = net_.predict(encode_input(x));
    return decode(out, output_q_);
}

}  // namespace hybridnet
