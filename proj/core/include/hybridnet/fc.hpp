#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hybridnet/core.hpp"

namespace hybridnet {

/// Gaussian membership exp(-d^2 / (2 sigma^2)). Throws if sigma <= 0.
double membership(double distance, double sigma);

/// ceil(fraction * S), clamped to [1, S].
std::size_t default_k(std::size_t exemplars, double fraction = 0.05);

/// Fast-classification network: one hidden unit per stored exemplar.
///
/// Training takes two passes. The first stores each normalized input as a row
/// of the exemplar matrix and its target as the output weight. The second
/// assigns each exemplar a radius of generalization equal to half the
/// distance to its nearest other exemplar, and uses it as the kernel width.
/// Prediction returns the nearest exemplar's output when the input lies
/// inside that exemplar's radius, and otherwise the Gaussian-weighted average
/// of the k nearest outputs.
class FcNetwork {
public:
    FcNetwork() = default;
    FcNetwork(std::vector<Vec> exemplars, std::vector<Vec> outputs, Vec radii, Vec widths, std::size_t k,
              Normalizer normalizer);

    /// Duplicate inputs would get a zero radius; those radii are raised to the
    /// smallest positive half-distance and counted in repaired_radii().
    static FcNetwork train(const Dataset& data, std::size_t k);

    [[nodiscard]] Vec predict(std::span<const double> x) const;
    [[nodiscard]] double predict_scalar(std::span<const double> x) const { return predict(x).at(0); }

    /// Euclidean distances from normalized `x` to every exemplar.
    [[nodiscard]] Vec distances(std::span<const double> x) const;

    [[nodiscard]] std::size_t size() const noexcept { return exemplars_.size(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return normalizer_.dims(); }
    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] const std::vector<Vec>& exemplars() const noexcept { return exemplars_; }
    [[nodiscard]] const std::vector<Vec>& outputs() const noexcept { return outputs_; }
    [[nodiscard]] const Vec& radii() const noexcept { return radii_; }
    [[nodiscard]] const Vec& widths() const noexcept { return widths_; }
    [[nodiscard]] const Normalizer& normalizer() const noexcept { return normalizer_; }
    [[nodiscard]] std::size_t repaired_radii() const noexcept { return repaired_radii_; }

    bool operator==(const FcNetwork& o) const {
        return exemplars_ == o.exemplars_ && outputs_ == o.outputs_ && radii_ == o.radii_ &&
               widths_ == o.widths_ && k_ == o.k_ && normalizer_ == o.normalizer_;
    }

private:
    std::vector<Vec> exemplars_;
    std::vector<Vec> outputs_;
    Vec radii_;
    Vec widths_;
    std::size_t k_ = 1;
    Normalizer normalizer_;
    std::size_t repaired_radii_ = 0;
};

inline FcNetwork train_fc(const Dataset& data, std::size_t k) { return FcNetwork::train(data, k); }

}  // namespace hybridnet
