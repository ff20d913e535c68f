#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "hybridnet/core.hpp"

namespace hybridnet {

double sigmoid(double z) noexcept;

/// Fully connected layer; weights are row-major outputs x inputs.
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    Vec weights;
    Vec biases;

    [[nodiscard]] double w(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }
    bool operator==(const DenseLayer&) const = default;
};

/// Multi-layer perceptron with logistic-sigmoid hidden layers and a linear
/// output layer, trained online by backpropagation with momentum.
class Mlp {
public:
    Mlp() = default;
    /// Builds a network from explicit layers; throws if shapes do not chain.
    explicit Mlp(std::vector<DenseLayer> layers);

    /// Weights and biases drawn uniformly in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    /// Needs at least one hidden layer.
    static Mlp init(std::span<const std::size_t> sizes, std::uint64_t seed);

    [[nodiscard]] Vec forward(std::span<const double> x) const;
    /// Same, reusing `scratch` for the layer activations (output is
    /// scratch.back()). For hot loops.
    const Vec& forward(std::span<const double> x, std::vector<Vec>& scratch) const;

    /// 0.5 * ||forward(x) - t||^2
    [[nodiscard]] double loss(const Sample& s) const;

    /// Gradient of loss() over every parameter, in parameter() order.
    [[nodiscard]] Vec gradient(const Sample& s) const;

    /// One momentum step on a single sample. Returns the loss before the
    /// update. Throws if the gradient is not finite.
    double backprop_update(const Sample& s, double learning_rate, double momentum);

    /// Flat view: layer by layer, weights then biases.
    [[nodiscard]] std::size_t parameter_count() const noexcept;
    [[nodiscard]] double parameter(std::size_t i) const;
    void set_parameter(std::size_t i, double v);

    void reset_momentum();

    [[nodiscard]] std::vector<std::size_t> sizes() const;
    [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    [[nodiscard]] std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().inputs; }
    [[nodiscard]] std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().outputs; }

    /// Compares weights and biases only; momentum state is ignored.
    bool operator==(const Mlp& o) const { return layers_ == o.layers_; }

private:
    std::vector<DenseLayer> layers_;
    std::vector<DenseLayer> velocity_;
    std::vector<Vec> acts_;    // scratch for backprop_update
    std::vector<Vec> deltas_;
};

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t max_cycles = 5000;
    std::size_t patience = 50;
    std::uint64_t seed = 1;
};

struct TrainReport {
    std::size_t stop_cycle = 0;
    std::size_t best_cycle = 0;
    double best_val_rms = 0.0;
    Vec train_loss;  // per cycle, index 0 is cycle 1
    Vec val_rms;
};

/// One full pass over `train` in a freshly shuffled order. Returns the mean
/// pre-update loss.
double adaptation_cycle(Mlp& net, const Dataset& train, const TrainConfig& cfg, std::mt19937_64& rng);

/// RMS over every output component of every sample.
double evaluate_rms(const Mlp& net, const Dataset& data);

/// Runs adaptation cycles from the network's current weights until the
/// validation RMS has not improved for `patience` cycles or `max_cycles` is
/// reached, then restores the best-validation weights.
/// `on_cycle` sees every cycle's weights and validation RMS before the
/// stopping test.
using CycleHook = std::function<void(std::size_t cycle, const Mlp& net, double val_rms)>;
TrainReport fit_early_stopping(Mlp& net, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                               const CycleHook& on_cycle = {});

}  // namespace hybridnet
