#include "hybridnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridnet {

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.size() < 2) throw Error("Mlp: need at least one hidden layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        if (L.inputs == 0 || L.outputs == 0) throw Error("Mlp: layer sizes must be positive");
        if (L.weights.size() != L.inputs * L.outputs || L.biases.size() != L.outputs) {
            throw Error("Mlp: layer " + std::to_string(l) + " has inconsistent weight shape");
        }
        if (l > 0 && layers_[l - 1].outputs != L.inputs) throw Error("Mlp: layer sizes do not chain");
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(L.weights.begin(), L.weights.end(), finite) ||
            !std::all_of(L.biases.begin(), L.biases.end(), finite)) {
            throw Error("Mlp: non-finite weight");
        }
    }
    reset_momentum();
}

Mlp Mlp::init(std::span<const std::size_t> sizes, std::uint64_t seed) {
    if (sizes.size() < 3) throw Error("Mlp::init: need input, >= 1 hidden and output sizes");
    if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
        throw Error("Mlp::init: sizes must be positive");
    }
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer L{sizes[l], sizes[l + 1], Vec(sizes[l] * sizes[l + 1]), Vec(sizes[l + 1])};
        const double bound = 1.0 / std::sqrt(static_cast<double>(L.inputs));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& w : L.weights) w = dist(rng);
        for (auto& b : L.biases) b = dist(rng);
        layers.push_back(std::move(L));
    }
    return Mlp(std::move(layers));
}

const Vec& Mlp::forward(std::span<const double> x, std::vector<Vec>& scratch) const {
    if (x.size() != input_dim()) {
        throw Error("Mlp: input has " + std::to_string(x.size()) + " dims, expected " +
                    std::to_string(input_dim()));
    }
    const std::size_t n = layers_.size();
    scratch.resize(n + 1);
    scratch[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n; ++l) {
        const auto& L = layers_[l];
        const Vec& in = scratch[l];
        Vec& out = scratch[l + 1];
        out.resize(L.outputs);
        for (std::size_t o = 0; o < L.outputs; ++o) {
            const double* row = &L.weights[o * L.inputs];
            const double z = std::inner_product(in.begin(), in.end(), row, L.biases[o]);
            out[o] = l + 1 < n ? sigmoid(z) : z;
        }
    }
    return scratch.back();
}

Vec Mlp::forward(std::span<const double> x) const {
    std::vector<Vec> scratch;
    return forward(x, scratch);
}

double Mlp::loss(const Sample& s) const {
    const Vec y = forward(s.input);
    if (s.target.size() != y.size()) throw Error("Mlp: target dimension mismatch");
    double acc = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) acc += (y[m] - s.target[m]) * (y[m] - s.target[m]);
    return 0.5 * acc;
}

Vec Mlp::gradient(const Sample& s) const {
    std::vector<Vec> acts;
    const Vec& y = forward(s.input, acts);
    if (s.target.size() != y.size()) throw Error("Mlp: target dimension mismatch");

    std::vector<Vec> grads(layers_.size());
    // delta = dLoss/dz for the current layer; linear output so dz = y - t.
    Vec delta(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) delta[m] = y[m] - s.target[m];

    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& L = layers_[l];
        const Vec& in = acts[l];
        Vec& g = grads[l];
        g.assign(L.weights.size() + L.biases.size(), 0.0);
        for (std::size_t o = 0; o < L.outputs; ++o) {
            for (std::size_t i = 0; i < L.inputs; ++i) g[o * L.inputs + i] = delta[o] * in[i];
            g[L.weights.size() + o] = delta[o];
        }
        if (l == 0) break;
        Vec prev(L.inputs, 0.0);
        for (std::size_t o = 0; o < L.outputs; ++o) {
            for (std::size_t i = 0; i < L.inputs; ++i) prev[i] += L.weights[o * L.inputs + i] * delta[o];
        }
        for (std::size_t i = 0; i < L.inputs; ++i) prev[i] *= in[i] * (1.0 - in[i]);  // sigmoid'
        delta = std::move(prev);
    }

    Vec flat;
    flat.reserve(parameter_count());
    for (const auto& g : grads) flat.insert(flat.end(), g.begin(), g.end());
    return flat;
}

double Mlp::backprop_update(const Sample& s, double learning_rate, double momentum) {
    if (s.target.size() != output_dim()) throw Error("Mlp: target dimension mismatch");
    const std::size_t n = layers_.size();
    forward(s.input, acts_);
    deltas_.resize(n);

    double before = 0.0;
    Vec& top = deltas_[n - 1];
    top.resize(output_dim());
    for (std::size_t m = 0; m < top.size(); ++m) {
        top[m] = acts_[n][m] - s.target[m];
        before += top[m] * top[m];
    }
    for (std::size_t l = n - 1; l > 0; --l) {
        const auto& L = layers_[l];
        const Vec& in = acts_[l];
        Vec& prev = deltas_[l - 1];
        prev.assign(L.inputs, 0.0);
        for (std::size_t o = 0; o < L.outputs; ++o) {
            const double* row = &L.weights[o * L.inputs];
            for (std::size_t i = 0; i < L.inputs; ++i) prev[i] += row[i] * deltas_[l][o];
        }
        for (std::size_t i = 0; i < L.inputs; ++i) prev[i] *= in[i] * (1.0 - in[i]);
    }
    for (const auto& d : deltas_) {
        if (!std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); })) {
            throw Error("Mlp::backprop_update: non-finite gradient (diverged)");
        }
    }

    for (std::size_t l = 0; l < n; ++l) {
        auto& L = layers_[l];
        auto& V = velocity_[l];
        const Vec& in = acts_[l];
        const Vec& d = deltas_[l];
        for (std::size_t o = 0; o < L.outputs; ++o) {
            double* w = &L.weights[o * L.inputs];
            double* v = &V.weights[o * L.inputs];
            for (std::size_t i = 0; i < L.inputs; ++i) {
                v[i] = momentum * v[i] - learning_rate * d[o] * in[i];
                w[i] += v[i];
            }
            V.biases[o] = momentum * V.biases[o] - learning_rate * d[o];
            L.biases[o] += V.biases[o];
        }
    }
    return 0.5 * before;
}

std::size_t Mlp::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& L : layers_) n += L.weights.size() + L.biases.size();
    return n;
}

namespace {

template <class Layers>
auto* slot_in(Layers& layers, std::size_t i) {
    for (auto& L : layers) {
        if (i < L.weights.size()) return &L.weights[i];
        i -= L.weights.size();
        if (i < L.biases.size()) return &L.biases[i];
        i -= L.biases.size();
    }
    throw Error("Mlp: parameter index out of range");
}

}  // namespace

double Mlp::parameter(std::size_t i) const { return *slot_in(layers_, i); }

void Mlp::set_parameter(std::size_t i, double v) { *slot_in(layers_, i) = v; }

void Mlp::reset_momentum() {
    velocity_ = layers_;
    for (auto& V : velocity_) {
        std::fill(V.weights.begin(), V.weights.end(), 0.0);
        std::fill(V.biases.begin(), V.biases.end(), 0.0);
    }
}

std::vector<std::size_t> Mlp::sizes() const {
    std::vector<std::size_t> out;
    if (layers_.empty()) return out;
    out.push_back(layers_.front().inputs);
    for (const auto& L : layers_) out.push_back(L.outputs);
    return out;
}

// ---------------------------------------------------------------------------

double adaptation_cycle(Mlp& net, const Dataset& train, const TrainConfig& cfg, std::mt19937_64& rng) {
    if (train.empty()) throw Error("adaptation_cycle: empty training set");
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (auto i : order) total += net.backprop_update(train[i], cfg.learning_rate, cfg.momentum);
    return total / static_cast<double>(train.size());
}

double evaluate_rms(const Mlp& net, const Dataset& data) {
    if (data.empty()) throw Error("evaluate_rms: empty dataset");
    double acc = 0.0;
    std::size_t n = 0;
    std::vector<Vec> scratch;
    for (const auto& s : data) {
        const Vec& y = net.forward(s.input, scratch);
        for (std::size_t m = 0; m < y.size(); ++m) {
            acc += (y[m] - s.target[m]) * (y[m] - s.target[m]);
            ++n;
        }
    }
    return std::sqrt(acc / static_cast<double>(n));
}

TrainReport fit_early_stopping(Mlp& net, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                               const CycleHook& on_cycle) {
    if (train.empty() || val.empty()) throw Error("fit_early_stopping: empty train or validation set");
    if (cfg.patience < 1 || cfg.max_cycles < 1) throw Error("fit_early_stopping: patience and max_cycles >= 1");

    std::mt19937_64 rng(cfg.seed);
    TrainReport report;
    Mlp best = net;
    report.best_val_rms = std::numeric_limits<double>::infinity();

    for (std::size_t cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
        report.train_loss.push_back(adaptation_cycle(net, train, cfg, rng));
        const double v = evaluate_rms(net, val);
        report.val_rms.push_back(v);
        report.stop_cycle = cycle;
        if (on_cycle) on_cycle(cycle, net, v);
        if (v < report.best_val_rms) {
            report.best_val_rms = v;
            report.best_cycle = cycle;
            best = net;
        } else if (cycle - report.best_cycle >= cfg.patience) {
            break;
        }
    }
    net = std::move(best);
    net.reset_momentum();
    return report;
}

}  // namespace hybridnet
