#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hybridnet/cc4.hpp"
#include "hybridnet/core.hpp"
#include "hybridnet/fc.hpp"
#include "hybridnet/mlp.hpp"

namespace hybridnet {

/// Fast learner: rebuilt from scratch on a batch of recent samples.
class SurfaceLearner {
public:
    virtual ~SurfaceLearner() = default;
    virtual void retrain(const Dataset& recent) = 0;
    [[nodiscard]] virtual double predict(std::span<const double> window) const = 0;
    [[nodiscard]] virtual bool trained() const = 0;
};

/// Slow learner: improved by one adaptation cycle at a time.
class DeepLearner {
public:
    virtual ~DeepLearner() = default;
    virtual void adapt(const Dataset& buffer) = 0;
    [[nodiscard]] virtual double predict(std::span<const double> window) const = 0;
};

class FcSurface final : public SurfaceLearner {
public:
    /// k = ceil(k_fraction * S) unless `fixed_k` is non-zero.
    explicit FcSurface(double k_fraction = 0.05, std::size_t fixed_k = 0)
        : k_fraction_(k_fraction), fixed_k_(fixed_k) {}

    void retrain(const Dataset& recent) override;
    [[nodiscard]] double predict(std::span<const double> window) const override;
    [[nodiscard]] bool trained() const override { return net_.has_value(); }
    [[nodiscard]] const FcNetwork& network() const { return net_.value(); }

private:
    double k_fraction_;
    std::size_t fixed_k_;
    std::optional<FcNetwork> net_;
};

class Cc4Surface final : public SurfaceLearner {
public:
    Cc4Surface(int levels, Encoding encoding, int radius)
        : levels_(levels), encoding_(encoding), radius_(radius) {}

    void retrain(const Dataset& recent) override;
    [[nodiscard]] double predict(std::span<const double> window) const override;
    [[nodiscard]] bool trained() const override { return model_.has_value(); }
    [[nodiscard]] const Cc4Regressor& model() const { return model_.value(); }

private:
    int levels_;
    Encoding encoding_;
    int radius_;
    std::optional<Cc4Regressor> model_;
};

class MlpDeep final : public DeepLearner {
public:
    MlpDeep(Mlp net, TrainConfig cfg) : net_(std::move(net)), cfg_(cfg), rng_(cfg.seed) {}

    void adapt(const Dataset& buffer) override;
    [[nodiscard]] double predict(std::span<const double> window) const override;

    [[nodiscard]] const Mlp& network() const noexcept { return net_; }
    [[nodiscard]] Mlp& network() noexcept { return net_; }

private:
    Mlp net_;
    TrainConfig cfg_;
    std::mt19937_64 rng_;
};

struct CognitiveConfig {
    std::size_t eval_window = 20;     // E
    double change_threshold = 3.0;    // lambda
    std::size_t persistence = 5;      // K
    std::size_t retrain_window = 200; // M, surface agent's memory
    std::size_t deep_window = 1000;   // deep agent's training buffer
    /// On a detected change, drop training samples older than the start of
    /// the evaluation window so both agents learn from the new regime only.
    bool flush_on_change = true;
    Source initial_source = Source::deep;
};

/// Error monitor and output switch.
///
/// A change is flagged when the deep agent's RMS over the last E cycles
/// exceeds lambda times its baseline, the median of its windowed RMS since
/// the previous change. A change forces the surface source. Control returns
/// to the deep agent once its windowed RMS is strictly lower than the
/// surface agent's for K consecutive cycles; ties and short histories keep
/// the current source, and only a change moves it off deep.
class CognitiveAgent {
public:
    explicit CognitiveAgent(CognitiveConfig cfg);

    struct Decision {
        bool change = false;
        Source source = Source::deep;
    };

    /// Records one cycle's absolute errors and returns the source to use
    /// from the next cycle on.
    Decision observe(double err_surface, double err_deep);

    [[nodiscard]] bool detect_change() const;
    [[nodiscard]] Source select_source(bool change, double surface_rms, double deep_rms);

    [[nodiscard]] Source active() const noexcept { return active_; }
    [[nodiscard]] std::size_t recorded() const noexcept { return deep_errors_.size(); }
    [[nodiscard]] double window_rms(Source s) const;
    [[nodiscard]] std::optional<double> baseline() const;
    [[nodiscard]] const CognitiveConfig& config() const noexcept { return cfg_; }

private:
    CognitiveConfig cfg_;
    Source active_;
    std::deque<double> surface_errors_;
    std::deque<double> deep_errors_;
    Vec deep_history_;  // windowed deep RMS since the last change
    std::size_t since_change_ = 0;
    std::size_t wins_ = 0;
};

struct StepRecord {
    std::size_t cycle = 0;
    Vec window;
    double surface_pred = 0.0;
    double deep_pred = 0.0;
    double hybrid_output = 0.0;
    Source source = Source::deep;
    double truth = 0.0;
    double err_surface = 0.0;
    double err_deep = 0.0;
    double err_hybrid = 0.0;
    bool change_detected = false;
};

enum class RunMode { hybrid, surface_only, deep_only };

/// Surface agent, deep agent and cognitive agent run side by side on a
/// stream. Each cycle has two phases: predict() produces both agents'
/// forecasts for the same window, then reveal() scores them, updates the
/// cognitive agent and trains both learners on the trailing M samples.
class HybridSystem {
public:
    HybridSystem(std::unique_ptr<SurfaceLearner> surface, std::unique_ptr<DeepLearner> deep,
                 CognitiveConfig cfg, std::size_t window, RunMode mode = RunMode::hybrid);

    /// Seeds the sample history (e.g. with the pre-training set) and trains
    /// the surface agent on its last M samples. Does not touch the deep agent.
    void prime(const Dataset& history);

    StepRecord predict(std::size_t cycle, std::span<const double> window);
    /// Throws if no prediction is pending for `cycle`.
    StepRecord reveal(std::size_t cycle, double truth);

    StepRecord step(std::size_t cycle, std::span<const double> window, double truth);

    [[nodiscard]] Source active() const noexcept;
    [[nodiscard]] const CognitiveAgent& cognitive() const noexcept { return agent_; }
    /// Recent samples, at most max(M, deep_window) of them.
    [[nodiscard]] const Dataset& history() const noexcept { return history_; }
    [[nodiscard]] std::size_t window() const noexcept { return window_; }
    [[nodiscard]] RunMode mode() const noexcept { return mode_; }
    [[nodiscard]] SurfaceLearner& surface() noexcept { return *surface_; }
    [[nodiscard]] DeepLearner& deep() noexcept { return *deep_; }

private:
    std::unique_ptr<SurfaceLearner> surface_;
    std::unique_ptr<DeepLearner> deep_;
    CognitiveAgent agent_;
    std::size_t window_;
    RunMode mode_;
    Dataset history_;
    std::optional<StepRecord> pending_;
};

struct StreamSummary {
    double cum_rms_surface = 0.0;
    double cum_rms_deep = 0.0;
    double cum_rms_hybrid = 0.0;
    std::vector<std::size_t> change_cycles;
    std::vector<std::size_t> switch_cycles;  // first cycle served by the new source
};

struct StreamResult {
    ErrorTrace trace;
    std::vector<StepRecord> steps;
    StreamSummary summary;
};

/// Runs one cycle per predictable point: the window series[t, t+W) forecasts
/// series[t+W], and the cycle index is t+W. Trace length is len - W.
StreamResult run_stream(HybridSystem& system, std::span<const double> series, bool keep_steps = false);

/// Half-open index range [begin, end) of a series.
struct StreamSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

using SpanHook = std::function<void(HybridSystem& system, std::size_t span_index)>;

/// Streams only through `spans` (ascending, non-overlapping), so no window
/// reaches outside its span. Cycle index is the index of the forecast point
/// in `series`. `after_span` runs once each span is exhausted.
StreamResult run_stream(HybridSystem& system, std::span<const double> series, std::span<const StreamSpan> spans,
                        bool keep_steps = false, const SpanHook& after_span = {});

/// RMS over E cycles of `errors` starting at `first` (clipped at the end).
double forward_window_rms(std::span<const double> errors, std::size_t first, std::size_t window);

}  // namespace hybridnet
