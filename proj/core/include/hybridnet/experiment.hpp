#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybridnet/cc4.hpp"
#include "hybridnet/core.hpp"
#include "hybridnet/datagen.hpp"
#include "hybridnet/hybrid.hpp"
#include "hybridnet/mlp.hpp"
#include "hybridnet/serialize.hpp"

namespace hybridnet {

/// Invalid configuration. The CLI maps it to exit status 1; every other
/// Error is a runtime/data failure (status 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class ExperimentKind { mg, cats, smooth, custom };

std::string_view to_string(ExperimentKind k) noexcept;

struct SurfaceSpec {
    std::string kind = "fc";  // "fc" or "cc4"
    double k_fraction = 0.05;
    std::size_t k = 0;        // fixed k when non-zero
    int levels = 16;          // cc4 only
    Encoding encoding = Encoding::thermometer;
    int radius = 1;
};

struct DeepSpec {
    std::vector<std::size_t> hidden{20};
    TrainConfig train;  // train.seed is replaced by the trial seed
    /// Trailing share of the pre-training windows held out for early
    /// stopping (mg, custom).
    double val_fraction = 0.2;
};

struct MgSpec {
    MgParams p1 = mg_p1();
    MgParams p2 = mg_p2();
    std::size_t train = 1000;  // P1 points: pre-training set, then the first stream segment
    std::size_t test = 500;    // P2 points streamed after the switch
};

struct CatsSpec {
    std::string file;
    bool synthetic = false;
};

struct SmoothSpec {
    GaussParams p1 = gauss_p1();
    GaussParams p2 = gauss_p2();
    std::size_t train_side = 30;
    std::size_t test_side = 40;
    std::size_t val_points = 400;  // uniform random validation points per regime
    double lo = -2.0;
    double hi = 2.0;
};

/// One piece of a custom stream: a series file, or generated Mackey-Glass.
struct SegmentSpec {
    std::string file;
    std::optional<MgParams> mg;
    std::size_t count = 0;  // mg only
};

struct CustomSpec {
    std::vector<SegmentSpec> segments;
    std::size_t pretrain = 0;  // leading points used for pre-training; 0 = first segment
};

struct MetricSpec {
    double settle_tolerance = 0.2;
    std::size_t settle_window = 50;  // about one quasi-period of the P2 series
    std::size_t steady_window = 100;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::mg;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    std::string out = "out";
    std::size_t window = 6;
    SurfaceSpec surface;
    DeepSpec deep;
    CognitiveConfig cognitive;
    MetricSpec metrics;
    MgSpec mg;
    CatsSpec cats;
    SmoothSpec smooth;
    CustomSpec custom;
};

/// Defaults for `kind`, before any JSON field is applied.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a JSON document. Missing fields keep the defaults of the chosen
/// experiment kind; unknown fields are rejected. Relative file names are
/// resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

/// Checks value ranges and that referenced files exist. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// Fully resolved config as JSON text.
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);

struct SettleReport {
    std::size_t change_cycle = 0;
    double steady_surface = 0.0;
    double steady_deep = 0.0;
    std::optional<std::size_t> settle_surface;  // cycles after the change
    std::optional<std::size_t> settle_deep;
};

struct BlockE1 {
    std::size_t first = 0;  // 1-based position of the block's first point
    double surface = 0.0;
    double deep = 0.0;
    double hybrid = 0.0;
};

struct SmoothReport {
    double fc_test_rms = 0.0;
    double bp_test_rms_warm = 0.0;     // P1 weights, before relearning
    double bp_test_rms_cycle1 = 0.0;
    double bp_test_rms_converged = 0.0;
    std::size_t p1_stop_cycle = 0;
    std::size_t relearn_stop_cycle = 0;
    std::size_t relearn_best_cycle = 0;
};

struct RunSummary {
    ExperimentKind kind = ExperimentKind::mg;
    std::uint64_t seed = 0;
    double cum_surface = 0.0;  // surface-only baseline
    double cum_deep = 0.0;     // deep-only baseline
    double cum_hybrid = 0.0;
    double hybrid_run_surface = 0.0;  // agents' own errors inside the hybrid run
    double hybrid_run_deep = 0.0;
    std::vector<std::size_t> change_cycles;
    std::vector<std::size_t> switch_cycles;
    std::vector<std::size_t> true_change_cycles;
    std::size_t deep_stop_cycle = 0;
    std::size_t deep_best_cycle = 0;
    double deep_best_val_rms = 0.0;
    std::vector<SettleReport> settle;
    std::vector<BlockE1> e1;
    std::optional<SmoothReport> smooth;
    ErrorTrace trace;
    std::vector<std::pair<std::string, Model>> models;  // file stem -> model
};

/// Runs one trial with every random choice derived from `seed`. No I/O
/// other than reading input series.
RunSummary run_trial(const ExperimentConfig& cfg, std::uint64_t seed);

std::string summary_json(const ExperimentConfig& cfg, const RunSummary& run);

/// Writes trace.csv, summary.json and <stem>.json models into `dir`.
void write_artifacts(const ExperimentConfig& cfg, const RunSummary& run, const std::string& dir);

/// Validates, runs cfg.trials trials with seeds seed, seed+1, ... and writes
/// their artifacts. With several trials each goes to out/trial-<i> and
/// out/summary.json holds mean and range.
std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg);

/// Trace as CSV, one row per cycle. Throws on an empty trace.
void emit_plotdata(const ErrorTrace& trace, const std::string& path);

/// First tau >= 0 such that the RMS of errors[from + tau, from + tau + window)
/// is at most (1 + tolerance) * steady. Empty if that never happens.
std::optional<std::size_t> settle_offset(std::span<const double> errors, std::size_t from, std::size_t window,
                                         double steady, double tolerance);

}  // namespace hybridnet
