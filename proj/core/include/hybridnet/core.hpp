#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hybridnet {

using Vec = std::vector<double>;

/// Raised for violated preconditions: dimension mismatches, empty inputs,
/// malformed files. Carries a human-readable message only.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sample {
    Vec input;
    Vec target;
};

/// Ordered collection of samples sharing one input and one target width.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t input_dim, std::size_t target_dim)
        : input_dim_(input_dim), target_dim_(target_dim) {}

    /// Throws if the sample does not conform to the dataset's dimensions.
    /// The first sample fixes the dimensions of a default-constructed set.
    void add(Sample s);

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] std::size_t target_dim() const noexcept { return target_dim_; }

    [[nodiscard]] const Sample& operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] const std::vector<Sample>& samples() const noexcept { return samples_; }
    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }

    /// Half-open slice [first, last).
    [[nodiscard]] Dataset slice(std::size_t first, std::size_t last) const;
    /// The trailing `n` samples (all of them if n >= size()).
    [[nodiscard]] Dataset tail(std::size_t n) const;

    /// Row-major matrix of inputs, one row per sample.
    [[nodiscard]] std::vector<Vec> inputs() const;
    [[nodiscard]] std::vector<Vec> targets() const;

private:
    std::vector<Sample> samples_;
    std::size_t input_dim_ = 0;
    std::size_t target_dim_ = 0;
};

/// Per-dimension min-max scaling onto [0, 1]. A dimension with lo == hi maps
/// every value to 0.5.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(Vec lo, Vec hi);

    /// Fits lo/hi over the rows of `data`. Throws on empty or ragged input.
    static Normalizer fit(std::span<const Vec> data);
    static Normalizer fit_series(std::span<const double> series);

    [[nodiscard]] Vec apply(std::span<const double> x) const;
    [[nodiscard]] Vec denormalize(std::span<const double> x) const;
    [[nodiscard]] double apply(double x, std::size_t dim = 0) const;
    [[nodiscard]] double denormalize(double x, std::size_t dim = 0) const;

    [[nodiscard]] std::size_t dims() const noexcept { return lo_.size(); }
    [[nodiscard]] const Vec& lo() const noexcept { return lo_; }
    [[nodiscard]] const Vec& hi() const noexcept { return hi_; }

    bool operator==(const Normalizer&) const = default;

private:
    Vec lo_;
    Vec hi_;
};

/// Root-mean-square difference. Throws on empty input or length mismatch.
double rms_error(std::span<const double> pred, std::span<const double> target);

/// Block error: sum of squared differences divided by `divisor` (not by the
/// length). The CATS convention divides a 20-point block sum by 100.
double e1_error(std::span<const double> pred, std::span<const double> target,
                double divisor = 100.0);

double mse(std::span<const double> pred, std::span<const double> target);

/// One-step-ahead pairs: x[k-W+1..k] -> x[k+1]. Yields len-W samples, or an
/// empty dataset when the series is too short.
Dataset sliding_windows(std::span<const double> series, std::size_t window);

/// Maps a window of the most recent W values to the next value.
using OneStepPredictor = std::function<double(std::span<const double>)>;

/// Closed-loop forecast: after each step the oldest value leaves the window
/// and the prediction is appended.
Vec iterated_predict(const OneStepPredictor& predictor, std::span<const double> seed_window,
                     std::size_t window, std::size_t horizon);

enum class Source { surface, deep };

std::string_view to_string(Source s) noexcept;
Source source_from_string(std::string_view s);

struct TraceRecord {
    std::size_t cycle = 0;
    double err_surface = 0.0;
    double err_deep = 0.0;
    double err_hybrid = 0.0;
    Source source = Source::deep;

    bool operator==(const TraceRecord&) const = default;
};

/// Per-cycle error curve of a hybrid run. Cycle indices must strictly
/// increase and errors must be non-negative.
class ErrorTrace {
public:
    void push(const TraceRecord& r);

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] const TraceRecord& operator[](std::size_t i) const { return records_[i]; }
    [[nodiscard]] const std::vector<TraceRecord>& records() const noexcept { return records_; }

    [[nodiscard]] Vec errors(Source s) const;
    [[nodiscard]] Vec hybrid_errors() const;

    static constexpr std::string_view csv_header = "cycle,err_surface,err_deep,err_hybrid,source";

    /// Writes the header plus one row per record. Doubles are printed with
    /// 17 significant digits so a parse-back is exact.
    void write_csv(std::ostream& os) const;
    void write_csv(const std::string& path) const;
    static ErrorTrace read_csv(std::istream& is);
    static ErrorTrace read_csv(const std::string& path);

private:
    std::vector<TraceRecord> records_;
};

}  // namespace hybridnet
