#include "hybridnet/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hybridnet {

void Dataset::add(Sample s) {
    if (samples_.empty() && input_dim_ == 0 && target_dim_ == 0) {
        input_dim_ = s.input.size();
        target_dim_ = s.target.size();
    }
    if (s.input.size() != input_dim_ || s.target.size() != target_dim_) {
        throw Error("Dataset::add: sample dimensions (" + std::to_string(s.input.size()) + ", " +
                    std::to_string(s.target.size()) + ") do not match dataset (" +
                    std::to_string(input_dim_) + ", " + std::to_string(target_dim_) + ")");
    }
    samples_.push_back(std::move(s));
}

Dataset Dataset::slice(std::size_t first, std::size_t last) const {
    last = std::min(last, samples_.size());
    first = std::min(first, last);
    Dataset out(input_dim_, target_dim_);
    out.samples_.assign(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                        samples_.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

Dataset Dataset::tail(std::size_t n) const {
    const std::size_t first = n >= samples_.size() ? 0 : samples_.size() - n;
    return slice(first, samples_.size());
}

std::vector<Vec> Dataset::inputs() const {
    std::vector<Vec> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.input);
    return out;
}

std::vector<Vec> Dataset::targets() const {
    std::vector<Vec> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.target);
    return out;
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw Error("Normalizer: lo/hi size mismatch");
    for (std::size_t d = 0; d < lo_.size(); ++d) {
        if (!(lo_[d] <= hi_[d])) throw Error("Normalizer: lo > hi in dimension " + std::to_string(d));
    }
}

Normalizer Normalizer::fit(std::span<const Vec> data) {
    if (data.empty()) throw Error("Normalizer::fit: empty data");
    const std::size_t dims = data.front().size();
    Vec lo(dims, std::numeric_limits<double>::infinity());
    Vec hi(dims, -std::numeric_limits<double>::infinity());
    for (const auto& row : data) {
        if (row.size() != dims) throw Error("Normalizer::fit: ragged rows");
        for (std::size_t d = 0; d < dims; ++d) {
            lo[d] = std::min(lo[d], row[d]);
            hi[d] = std::max(hi[d], row[d]);
        }
    }
    return Normalizer(std::move(lo), std::move(hi));
}

Normalizer Normalizer::fit_series(std::span<const double> series) {
    if (series.empty()) throw Error("Normalizer::fit_series: empty series");
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    return Normalizer({*mn}, {*mx});
}

double Normalizer::apply(double x, std::size_t dim) const {
    const double span = hi_.at(dim) - lo_[dim];
    if (span == 0.0) return 0.5;
    return (x - lo_[dim]) / span;
}

double Normalizer::denormalize(double x, std::size_t dim) const {
    const double span = hi_.at(dim) - lo_[dim];
    if (span == 0.0) return lo_[dim];
    return lo_[dim] + x * span;
}

Vec Normalizer::apply(std::span<const double> x) const {
    if (x.size() != dims()) throw Error("Normalizer::apply: dimension mismatch");
    Vec out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = apply(x[d], d);
    return out;
}

Vec Normalizer::denormalize(std::span<const double> x) const {
    if (x.size() != dims()) throw Error("Normalizer::denormalize: dimension mismatch");
    Vec out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = denormalize(x[d], d);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* who) {
    if (a.size() != b.size()) {
        throw Error(std::string(who) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    }
}

double sum_sq(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

double rms_error(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "rms_error");
    if (pred.empty()) throw Error("rms_error: empty input");
    return std::sqrt(sum_sq(pred, target) / static_cast<double>(pred.size()));
}

double e1_error(std::span<const double> pred, std::span<const double> target, double divisor) {
    check_pair(pred, target, "e1_error");
    if (!(divisor > 0.0)) throw Error("e1_error: divisor must be positive");
    return sum_sq(pred, target) / divisor;
}

double mse(std::span<const double> pred, std::span<const double> target) {
    check_pair(pred, target, "mse");
    if (pred.empty()) throw Error("mse: empty input");
    return sum_sq(pred, target) / static_cast<double>(pred.size());
}

Dataset sliding_windows(std::span<const double> series, std::size_t window) {
    if (window == 0) throw Error("sliding_windows: window must be >= 1");
    Dataset out(window, 1);
    if (series.size() <= window) return out;
    for (std::size_t k = window; k < series.size(); ++k) {
        Vec in(series.begin() + static_cast<std::ptrdiff_t>(k - window),
               series.begin() + static_cast<std::ptrdiff_t>(k));
        out.add({std::move(in), {series[k]}});
    }
    return out;
}

Vec iterated_predict(const OneStepPredictor& predictor, std::span<const double> seed_window,
                     std::size_t window, std::size_t horizon) {
    if (seed_window.size() != window) {
        throw Error("iterated_predict: seed length " + std::to_string(seed_window.size()) +
                    " != window " + std::to_string(window));
    }
    Vec buf(seed_window.begin(), seed_window.end());
    Vec out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const double next = predictor(buf);
        out.push_back(next);
        if (!buf.empty()) {
            std::shift_left(buf.begin(), buf.end(), 1);
            buf.back() = next;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Source s) noexcept {
    return s == Source::surface ? "surface" : "deep";
}

Source source_from_string(std::string_view s) {
    if (s == "surface") return Source::surface;
    if (s == "deep") return Source::deep;
    throw Error("unknown source '" + std::string(s) + "'");
}

void ErrorTrace::push(const TraceRecord& r) {
    if (!records_.empty() && r.cycle <= records_.back().cycle) {
        throw Error("ErrorTrace: cycle indices must strictly increase");
    }
    if (!(r.err_surface >= 0.0 && r.err_deep >= 0.0 && r.err_hybrid >= 0.0)) {
        throw Error("ErrorTrace: errors must be non-negative");
    }
    records_.push_back(r);
}

Vec ErrorTrace::errors(Source s) const {
    Vec out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(s == Source::surface ? r.err_surface : r.err_deep);
    return out;
}

Vec ErrorTrace::hybrid_errors() const {
    Vec out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.err_hybrid);
    return out;
}

void ErrorTrace::write_csv(std::ostream& os) const {
    os << csv_header << '\n';
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : records_) {
        os << r.cycle << ',' << r.err_surface << ',' << r.err_deep << ',' << r.err_hybrid << ','
           << to_string(r.source) << '\n';
    }
    os.precision(old);
}

void ErrorTrace::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_csv(os);
    if (!os) throw Error("write failed for '" + path + "'");
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
    // std::from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error("trace CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

ErrorTrace ErrorTrace::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != csv_header) throw Error("trace CSV: missing or wrong header");
    ErrorTrace trace;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto pos = rest.find(',');
            fields.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        if (fields.size() != 5) {
            throw Error("trace CSV line " + std::to_string(lineno) + ": expected 5 fields");
        }
        TraceRecord r;
        r.cycle = static_cast<std::size_t>(parse_double(fields[0], lineno));
        r.err_surface = parse_double(fields[1], lineno);
        r.err_deep = parse_double(fields[2], lineno);
        r.err_hybrid = parse_double(fields[3], lineno);
        r.source = source_from_string(fields[4]);
        trace.push(r);
    }
    return trace;
}

ErrorTrace ErrorTrace::read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_csv(is);
}

}  // namespace hybridnet
