#include "hybridnet/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace hybridnet {

MgParams mg_p1() { return MgParams{}; }

MgParams mg_p2() {
    MgParams p;
    p.d = 17.0;
    return p;
}

namespace {

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

/// Grid values and derivatives of the integrated solution; time is measured
/// in integrator steps.
class MgHistory {
public:
    MgHistory(const MgParams& p, std::size_t steps) : p_(p), lag_(snap(p.d / p.dt)) {
        x_.reserve(steps + 1);
        dx_.reserve(steps + 1);
    }

    [[nodiscard]] double rhs(double x, double xd) const {
        return -p_.b * x + p_.a * xd / (1.0 + std::pow(xd, p_.c));
    }

    /// x(t - d) for t = (k + frac) steps.
    [[nodiscard]] double delayed(std::size_t k, double frac) const {
        const double s = static_cast<double>(k) + frac - lag_;
        if (s <= 0.0) return p_.x0;
        const double base = std::floor(s);
        const auto i0 = static_cast<std::size_t>(base);
        const double theta = s - base;
        if (theta == 0.0) return x_[i0];
        // Cubic Hermite on [i0, i0+1] with unit spacing in step units.
        const double y0 = x_[i0];
        const double y1 = x_[i0 + 1];
        const double m0 = dx_[i0] * p_.dt;
        const double m1 = dx_[i0 + 1] * p_.dt;
        const double t2 = theta * theta;
        const double t3 = t2 * theta;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * m0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * m1;
    }

    void run(std::size_t steps) {
        const double h = p_.dt;
        x_.push_back(p_.x0);
        for (std::size_t k = 0; k < steps; ++k) {
            const double x = x_[k];
            const double k1 = rhs(x, delayed(k, 0.0));
            dx_.push_back(k1);
            const double mid = delayed(k, 0.5);
            const double k2 = rhs(x + 0.5 * h * k1, mid);
            const double k3 = rhs(x + 0.5 * h * k2, mid);
            const double k4 = rhs(x + h * k3, delayed(k, 1.0));
            const double next = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!std::isfinite(next)) {
                throw Error("mg_generate: non-finite state at step " + std::to_string(k + 1));
            }
            x_.push_back(next);
        }
    }

    [[nodiscard]] const Vec& values() const noexcept { return x_; }

private:
    MgParams p_;
    double lag_;
    Vec x_;
    Vec dx_;
};

}  // namespace

Vec mg_generate(const MgParams& p, std::size_t n) {
    if (!(p.dt > 0.0)) throw Error("mg_generate: dt must be positive");
    if (!(p.d >= p.dt)) throw Error("mg_generate: delay must be at least one step");
    if (!(p.sample_every > 0.0)) throw Error("mg_generate: sample_every must be positive");
    const double ratio = snap(p.sample_every / p.dt);
    if (ratio != std::round(ratio) || ratio < 1.0) {
        throw Error("mg_generate: sample_every must be a positive multiple of dt");
    }
    if (n == 0) return {};
    const auto per_sample = static_cast<std::size_t>(ratio);
    const std::size_t emitted = p.discard + n;
    const std::size_t steps = (emitted - 1) * per_sample;

    MgHistory hist(p, steps);
    hist.run(steps);
    Vec out;
    out.reserve(n);
    for (std::size_t j = p.discard; j < emitted; ++j) out.push_back(hist.values()[j * per_sample]);
    return out;
}

// ---------------------------------------------------------------------------

GaussParams gauss_p1() { return GaussParams{{0.0, 0.0}, {0.8, 0.2, 0.2, 0.1}}; }
GaussParams gauss_p2() { return GaussParams{{-0.2, 0.7}, {0.25, 0.3, 0.3, 1.0}}; }

double gauss_pdf(std::array<double, 2> x, const GaussParams& p) {
    const auto& s = p.sigma;
    if (std::abs(s[1] - s[2]) > 1e-12 * std::max(std::abs(s[1]), 1.0)) {
        throw Error("gauss_pdf: covariance is not symmetric");
    }
    const double det = p.det();
    if (!(det > 0.0) || !(s[0] > 0.0)) throw Error("gauss_pdf: covariance is not positive-definite");
    const double d0 = x[0] - p.mu[0];
    const double d1 = x[1] - p.mu[1];
    // Sigma^-1 = [s3 -s1; -s2 s0] / det
    const double q = (s[3] * d0 * d0 - (s[1] + s[2]) * d0 * d1 + s[0] * d1 * d1) / det;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

Dataset gauss_grid(const GaussParams& p, std::size_t side, double lo, double hi) {
    if (side < 2) throw Error("gauss_grid: side must be >= 2");
    if (!(hi > lo)) throw Error("gauss_grid: empty domain");
    Dataset out(2, 1);
    const double step = (hi - lo) / static_cast<double>(side - 1);
    for (std::size_t i = 0; i < side; ++i) {
        const double x1 = i + 1 == side ? hi : lo + static_cast<double>(i) * step;
        for (std::size_t j = 0; j < side; ++j) {
            const double x2 = j + 1 == side ? hi : lo + static_cast<double>(j) * step;
            out.add({{x1, x2}, {gauss_pdf({x1, x2}, p)}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<bool> cats_mask() {
    std::vector<bool> mask(CatsSeries::length, false);
    for (auto start : CatsSeries::block_starts) {
        for (std::size_t i = 0; i < CatsSeries::block_len; ++i) mask[start - 1 + i] = true;
    }
    return mask;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

Vec read_numbers(const std::string& path, std::size_t limit) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    Vec out;
    std::string line;
    std::size_t lineno = 0;
    while (out.size() < limit && std::getline(is, line)) {
        ++lineno;
        const auto field = trim(line);
        if (field.empty()) continue;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw Error(path + ":" + std::to_string(lineno) + ": not a number: '" + std::string(field) + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::size_t CatsSeries::missing_count() const {
    return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

Vec CatsSeries::range(std::size_t first, std::size_t last) const {
    if (first < 1 || last > values.size() || first > last) throw Error("CatsSeries::range: out of bounds");
    return Vec(values.begin() + static_cast<std::ptrdiff_t>(first - 1),
               values.begin() + static_cast<std::ptrdiff_t>(last));
}

CatsSeries cats_load(const std::string& path) {
    Vec values = read_numbers(path, CatsSeries::length);
    if (values.size() < CatsSeries::length) {
        throw Error(path + ": expected " + std::to_string(CatsSeries::length) + " values, found " +
                    std::to_string(values.size()));
    }
    return CatsSeries{std::move(values), cats_mask()};
}

CatsSeries cats_synthesize(std::uint64_t seed) {
    // Regime switch after point 2000: the relearning segments (3001-3980,
    // 4001-4980) come from a different system than the initial ones.
    constexpr std::size_t split = 2000;
    const Vec first = mg_generate(mg_p1(), split);
    const Vec second = mg_generate(mg_p2(), CatsSeries::length - split);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    Vec values;
    values.reserve(CatsSeries::length);
    for (std::size_t i = 0; i < CatsSeries::length; ++i) {
        const double mg = i < split ? first[i] : second[i - split];
        const double trend = 0.5 * static_cast<double>(i) / static_cast<double>(CatsSeries::length);
        values.push_back(mg + trend + noise(rng));
    }
    return CatsSeries{std::move(values), cats_mask()};
}

// ---------------------------------------------------------------------------

RegimeStream regime_stream(const std::vector<Vec>& segments) {
    if (segments.empty()) throw Error("regime_stream: empty schedule");
    RegimeStream out;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (segments[s].empty()) throw Error("regime_stream: segment " + std::to_string(s) + " is empty");
        if (s > 0) out.change_points.push_back(out.series.size());
        out.series.insert(out.series.end(), segments[s].begin(), segments[s].end());
    }
    return out;
}

RegimeStream regime_stream(const RegimeSchedule& schedule) {
    std::vector<Vec> parts;
    parts.reserve(schedule.segments.size());
    for (const auto& seg : schedule.segments) {
        if (seg.count == 0) throw Error("regime_stream: segment counts must be positive");
        parts.push_back(mg_generate(seg.params, seg.count));
    }
    return regime_stream(parts);
}

void write_series(const std::string& path, std::span<const double> series) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os.precision(std::numeric_limits<double>::max_digits10);
    for (double v : series) os << v << '\n';
    if (!os) throw Error("write failed for '" + path + "'");
}

Vec read_series(const std::string& path) { return read_numbers(path, std::numeric_limits<std::size_t>::max()); }

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    for (std::size_t j = 0; j < data.input_dim(); ++j) os << 'x' << (j + 1) << ',';
    for (std::size_t m = 0; m < data.target_dim(); ++m) {
        os << (data.target_dim() == 1 ? std::string("target") : "target" + std::to_string(m + 1))
           << (m + 1 < data.target_dim() ? "," : "");
    }
    os << '\n';
    os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : data) {
        for (double v : s.input) os << v << ',';
        for (std::size_t m = 0; m < s.target.size(); ++m) os << s.target[m] << (m + 1 < s.target.size() ? "," : "");
        os << '\n';
    }
    if (!os) throw Error("write failed for '" + path + "'");
}

}  // namespace hybridnet
