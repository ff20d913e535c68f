#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hybridnet/core.hpp"

namespace hybridnet {

/// Mackey-Glass delay equation dx/dt = -b x(t) + a x(t-d) / (1 + x(t-d)^c).
struct MgParams {
    double a = 0.8;
    double b = 0.1;
    double c = 10.0;
    double d = 30.0;
    double dt = 0.1;
    double sample_every = 1.0;
    double x0 = 1.2;  // constant history on [-d, 0]
    std::size_t discard = 3500;

    bool operator==(const MgParams&) const = default;
};

/// Parameter set used for the first regime (d = 30).
MgParams mg_p1();
/// Parameter set used for the second regime (d = 17).
MgParams mg_p2();

/// RK4 integration at step dt. The delayed value at off-grid times is a cubic
/// Hermite interpolant of the stored grid values and derivatives. Emits one
/// value every `sample_every` time units, starting at t = 0, and drops the
/// first `discard` of them. Throws on invalid parameters or a non-finite state.
Vec mg_generate(const MgParams& p, std::size_t n);

struct GaussParams {
    std::array<double, 2> mu{0.0, 0.0};
    std::array<double, 4> sigma{1.0, 0.0, 0.0, 1.0};  // row-major 2x2

    [[nodiscard]] double det() const noexcept { return sigma[0] * sigma[3] - sigma[1] * sigma[2]; }
    bool operator==(const GaussParams&) const = default;
};

GaussParams gauss_p1();
GaussParams gauss_p2();

/// Bivariate normal density. Throws if sigma is not symmetric positive-definite.
double gauss_pdf(std::array<double, 2> x, const GaussParams& p);

/// side x side evenly spaced grid over [lo, hi]^2 (corners included), with
/// the density as target. Rows iterate x2 fastest.
Dataset gauss_grid(const GaussParams& p, std::size_t side, double lo = -2.0, double hi = 2.0);

/// 5000-point CATS-style series with five 20-point blocks marked missing.
struct CatsSeries {
    static constexpr std::size_t length = 5000;
    static constexpr std::size_t block_len = 20;
    /// 1-based first index of each missing block.
    static constexpr std::array<std::size_t, 5> block_starts{981, 1981, 2981, 3981, 4981};

    Vec values;
    std::vector<bool> missing;

    [[nodiscard]] std::size_t missing_count() const;
    /// 1-based inclusive range [first, last] as a 0-based copy.
    [[nodiscard]] Vec range(std::size_t first, std::size_t last) const;
};

/// Reads one value per line; the first 5000 values are kept. Throws with the
/// offending line number on a non-numeric line or a short file.
CatsSeries cats_load(const std::string& path);

/// Surrogate series for testing without the competition file: a rescaled
/// Mackey-Glass segment plus a slow trend plus seeded Gaussian noise.
CatsSeries cats_synthesize(std::uint64_t seed);

struct RegimeSegment {
    MgParams params;
    std::size_t count = 0;
};

struct RegimeSchedule {
    std::vector<RegimeSegment> segments;
};

struct RegimeStream {
    Vec series;
    std::vector<std::size_t> change_points;  // index of the first sample of each new regime
};

RegimeStream regime_stream(const RegimeSchedule& schedule);
/// Concatenates already generated segments.
RegimeStream regime_stream(const std::vector<Vec>& segments);

void write_series(const std::string& path, std::span<const double> series);
Vec read_series(const std::string& path);

/// CSV with header x1,...,xN,target (one target column per target dim).
void write_dataset_csv(const std::string& path, const Dataset& data);

}  // namespace hybridnet
