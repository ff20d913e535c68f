#include "hybridnet/fc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

double membership(double distance, double sigma) {
    if (!(sigma > 0.0)) throw Error("membership: sigma must be positive");
    if (std::isinf(sigma)) return 1.0;
    return std::exp(-(distance * distance) / (2.0 * sigma * sigma));
}

std::size_t default_k(std::size_t exemplars, double fraction) {
    if (exemplars == 0) return 1;
    const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(exemplars)));
    return std::clamp<std::size_t>(k, 1, exemplars);
}

FcNetwork::FcNetwork(std::vector<Vec> exemplars, std::vector<Vec> outputs, Vec radii, Vec widths,
                     std::size_t k, Normalizer normalizer)
    : exemplars_(std::move(exemplars)),
      outputs_(std::move(outputs)),
      radii_(std::move(radii)),
      widths_(std::move(widths)),
      k_(k),
      normalizer_(std::move(normalizer)) {
    const std::size_t s = exemplars_.size();
    if (s == 0) throw Error("FcNetwork: no exemplars");
    if (outputs_.size() != s || radii_.size() != s || widths_.size() != s) {
        throw Error("FcNetwork: exemplar, output, radius and width counts differ");
    }
    if (k_ < 1 || k_ > s) throw Error("FcNetwork: k must lie in [1, S]");
    for (const auto& row : exemplars_) {
        if (row.size() != normalizer_.dims()) throw Error("FcNetwork: exemplar width != normalizer dims");
    }
    for (const auto& u : outputs_) {
        if (u.size() != outputs_.front().size()) throw Error("FcNetwork: ragged outputs");
    }
    for (std::size_t i = 0; i < s; ++i) {
        if (!(radii_[i] > 0.0) || !(widths_[i] > 0.0)) throw Error("FcNetwork: radii and widths must be > 0");
    }
}

FcNetwork FcNetwork::train(const Dataset& data, std::size_t k) {
    if (data.empty()) throw Error("train_fc: empty dataset");
    const std::size_t s = data.size();
    if (k < 1 || k > s) throw Error("train_fc: k must lie in [1, S]");

    // Pass 1: store the normalized exemplars and their outputs.
    auto norm = Normalizer::fit(data.inputs());
    std::vector<Vec> w;
    std::vector<Vec> u;
    w.reserve(s);
    u.reserve(s);
    for (const auto& sample : data) {
        w.push_back(norm.apply(sample.input));
        u.push_back(sample.target);
    }

    // Pass 2: radius = half the nearest-neighbour distance.
    Vec rho(s, kInf);
    double smallest_positive = kInf;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double half = 0.5 * euclidean(w[i], w[j]);
            rho[i] = std::min(rho[i], half);
            rho[j] = std::min(rho[j], half);
            if (half > 0.0) smallest_positive = std::min(smallest_positive, half);
        }
    }
    std::size_t repaired = 0;
    for (auto& r : rho) {
        if (r == 0.0) {
            r = smallest_positive;  // +inf when every exemplar coincides
            ++repaired;
        }
    }
    Vec sigma = rho;
    FcNetwork net(std::move(w), std::move(u), std::move(rho), std::move(sigma), k, std::move(norm));
    net.repaired_radii_ = repaired;
    return net;
}

Vec FcNetwork::distances(std::span<const double> x) const {
    const Vec xn = normalizer_.apply(x);
    Vec d(exemplars_.size());
    for (std::size_t i = 0; i < exemplars_.size(); ++i) d[i] = euclidean(xn, exemplars_[i]);
    return d;
}

Vec FcNetwork::predict(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw Error("FcNetwork::predict: input has " + std::to_string(x.size()) + " dims, expected " +
                    std::to_string(input_dim()));
    }
    const Vec d = distances(x);

    // Order by (distance, index) so ties go to the lowest index.
    const auto closer = [&d](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); };
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_), idx.end(), closer);

    const std::size_t nearest = idx.front();
    if (d[nearest] <= radii_[nearest]) return outputs_[nearest];

    // Kernel regression over the k nearest exemplars. Log-weights are shifted
    // by their maximum so distant inputs do not underflow every membership.
    Vec logw(k_);
    for (std::size_t n = 0; n < k_; ++n) {
        const std::size_t i = idx[n];
        logw[n] = std::isinf(widths_[i]) ? 0.0 : -(d[i] * d[i]) / (2.0 * widths_[i] * widths_[i]);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    Vec out(outputs_.front().size(), 0.0);
    double total = 0.0;
    for (std::size_t n = 0; n < k_; ++n) {
        const double mu = std::exp(logw[n] - top);
        total += mu;
        const auto& u = outputs_[idx[n]];
        for (std::size_t m = 0; m < out.size(); ++m) out[m] += mu * u[m];
    }
    for (auto& v : out) v /= total;
    return out;
}

}  // namespace hybridnet
