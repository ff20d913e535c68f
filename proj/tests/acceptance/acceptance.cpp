// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Criteria 7-10 run the full experiments, so expect a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "hybridnet/experiment.hpp"

using namespace hybridnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        o.pass = false;
        o.detail += " (over time budget)";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s [%.2fs] %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int hamming(const Bits& a, const Bits& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

Bits bits_of(std::uint64_t v, std::size_t n) {
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1u;
    return b;
}

std::string trace_bytes(const ErrorTrace& t) {
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

double mean_of(const std::vector<RunSummary>& runs, double RunSummary::*field) {
    double s = 0.0;
    for (const auto& r : runs) s += r.*field;
    return s / static_cast<double>(runs.size());
}

// ---------------------------------------------------------------------------

Outcome xor_exact() {
    const std::vector<BinaryPattern> pats{{{0, 0}, {0}}, {{0, 1}, {1}}, {{1, 0}, {1}}, {{1, 1}, {0}}};
    const auto net = Cc4Network::train(pats, 0);
    for (const auto& p : pats) {
        if (net.predict(p.input) != p.output) return {false, "misclassified an XOR pattern"};
    }
    for (std::size_t i = 0; i < pats.size(); ++i) {
        const auto& u = net.units()[i];
        int ones = 0;
        for (std::size_t j = 0; j < 2; ++j) {
            ones += pats[i].input[j];
            if (u.weights[j] != (pats[i].input[j] ? 1 : -1)) return {false, "data weight not +-1 per bit"};
        }
        if (u.bias_weight != 0 - ones + 1) return {false, "bias weight != r - s + 1"};
    }
    return {true, "4/4 correct, weights +-1, biases {1,0,0,-1}"};
}

Outcome hamming_ball() {
    // One network holding every n-bit exemplar as a hidden unit covers all
    // exemplar/input pairs with a single pass over the inputs.
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        std::vector<BinaryPattern> all;
        for (std::uint64_t e = 0; e < (std::uint64_t{1} << n); ++e) all.push_back({bits_of(e, n), {1}});
        std::vector<int> radii;
        if (n <= 8) {
            for (int r = 0; r <= static_cast<int>(n); ++r) radii.push_back(r);
        } else {
            radii = {0, 1, 3, static_cast<int>(n)};
        }
        for (int r : radii) {
            const auto net = Cc4Network::train(all, r);
            for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
                const Bits in = bits_of(x, n);
                const auto sums = net.pre_step_sums(in);
                const auto fire = net.hidden_activations(in);
                for (std::size_t i = 0; i < all.size(); ++i) {
                    const int d = hamming(all[i].input, in);
                    if (sums[i] != r + 1 - d || (fire[i] == 1) != (d <= r)) {
                        return {false, fmt("mismatch at n=%zu r=%d", n, r)};
                    }
                }
                cases += all.size();
            }
        }
    }
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> bit(0, 1), rad(0, 64);
    for (int t = 0; t < 10000; ++t) {
        Bits ex(64);
        for (auto& b : ex) b = static_cast<std::uint8_t>(bit(rng));
        // Half uniform inputs, half near neighbours of the exemplar.
        Bits in(64);
        if (t % 2) {
            for (auto& b : in) b = static_cast<std::uint8_t>(bit(rng));
        } else {
            in = ex;
            const int flips = rad(rng) % 10;
            for (int f = 0; f < flips; ++f) in[static_cast<std::size_t>(rng() % 64)] ^= 1u;
        }
        const int r = t % 2 ? rad(rng) : rad(rng) % 10;
        const auto net = Cc4Network::train(std::vector<BinaryPattern>{{ex, {1}}}, r);
        const int d = hamming(ex, in);
        if (net.pre_step_sums(in)[0] != r + 1 - d || (net.hidden_activations(in)[0] == 1) != (d <= r)) {
            return {false, "random n=64 case failed"};
        }
        ++cases;
    }
    return {true, fmt("%zu exemplar/input pairs", cases)};
}

Outcome fc_oracle() {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int set = 0; set < 20; ++set) {
        Dataset d(3, 1);
        for (int i = 0; i < 50; ++i) d.add({{u(rng), u(rng), u(rng)}, {u(rng)}});
        const auto net = FcNetwork::train(d, d.size());
        for (const auto& s : d) {
            if (net.predict_scalar(s.input) != s.target[0]) return {false, "recall not exact"};
        }
        for (int q = 0; q < 50; ++q) {
            const Vec x{1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng)};
            const Vec z = net.normalizer().apply(x);
            std::vector<double> dist(net.size());
            for (std::size_t i = 0; i < net.size(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < z.size(); ++j) {
                    acc += (z[j] - net.exemplars()[i][j]) * (z[j] - net.exemplars()[i][j]);
                }
                dist[i] = std::sqrt(acc);
            }
            const auto nn = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
            double expected;
            if (dist[nn] <= net.radii()[nn]) {
                expected = net.outputs()[nn][0];
            } else {
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < net.size(); ++i) {
                    const double s = net.widths()[i];
                    const double m = std::exp(-dist[i] * dist[i] / (2.0 * s * s));
                    num += m * net.outputs()[i][0];
                    den += m;
                }
                expected = num / den;
            }
            worst = std::max(worst, std::abs(net.predict_scalar(x) - expected));
        }
    }
    return {worst <= 1e-12, fmt("exact recall; max |pred - brute force| = %.3g", worst)};
}

Outcome mlp_gradient() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        auto net = Mlp::init(std::vector<std::size_t>{3, 5, 2}, 500 + static_cast<std::uint64_t>(t));
        const Sample s{{u(rng), u(rng), u(rng)}, {u(rng), u(rng)}};
        const Vec g = net.gradient(s);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = net.parameter(i), h = 1e-6;
            net.set_parameter(i, w + h);
            const double up = net.loss(s);
            net.set_parameter(i, w - h);
            const double down = net.loss(s);
            net.set_parameter(i, w);
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8}));
        }
    }
    return {worst < 1e-4, fmt("max relative error %.3g over 100 nets", worst)};
}

Outcome mg_integrator() {
    MgParams p = mg_p1();
    p.a = 0.0;
    p.discard = 0;
    const Vec x = mg_generate(p, 51);
    double worst = 0.0;
    for (std::size_t t = 0; t <= 50; ++t) worst = std::max(worst, std::abs(x[t] - 1.2 * std::exp(-0.1 * double(t))));
    MgParams fine = mg_p1();
    fine.dt = 0.05;
    const Vec a = mg_generate(mg_p1(), 1000);
    const Vec b = mg_generate(fine, 1000);
    double drift = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) drift = std::max(drift, std::abs(a[i] - b[i]));
    return {worst < 1e-3 && drift < 1e-4, fmt("decay error %.3g, dt-halving change %.3g", worst, drift)};
}

Outcome gauss_value() {
    const double peak = gauss_pdf({0.0, 0.0}, gauss_p1());
    const double want = 1.0 / (0.4 * M_PI);
    double mass = 0.0;
    const std::size_t n = 1201;
    const double h = 12.0 / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) mass += gauss_pdf({-6.0 + h * i, -6.0 + h * j}, gauss_p1()) * h * h;
    }
    const bool ok = std::abs(peak - want) < 1e-9 && std::abs(peak - 0.7957747) < 1e-7 && std::abs(mass - 1.0) < 1e-3;
    return {ok, fmt("peak %.9f, mass %.6f", peak, mass)};
}

// Criterion 7 runs seeds 1..10 and judges dominance on the trial means.
std::vector<RunSummary> g_mg_runs;
Outcome regime_response() {
    auto cfg = default_config(ExperimentKind::mg);
    validate_config(cfg);
    for (std::uint64_t s = 1; s <= 10; ++s) g_mg_runs.push_back(run_trial(cfg, s));
    bool a = true, b = true;
    std::size_t min_deep = SIZE_MAX, max_surface = 0, wins = 0;
    for (const auto& r : g_mg_runs) {
        if (r.settle.empty()) return {false, "no settle report"};
        const auto& st = r.settle.front();
        a = a && st.settle_surface && *st.settle_surface <= 1;
        b = b && st.settle_deep && *st.settle_deep >= 50;
        if (st.settle_surface) max_surface = std::max(max_surface, *st.settle_surface);
        if (st.settle_deep) min_deep = std::min(min_deep, *st.settle_deep);
        wins += r.cum_hybrid <= r.cum_surface && r.cum_hybrid <= r.cum_deep;
    }
    const double h = mean_of(g_mg_runs, &RunSummary::cum_hybrid);
    const double s = mean_of(g_mg_runs, &RunSummary::cum_surface);
    const double d = mean_of(g_mg_runs, &RunSummary::cum_deep);
    const bool c = h <= s && h <= d;
    return {a && b && c,
            fmt("(a) surface settles in <= %zu cycles %s; (b) deep needs >= %zu cycles %s; (c) mean cum RMS hybrid "
                "%.5f, surface-only %.5f, deep-only %.5f %s (per seed %zu/10)",
                max_surface, a ? "ok" : "FAIL", min_deep, b ? "ok" : "FAIL", h, s, d, c ? "ok" : "FAIL", wins)};
}

RunSummary g_smooth_run;
Outcome smooth_function() {
    auto cfg = default_config(ExperimentKind::smooth);
    validate_config(cfg);
    g_smooth_run = run_trial(cfg, cfg.seed);
    const auto& s = *g_smooth_run.smooth;
    const bool first = s.fc_test_rms < s.bp_test_rms_cycle1;
    const bool last = s.bp_test_rms_converged < s.fc_test_rms;
    const bool stopped_early = s.relearn_stop_cycle < cfg.deep.train.max_cycles;
    return {first && last && stopped_early,
            fmt("FC %.5f vs BP after 1 cycle %.5f; BP converged %.5f (stopped at cycle %zu)", s.fc_test_rms,
                s.bp_test_rms_cycle1, s.bp_test_rms_converged, s.relearn_stop_cycle)};
}

Outcome e1_protocol() {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        Vec p(20), q(20);
        for (auto& v : p) v = g(rng);
        for (auto& v : q) v = g(rng);
        long double acc = 0.0L;
        for (std::size_t i = 0; i < 20; ++i) acc += static_cast<long double>(p[i] - q[i]) * (p[i] - q[i]);
        worst = std::max(worst, std::abs(e1_error(p, q) - static_cast<double>(acc / 100.0L)));
    }
    std::vector<Vec> seen;
    const OneStepPredictor f = [&](std::span<const double> w) {
        seen.emplace_back(w.begin(), w.end());
        return w[0] + 10.0 * w[2];
    };
    const Vec out = iterated_predict(f, Vec{1, 2, 3}, 3, 3);
    const bool unrolled = seen == std::vector<Vec>{{1, 2, 3}, {2, 3, 31}, {3, 31, 312}} && out == Vec{31, 312, 3123};
    return {worst <= 1e-12 && unrolled, fmt("E1 max deviation %.3g; 3-step trace %s", worst, unrolled ? "ok" : "wrong")};
}

std::vector<RunSummary> g_cats_runs;
Outcome cats_protocol() {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome proto = e1_protocol();
    const double proto_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!proto.pass || proto_s >= 1.0) return {false, proto.detail + fmt(" [%.3fs]", proto_s)};

    auto cfg = default_config(ExperimentKind::cats);
    cfg.cats.synthetic = true;
    validate_config(cfg);
    for (std::uint64_t s = 1; s <= 10; ++s) g_cats_runs.push_back(run_trial(cfg, s));
    std::size_t wins = 0;
    for (const auto& r : g_cats_runs) {
        wins += r.cum_hybrid <= r.cum_surface && r.cum_hybrid <= r.cum_deep;
        if (r.e1.size() != 5) return {false, "missing E1 blocks"};
    }
    const double h = mean_of(g_cats_runs, &RunSummary::cum_hybrid);
    const double s = mean_of(g_cats_runs, &RunSummary::cum_surface);
    const double d = mean_of(g_cats_runs, &RunSummary::cum_deep);
    return {h <= s && h <= d,
            proto.detail + fmt(" [%.3fs]; ", proto_s) + fmt("synthetic run: mean cum RMS hybrid %.5f, surface-only %.5f, deep-only %.5f (per seed %zu/10)", h, s,
                d, wins)};
}

Outcome determinism() {
    std::string which;
    auto mg = default_config(ExperimentKind::mg);
    if (trace_bytes(run_trial(mg, 1).trace) != trace_bytes(g_mg_runs.at(0).trace)) which += " mg";
    auto cats = default_config(ExperimentKind::cats);
    cats.cats.synthetic = true;
    if (trace_bytes(run_trial(cats, 1).trace) != trace_bytes(g_cats_runs.at(0).trace)) which += " cats";
    auto smooth = default_config(ExperimentKind::smooth);
    if (trace_bytes(run_trial(smooth, smooth.seed).trace) != trace_bytes(g_smooth_run.trace)) which += " smooth";
    // Also through the file writer.
    const auto dir = fs::temp_directory_path() / "hybridnet_acceptance";
    fs::create_directories(dir);
    emit_plotdata(g_mg_runs.at(0).trace, (dir / "a.csv").string());
    emit_plotdata(run_trial(mg, 1).trace, (dir / "b.csv").string());
    const auto read = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    if (read(dir / "a.csv") != read(dir / "b.csv")) which += " mg-file";
    fs::remove_all(dir);
    return {which.empty(), which.empty() ? "mg, cats, smooth traces byte-identical on rerun" : "differs:" + which};
}

}  // namespace

int main() {
    report(1, "CC4 XOR exactness", 0.001, xor_exact);
    report(2, "Hamming-ball theorem", 10, hamming_ball);
    report(3, "FC recall and kernel oracle", 5, fc_oracle);
    report(4, "MLP gradient check", 10, mlp_gradient);
    report(5, "Mackey-Glass integrator", 5, mg_integrator);
    report(6, "Gaussian pdf value", 5, gauss_value);
    report(7, "regime response on Mackey-Glass", 120, regime_response);
    report(8, "smooth-function relearning", 120, smooth_function);
    report(9, "E1 protocol and synthetic CATS run", 121, cats_protocol);
    report(10, "determinism", 120, determinism);
    std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
