#include "hybridnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hybridnet {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ExperimentKind k) noexcept {
    switch (k) {
        case ExperimentKind::mg: return "mg";
        case ExperimentKind::cats: return "cats";
        case ExperimentKind::smooth: return "smooth";
        case ExperimentKind::custom: return "custom";
    }
    return "mg";
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "mg") return ExperimentKind::mg;
    if (s == "cats") return ExperimentKind::cats;
    if (s == "smooth") return ExperimentKind::smooth;
    if (s == "custom") return ExperimentKind::custom;
    throw ConfigError("config: unknown experiment '" + s + "' (mg, cats, smooth or custom)");
}

std::string encoding_name(Encoding e) { return e == Encoding::thermometer ? "thermometer" : "positional-binary"; }

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.out = "out/" + std::string(to_string(kind));
    switch (kind) {
        case ExperimentKind::mg:
        case ExperimentKind::custom:
            c.window = 6;
            c.deep.hidden = {20};
            c.deep.train.learning_rate = 0.03;
            c.deep.train.patience = 200;
            c.deep.train.max_cycles = 20000;
            c.cognitive.retrain_window = 10;
            c.cognitive.deep_window = 1000;
            break;
        case ExperimentKind::cats:
            c.window = 30;
            c.deep.hidden = {10};
            c.deep.train.learning_rate = 0.01;
            c.deep.train.patience = 200;
            c.deep.train.max_cycles = 20000;
            c.cognitive.retrain_window = 30;
            c.cognitive.deep_window = 1000;
            break;
        case ExperimentKind::smooth:
            c.window = 2;
            c.deep.hidden = {10, 10};
            c.deep.train.learning_rate = 0.03;
            c.deep.train.patience = 500;
            c.deep.train.max_cycles = 50000;
            c.cognitive.initial_source = Source::surface;
            break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// JSON config reading

namespace {

/// An object whose fields are consumed one by one; leftovers are reported.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("config: '" + label() + "' must be an object");
    }
    Fields(const Fields&) = delete;
    Fields& operator=(const Fields&) = delete;
    ~Fields() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : j_.items()) {
            if (!used_.count(key)) throw ConfigError("config: unknown field '" + name(key) + "'");
        }
    }

    const json* find(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    [[nodiscard]] std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void real(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) bad(key, "a number");
            out = v->get<double>();
        }
    }
    template <class Int>
    void count(const std::string& key, Int& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) bad(key, "a non-negative integer");
            out = static_cast<Int>(v->get<std::uint64_t>());
        }
    }
    void integer(const std::string& key, int& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) bad(key, "an integer");
            out = v->get<int>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) bad(key, "true or false");
            out = v->get<bool>();
        }
    }
    void text(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) bad(key, "a string");
            out = v->get<std::string>();
        }
    }
    void counts(const std::string& key, std::vector<std::size_t>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) bad(key, "an array of positive integers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number_unsigned()) bad(key, "an array of positive integers");
                out.push_back(e.get<std::size_t>());
            }
        }
    }
    template <std::size_t N>
    void reals(const std::string& key, std::array<double, N>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array() || v->size() != N) bad(key, "an array of " + std::to_string(N) + " numbers");
            for (std::size_t i = 0; i < N; ++i) {
                if (!(*v)[i].is_number()) bad(key, "an array of " + std::to_string(N) + " numbers");
                out[i] = (*v)[i].get<double>();
            }
        }
    }

    [[noreturn]] void bad(const std::string& key, const std::string& expected) const {
        throw ConfigError("config: field '" + name(key) + "' must be " + expected);
    }

private:
    [[nodiscard]] std::string label() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void read_mg(const json& j, const std::string& path, MgParams& p) {
    Fields f(j, path);
    f.real("a", p.a);
    f.real("b", p.b);
    f.real("c", p.c);
    f.real("d", p.d);
    f.real("dt", p.dt);
    f.real("sample_every", p.sample_every);
    f.real("x0", p.x0);
    f.count("discard", p.discard);
}

void read_gauss(const json& j, const std::string& path, GaussParams& p) {
    Fields f(j, path);
    f.reals("mu", p.mu);
    f.reals("sigma", p.sigma);
}

std::string resolve(const std::string& file, const std::string& base_dir) {
    if (file.empty() || base_dir.empty() || fs::path(file).is_absolute()) return file;
    return (fs::path(base_dir) / file).lexically_normal().string();
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
        throw ConfigError("config: field 'experiment' (mg, cats, smooth or custom) is required");
    }
    ExperimentConfig c = default_config(kind_from_string(doc["experiment"].get<std::string>()));

    Fields root(doc, "");
    root.find("experiment");
    root.count("seed", c.seed);
    root.count("trials", c.trials);
    root.text("out", c.out);
    root.count("window", c.window);

    if (const auto* s = root.find("surface")) {
        Fields f(*s, "surface");
        f.text("kind", c.surface.kind);
        f.real("k_fraction", c.surface.k_fraction);
        f.count("k", c.surface.k);
        f.integer("levels", c.surface.levels);
        f.integer("radius", c.surface.radius);
        std::string enc = encoding_name(c.surface.encoding);
        f.text("encoding", enc);
        if (enc == "thermometer") {
            c.surface.encoding = Encoding::thermometer;
        } else if (enc == "positional-binary") {
            c.surface.encoding = Encoding::positional_binary;
        } else {
            f.bad("encoding", "\"thermometer\" or \"positional-binary\"");
        }
    }
    if (const auto* d = root.find("deep")) {
        Fields f(*d, "deep");
        f.counts("hidden", c.deep.hidden);
        f.real("learning_rate", c.deep.train.learning_rate);
        f.real("momentum", c.deep.train.momentum);
        f.count("max_cycles", c.deep.train.max_cycles);
        f.count("patience", c.deep.train.patience);
        f.real("val_fraction", c.deep.val_fraction);
    }
    if (const auto* g = root.find("cognitive")) {
        Fields f(*g, "cognitive");
        f.count("eval_window", c.cognitive.eval_window);
        f.real("change_threshold", c.cognitive.change_threshold);
        f.count("persistence", c.cognitive.persistence);
        f.count("retrain_window", c.cognitive.retrain_window);
        f.count("deep_window", c.cognitive.deep_window);
        f.boolean("flush_on_change", c.cognitive.flush_on_change);
        std::string init(to_string(c.cognitive.initial_source));
        f.text("initial_source", init);
        try {
            c.cognitive.initial_source = source_from_string(init);
        } catch (const Error&) {
            f.bad("initial_source", "\"surface\" or \"deep\"");
        }
    }
    if (const auto* m = root.find("metrics")) {
        Fields f(*m, "metrics");
        f.real("settle_tolerance", c.metrics.settle_tolerance);
        f.count("settle_window", c.metrics.settle_window);
        f.count("steady_window", c.metrics.steady_window);
    }
    if (const auto* m = root.find("mg")) {
        Fields f(*m, "mg");
        if (const auto* p = f.find("p1")) read_mg(*p, "mg.p1", c.mg.p1);
        if (const auto* p = f.find("p2")) read_mg(*p, "mg.p2", c.mg.p2);
        f.count("train", c.mg.train);
        f.count("test", c.mg.test);
    }
    if (const auto* m = root.find("cats")) {
        Fields f(*m, "cats");
        f.text("file", c.cats.file);
        f.boolean("synthetic", c.cats.synthetic);
        c.cats.file = resolve(c.cats.file, base_dir);
    }
    if (const auto* m = root.find("smooth")) {
        Fields f(*m, "smooth");
        if (const auto* p = f.find("p1")) read_gauss(*p, "smooth.p1", c.smooth.p1);
        if (const auto* p = f.find("p2")) read_gauss(*p, "smooth.p2", c.smooth.p2);
        f.count("train_side", c.smooth.train_side);
        f.count("test_side", c.smooth.test_side);
        f.count("val_points", c.smooth.val_points);
        f.real("lo", c.smooth.lo);
        f.real("hi", c.smooth.hi);
    }
    if (const auto* m = root.find("custom")) {
        Fields f(*m, "custom");
        f.count("pretrain", c.custom.pretrain);
        if (const auto* segs = f.find("segments")) {
            if (!segs->is_array()) f.bad("segments", "an array");
            for (std::size_t i = 0; i < segs->size(); ++i) {
                const std::string path = "custom.segments[" + std::to_string(i) + "]";
                Fields s((*segs)[i], path);
                SegmentSpec seg;
                s.text("file", seg.file);
                seg.file = resolve(seg.file, base_dir);
                if (const auto* p = s.find("mg")) {
                    MgParams mp;
                    read_mg(*p, path + ".mg", mp);
                    seg.mg = mp;
                }
                s.count("count", seg.count);
                if (seg.file.empty() == !seg.mg) {
                    throw ConfigError("config: '" + path + "' needs exactly one of 'file' or 'mg'");
                }
                c.custom.segments.push_back(std::move(seg));
            }
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string());
}

void validate_config(const ExperimentConfig& c) {
    const auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (c.trials < 1) fail("trials must be >= 1");
    if (c.window < 1) fail("window must be >= 1");
    if (c.out.empty()) fail("out must not be empty");
    if (c.surface.kind != "fc" && c.surface.kind != "cc4") fail("surface.kind must be \"fc\" or \"cc4\"");
    if (!(c.surface.k_fraction > 0.0 && c.surface.k_fraction <= 1.0)) fail("surface.k_fraction must be in (0, 1]");
    if (c.surface.levels < 2) fail("surface.levels must be >= 2");
    if (c.surface.radius < 0) fail("surface.radius must be >= 0");
    if (c.deep.hidden.empty()) fail("deep.hidden needs at least one layer");
    if (std::find(c.deep.hidden.begin(), c.deep.hidden.end(), 0u) != c.deep.hidden.end()) {
        fail("deep.hidden sizes must be positive");
    }
    if (!(c.deep.train.learning_rate > 0.0)) fail("deep.learning_rate must be > 0");
    if (!(c.deep.train.momentum >= 0.0 && c.deep.train.momentum < 1.0)) fail("deep.momentum must be in [0, 1)");
    if (c.deep.train.max_cycles < 1 || c.deep.train.patience < 1) fail("deep.max_cycles and deep.patience must be >= 1");
    if (!(c.deep.val_fraction > 0.0 && c.deep.val_fraction < 1.0)) fail("deep.val_fraction must be in (0, 1)");
    if (c.cognitive.eval_window < 1) fail("cognitive.eval_window must be >= 1");
    if (!(c.cognitive.change_threshold > 1.0)) fail("cognitive.change_threshold must be > 1");
    if (c.cognitive.persistence < 1) fail("cognitive.persistence must be >= 1");
    if (c.cognitive.deep_window < 1) fail("cognitive.deep_window must be >= 1");
    if (!(c.metrics.settle_tolerance >= 0.0)) fail("metrics.settle_tolerance must be >= 0");
    if (c.metrics.steady_window < 1 || c.metrics.settle_window < 1) {
        fail("metrics.steady_window and metrics.settle_window must be >= 1");
    }
    const bool streamed = c.kind != ExperimentKind::smooth;
    if (streamed && c.cognitive.retrain_window < c.window) fail("cognitive.retrain_window must be >= window");

    const auto check_mg = [&](const MgParams& p, const std::string& where) {
        if (!(p.dt > 0.0) || !(p.d > 0.0) || !(p.sample_every > 0.0)) fail(where + ": dt, d and sample_every must be > 0");
    };
    switch (c.kind) {
        case ExperimentKind::mg:
            check_mg(c.mg.p1, "mg.p1");
            check_mg(c.mg.p2, "mg.p2");
            if (c.mg.train <= c.window + 1) fail("mg.train must exceed window + 1");
            if (c.mg.test < 1) fail("mg.test must be >= 1");
            break;
        case ExperimentKind::cats:
            if (c.window + 10 > 970) fail("window too large for the CATS segments");
            if (!c.cats.synthetic) {
                if (c.cats.file.empty()) fail("cats.file is required unless synthetic data is requested");
                if (!fs::exists(c.cats.file)) fail("CATS file '" + c.cats.file + "' does not exist");
            }
            break;
        case ExperimentKind::smooth: {
            const auto& s = c.smooth;
            if (s.train_side < 2 || s.test_side < 2) fail("smooth grid sides must be >= 2");
            if (s.val_points < 1) fail("smooth.val_points must be >= 1");
            if (!(s.hi > s.lo)) fail("smooth.hi must exceed smooth.lo");
            for (const auto* p : {&s.p1, &s.p2}) {
                if (p->sigma[1] != p->sigma[2] || !(p->sigma[0] > 0.0) || !(p->det() > 0.0)) {
                    fail("smooth covariance must be symmetric positive-definite");
                }
            }
            break;
        }
        case ExperimentKind::custom:
            if (c.custom.segments.empty()) fail("custom.segments must not be empty");
            for (std::size_t i = 0; i < c.custom.segments.size(); ++i) {
                const auto& seg = c.custom.segments[i];
                const std::string where = "custom.segments[" + std::to_string(i) + "]";
                if (seg.mg) {
                    check_mg(*seg.mg, where + ".mg");
                    if (seg.count < 1) fail(where + ".count must be >= 1");
                } else if (!fs::exists(seg.file)) {
                    fail("series file '" + seg.file + "' does not exist");
                }
            }
            break;
    }
}

// ---------------------------------------------------------------------------
// config echo

namespace {

ordered_json mg_json(const MgParams& p) {
    return {{"a", p.a},   {"b", p.b},   {"c", p.c},   {"d", p.d}, {"dt", p.dt}, {"sample_every", p.sample_every},
            {"x0", p.x0}, {"discard", p.discard}};
}

ordered_json gauss_json(const GaussParams& p) { return {{"mu", p.mu}, {"sigma", p.sigma}}; }

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["out"] = c.out;
    j["window"] = c.window;
    j["surface"] = {{"kind", c.surface.kind},
                    {"k_fraction", c.surface.k_fraction},
                    {"k", c.surface.k},
                    {"levels", c.surface.levels},
                    {"encoding", encoding_name(c.surface.encoding)},
                    {"radius", c.surface.radius}};
    j["deep"] = {{"hidden", c.deep.hidden},
                 {"learning_rate", c.deep.train.learning_rate},
                 {"momentum", c.deep.train.momentum},
                 {"max_cycles", c.deep.train.max_cycles},
                 {"patience", c.deep.train.patience},
                 {"val_fraction", c.deep.val_fraction}};
    j["cognitive"] = {{"eval_window", c.cognitive.eval_window},
                      {"change_threshold", c.cognitive.change_threshold},
                      {"persistence", c.cognitive.persistence},
                      {"retrain_window", c.cognitive.retrain_window},
                      {"deep_window", c.cognitive.deep_window},
                      {"flush_on_change", c.cognitive.flush_on_change},
                      {"initial_source", to_string(c.cognitive.initial_source)}};
    j["metrics"] = {{"settle_tolerance", c.metrics.settle_tolerance},
                    {"settle_window", c.metrics.settle_window},
                    {"steady_window", c.metrics.steady_window}};
    switch (c.kind) {
        case ExperimentKind::mg:
            j["mg"] = {{"p1", mg_json(c.mg.p1)}, {"p2", mg_json(c.mg.p2)}, {"train", c.mg.train}, {"test", c.mg.test}};
            break;
        case ExperimentKind::cats: j["cats"] = {{"file", c.cats.file}, {"synthetic", c.cats.synthetic}}; break;
        case ExperimentKind::smooth:
            j["smooth"] = {{"p1", gauss_json(c.smooth.p1)},        {"p2", gauss_json(c.smooth.p2)},
                           {"train_side", c.smooth.train_side},    {"test_side", c.smooth.test_side},
                           {"val_points", c.smooth.val_points},    {"lo", c.smooth.lo},
                           {"hi", c.smooth.hi}};
            break;
        case ExperimentKind::custom: {
            ordered_json segs = ordered_json::array();
            for (const auto& s : c.custom.segments) {
                if (s.mg) {
                    segs.push_back({{"mg", mg_json(*s.mg)}, {"count", s.count}});
                } else {
                    segs.push_back({{"file", s.file}});
                }
            }
            j["custom"] = {{"segments", segs}, {"pretrain", c.custom.pretrain}};
            break;
        }
    }
    return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg, int indent) { return config_json(cfg).dump(indent); }

// ---------------------------------------------------------------------------
// shared pieces

std::optional<std::size_t> settle_offset(std::span<const double> errors, std::size_t from, std::size_t window,
                                         double steady, double tolerance) {
    for (std::size_t t = from; t < errors.size(); ++t) {
        if (forward_window_rms(errors, t, window) <= (1.0 + tolerance) * steady) return t - from;
    }
    return std::nullopt;
}

void emit_plotdata(const ErrorTrace& trace, const std::string& path) {
    if (trace.empty()) throw Error("emit_plotdata: empty trace");
    trace.write_csv(path);
}

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

std::unique_ptr<SurfaceLearner> make_surface(const SurfaceSpec& s) {
    if (s.kind == "cc4") return std::make_unique<Cc4Surface>(s.levels, s.encoding, s.radius);
    return std::make_unique<FcSurface>(s.k_fraction, s.k);
}

std::optional<Model> surface_model(const SurfaceLearner& s) {
    if (!s.trained()) return std::nullopt;
    if (const auto* fc = dynamic_cast<const FcSurface*>(&s)) return Model(fc->network());
    if (const auto* cc = dynamic_cast<const Cc4Surface*>(&s)) return Model(cc->model());
    return std::nullopt;
}

Mlp fresh_mlp(const ExperimentConfig& cfg, std::size_t inputs, std::uint64_t seed) {
    std::vector<std::size_t> sizes{inputs};
    sizes.insert(sizes.end(), cfg.deep.hidden.begin(), cfg.deep.hidden.end());
    sizes.push_back(1);
    return Mlp::init(sizes, seed);
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrainConfig t = cfg.deep.train;
    t.seed = seed;
    return t;
}

double column_rms(const Vec& v) { return rms_error(v, Vec(v.size(), 0.0)); }

struct ModeRuns {
    StreamResult hybrid;
    StreamResult surface_only;
    StreamResult deep_only;
    std::unique_ptr<HybridSystem> system;  // the hybrid run's system, for final models
};

/// Runs the same stream in hybrid, surface-only and deep-only mode.
ModeRuns run_modes(const ExperimentConfig& cfg, const Mlp& pretrained, const TrainConfig& tc, const Dataset& prime,
                   std::span<const double> series, std::span<const StreamSpan> spans,
                   const std::function<void(HybridSystem&, std::size_t)>& hybrid_hook = {},
                   const std::function<void(HybridSystem&)>& before_hybrid = {}) {
    ModeRuns out;
    for (auto mode : {RunMode::hybrid, RunMode::surface_only, RunMode::deep_only}) {
        auto sys = std::make_unique<HybridSystem>(make_surface(cfg.surface), std::make_unique<MlpDeep>(pretrained, tc),
                                                  cfg.cognitive, cfg.window, mode);
        sys->prime(prime);
        if (mode == RunMode::hybrid) {
            if (before_hybrid) before_hybrid(*sys);
            out.hybrid = run_stream(*sys, series, spans, false, hybrid_hook);
            out.system = std::move(sys);
        } else if (mode == RunMode::surface_only) {
            out.surface_only = run_stream(*sys, series, spans);
        } else {
            out.deep_only = run_stream(*sys, series, spans);
        }
    }
    return out;
}

void fill_from_modes(RunSummary& r, ModeRuns& m, const Mlp& pretrained) {
    r.cum_surface = m.surface_only.summary.cum_rms_surface;
    r.cum_deep = m.deep_only.summary.cum_rms_deep;
    r.cum_hybrid = m.hybrid.summary.cum_rms_hybrid;
    r.hybrid_run_surface = m.hybrid.summary.cum_rms_surface;
    r.hybrid_run_deep = m.hybrid.summary.cum_rms_deep;
    r.change_cycles = m.hybrid.summary.change_cycles;
    r.switch_cycles = m.hybrid.summary.switch_cycles;
    r.trace = std::move(m.hybrid.trace);
    if (auto s = surface_model(m.system->surface())) r.models.emplace_back("surface", std::move(*s));
    r.models.emplace_back("deep", Model(dynamic_cast<MlpDeep&>(m.system->deep()).network()));
    r.models.emplace_back("deep_pretrained", Model(pretrained));
}

/// Settling after each true change, measured on the hybrid run's own agents.
void fill_settle(RunSummary& r, const ExperimentConfig& cfg) {
    const Vec es = r.trace.errors(Source::surface);
    const Vec ed = r.trace.errors(Source::deep);
    const auto& recs = r.trace.records();
    const auto pos_of = [&](std::size_t cycle) {
        return static_cast<std::size_t>(
            std::lower_bound(recs.begin(), recs.end(), cycle,
                             [](const TraceRecord& rec, std::size_t c) { return rec.cycle < c; }) -
            recs.begin());
    };
    for (std::size_t i = 0; i < r.true_change_cycles.size(); ++i) {
        const std::size_t from = pos_of(r.true_change_cycles[i]);
        const std::size_t to =
            i + 1 < r.true_change_cycles.size() ? pos_of(r.true_change_cycles[i + 1]) : recs.size();
        if (from >= to) continue;
        const std::size_t steady_from = to - std::min(cfg.metrics.steady_window, to - from);
        SettleReport s;
        s.change_cycle = r.true_change_cycles[i];
        s.steady_surface = forward_window_rms(es, steady_from, to - steady_from);
        s.steady_deep = forward_window_rms(ed, steady_from, to - steady_from);
        const auto E = cfg.metrics.settle_window;
        const auto tol = cfg.metrics.settle_tolerance;
        s.settle_surface = settle_offset(std::span(es).first(to), from, E, s.steady_surface, tol);
        s.settle_deep = settle_offset(std::span(ed).first(to), from, E, s.steady_deep, tol);
        r.settle.push_back(s);
    }
}

// ---------------------------------------------------------------------------
// regime streams (mg, custom)

RunSummary run_regimes(const ExperimentConfig& cfg, std::uint64_t seed, Vec series,
                       std::vector<std::size_t> change_points, std::size_t pretrain) {
    const std::size_t W = cfg.window;
    if (pretrain > series.size() || pretrain <= W + 1) {
        throw Error("pre-training segment needs more than window + 1 points");
    }
    const auto norm = Normalizer::fit_series(std::span<const double>(series).first(pretrain));
    for (auto& v : series) v = norm.apply(v);

    const Dataset windows = sliding_windows(std::span<const double>(series).first(pretrain), W);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.deep.val_fraction * static_cast<double>(windows.size()))));
    if (n_val >= windows.size()) throw Error("pre-training segment too short for a validation split");
    const Dataset train = windows.slice(0, windows.size() - n_val);
    const Dataset val = windows.slice(windows.size() - n_val, windows.size());

    const TrainConfig tc = train_config(cfg, seed);
    Mlp net = fresh_mlp(cfg, W, seed);
    const auto report = fit_early_stopping(net, train, val, tc);

    RunSummary r;
    r.kind = cfg.kind;
    r.seed = seed;
    r.deep_stop_cycle = report.stop_cycle;
    r.deep_best_cycle = report.best_cycle;
    r.deep_best_val_rms = report.best_val_rms;
    r.true_change_cycles = std::move(change_points);

    const StreamSpan all{0, series.size()};
    auto modes = run_modes(cfg, net, tc, windows, series, std::span<const StreamSpan>(&all, 1));
    fill_from_modes(r, modes, net);
    fill_settle(r, cfg);
    return r;
}

RunSummary run_mg(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto stream = regime_stream(std::vector<Vec>{mg_generate(cfg.mg.p1, cfg.mg.train),
                                                       mg_generate(cfg.mg.p2, cfg.mg.test)});
    return run_regimes(cfg, seed, stream.series, stream.change_points, cfg.mg.train);
}

RunSummary run_custom(const ExperimentConfig& cfg, std::uint64_t seed) {
    std::vector<Vec> parts;
    for (const auto& seg : cfg.custom.segments) {
        parts.push_back(seg.mg ? mg_generate(*seg.mg, seg.count) : read_series(seg.file));
        if (parts.back().empty()) throw Error("custom stream: empty segment");
    }
    const auto stream = regime_stream(parts);
    const std::size_t pretrain = cfg.custom.pretrain ? cfg.custom.pretrain : parts.front().size();
    return run_regimes(cfg, seed, stream.series, stream.change_points, pretrain);
}

// ---------------------------------------------------------------------------
// CATS

RunSummary run_cats(const ExperimentConfig& cfg, std::uint64_t seed) {
    const CatsSeries cats = cfg.cats.synthetic ? cats_synthesize(seed) : cats_load(cfg.cats.file);
    const std::size_t W = cfg.window;

    // Known points before the second gap set the scale.
    Vec known;
    for (std::size_t i = 0; i < 1980; ++i) {
        if (!cats.missing[i]) known.push_back(cats.values[i]);
    }
    const auto norm = Normalizer::fit_series(known);
    Vec x = cats.values;
    for (auto& v : x) v = norm.apply(v);

    // Windows whose forecast points have 1-based positions first..last.
    const auto windows = [&](std::size_t first, std::size_t last) {
        Dataset d(W, 1);
        for (std::size_t t = first; t <= last; ++t) {
            d.add({Vec(x.begin() + static_cast<std::ptrdiff_t>(t - 1 - W), x.begin() + static_cast<std::ptrdiff_t>(t - 1)),
                   {x[t - 1]}});
        }
        return d;
    };
    Dataset train = windows(1 + W, 970);
    for (const auto& s : windows(1001 + W, 1980)) train.add(s);
    const Dataset val = windows(971, 980);

    const TrainConfig tc = train_config(cfg, seed);
    Mlp net = fresh_mlp(cfg, W, seed);
    const auto report = fit_early_stopping(net, train, val, tc);

    RunSummary r;
    r.kind = cfg.kind;
    r.seed = seed;
    r.deep_stop_cycle = report.stop_cycle;
    r.deep_best_cycle = report.best_cycle;
    r.deep_best_val_rms = report.best_val_rms;
    if (cfg.cats.synthetic) r.true_change_cycles = {2000};

    // Closed-loop forecast of the 20 points starting at 1-based `first`,
    // scored in source units.
    const auto block_e1 = [&](HybridSystem& sys, std::size_t first) {
        const std::span<const double> seed_window(x.data() + (first - 1 - W), W);
        const auto run = [&](const OneStepPredictor& p) {
            Vec pred = iterated_predict(p, seed_window, W, CatsSeries::block_len);
            for (auto& v : pred) v = norm.denormalize(v);
            return e1_error(pred, cats.range(first, first + CatsSeries::block_len - 1));
        };
        BlockE1 b;
        b.first = first;
        b.surface = run([&](std::span<const double> w) { return sys.surface().predict(w); });
        b.deep = run([&](std::span<const double> w) { return sys.deep().predict(w); });
        b.hybrid = sys.active() == Source::surface ? b.surface : b.deep;
        r.e1.push_back(b);
    };

    // Spans are the known segments after the first gap (0-based, half-open).
    const std::vector<StreamSpan> spans{{1000, 1980}, {2000, 2980}, {3000, 3980}, {4000, 4980}};
    auto modes = run_modes(
        cfg, net, tc, train, x, spans,
        [&](HybridSystem& sys, std::size_t k) { block_e1(sys, spans[k].end + 1); },
        [&](HybridSystem& sys) { block_e1(sys, 981); });
    fill_from_modes(r, modes, net);
    return r;
}

// ---------------------------------------------------------------------------
// smooth function

RunSummary run_smooth(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& s = cfg.smooth;
    const Normalizer in_norm(Vec{s.lo, s.lo}, Vec{s.hi, s.hi});
    const Dataset raw_p1 = gauss_grid(s.p1, s.train_side, s.lo, s.hi);
    const auto out_norm = Normalizer::fit(raw_p1.targets());

    const auto scale = [&](const Dataset& d) {
        Dataset o(2, 1);
        for (const auto& smp : d) o.add({in_norm.apply(smp.input), out_norm.apply(smp.target)});
        return o;
    };
    const auto uniform = [&](const GaussParams& p, std::uint64_t tag) {
        auto rng = derived_rng(seed, tag);
        std::uniform_real_distribution<double> u(s.lo, s.hi);
        Dataset o(2, 1);
        for (std::size_t i = 0; i < s.val_points; ++i) {
            const double x1 = u(rng);
            const double x2 = u(rng);
            o.add({{x1, x2}, {gauss_pdf({x1, x2}, p)}});
        }
        return scale(o);
    };
    const Dataset tr1 = scale(raw_p1);
    const Dataset va1 = uniform(s.p1, 1);
    const Dataset tr2 = scale(gauss_grid(s.p2, s.train_side, s.lo, s.hi));
    const Dataset va2 = uniform(s.p2, 2);
    const Dataset te2 = scale(gauss_grid(s.p2, s.test_side, s.lo, s.hi));

    const TrainConfig tc = train_config(cfg, seed);
    Mlp net = fresh_mlp(cfg, 2, seed);
    const auto p1_report = fit_early_stopping(net, tr1, va1, tc);
    const Mlp pretrained = net;

    auto surface = make_surface(cfg.surface);
    surface->retrain(tr2);
    const auto surface_rms = [&](const Dataset& d) {
        Vec p, t;
        for (const auto& smp : d) {
            p.push_back(surface->predict(smp.input));
            t.push_back(smp.target[0]);
        }
        return rms_error(p, t);
    };

    SmoothReport rep;
    rep.fc_test_rms = surface_rms(te2);
    rep.bp_test_rms_warm = evaluate_rms(net, te2);
    rep.p1_stop_cycle = p1_report.stop_cycle;
    const double fc_val = surface_rms(va2);

    RunSummary r;
    r.kind = cfg.kind;
    r.seed = seed;
    CognitiveAgent agent(cfg.cognitive);
    Source current = agent.active();
    std::optional<Source> last;
    TrainConfig relearn = tc;
    relearn.seed = tc.seed + 1;
    const auto relearn_report = fit_early_stopping(net, tr2, va2, relearn, [&](std::size_t cycle, const Mlp& m, double v) {
        const double test = evaluate_rms(m, te2);
        if (cycle == 1) rep.bp_test_rms_cycle1 = test;
        r.trace.push({cycle, rep.fc_test_rms, test, current == Source::surface ? rep.fc_test_rms : test, current});
        if (last && *last != current) r.switch_cycles.push_back(cycle);
        last = current;
        const auto d = agent.observe(fc_val, v);
        if (d.change) r.change_cycles.push_back(cycle);
        current = d.source;
    });
    rep.bp_test_rms_converged = evaluate_rms(net, te2);
    rep.relearn_stop_cycle = relearn_report.stop_cycle;
    rep.relearn_best_cycle = relearn_report.best_cycle;

    r.deep_stop_cycle = relearn_report.stop_cycle;
    r.deep_best_cycle = relearn_report.best_cycle;
    r.deep_best_val_rms = relearn_report.best_val_rms;
    r.cum_surface = column_rms(r.trace.errors(Source::surface));
    r.cum_deep = column_rms(r.trace.errors(Source::deep));
    r.cum_hybrid = column_rms(r.trace.hybrid_errors());
    r.hybrid_run_surface = r.cum_surface;
    r.hybrid_run_deep = r.cum_deep;
    r.smooth = rep;
    if (auto m = surface_model(*surface)) r.models.emplace_back("surface", std::move(*m));
    r.models.emplace_back("deep", Model(net));
    r.models.emplace_back("deep_pretrained", Model(pretrained));
    return r;
}

ordered_json opt_json(const std::optional<std::size_t>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json summary_object(const ExperimentConfig& cfg, const RunSummary& r) {
    ordered_json j;
    j["experiment"] = to_string(r.kind);
    j["seed"] = r.seed;
    j["cum_rms"] = {{"surface", r.cum_surface}, {"deep", r.cum_deep}, {"hybrid", r.cum_hybrid}};
    j["cum_rms_in_hybrid_run"] = {{"surface", r.hybrid_run_surface}, {"deep", r.hybrid_run_deep}};
    j["change_cycles"] = r.change_cycles;
    j["switch_cycles"] = r.switch_cycles;
    j["true_change_cycles"] = r.true_change_cycles;
    j["deep_stop_cycle"] = r.deep_stop_cycle;
    j["deep_best_cycle"] = r.deep_best_cycle;
    j["deep_best_val_rms"] = r.deep_best_val_rms;
    if (!r.settle.empty()) {
        ordered_json a = ordered_json::array();
        for (const auto& s : r.settle) {
            a.push_back({{"change_cycle", s.change_cycle},
                         {"steady_surface", s.steady_surface},
                         {"steady_deep", s.steady_deep},
                         {"settle_surface", opt_json(s.settle_surface)},
                         {"settle_deep", opt_json(s.settle_deep)}});
        }
        j["settle"] = a;
    }
    if (!r.e1.empty()) {
        ordered_json a = ordered_json::array();
        for (const auto& b : r.e1) {
            a.push_back({{"block", b.first}, {"surface", b.surface}, {"deep", b.deep}, {"hybrid", b.hybrid}});
        }
        j["e1"] = a;
    }
    if (r.smooth) {
        const auto& s = *r.smooth;
        j["smooth"] = {{"fc_test_rms", s.fc_test_rms},
                       {"bp_test_rms_warm", s.bp_test_rms_warm},
                       {"bp_test_rms_cycle1", s.bp_test_rms_cycle1},
                       {"bp_test_rms_converged", s.bp_test_rms_converged},
                       {"p1_stop_cycle", s.p1_stop_cycle},
                       {"relearn_stop_cycle", s.relearn_stop_cycle},
                       {"relearn_best_cycle", s.relearn_best_cycle}};
    }
    j["config"] = config_json(cfg);
    return j;
}

ordered_json spread(const Vec& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return {{"mean", sum / static_cast<double>(v.size())},
            {"min", *std::min_element(v.begin(), v.end())},
            {"max", *std::max_element(v.begin(), v.end())}};
}

ordered_json aggregate(const ExperimentConfig& cfg, const std::vector<RunSummary>& runs) {
    const auto collect = [&](auto field) {
        Vec v;
        for (const auto& r : runs) v.push_back(static_cast<double>(field(r)));
        return spread(v);
    };
    ordered_json j;
    j["experiment"] = to_string(cfg.kind);
    j["trials"] = runs.size();
    ordered_json seeds = ordered_json::array();
    for (const auto& r : runs) seeds.push_back(r.seed);
    j["seeds"] = seeds;
    j["cum_rms"] = {{"surface", collect([](const RunSummary& r) { return r.cum_surface; })},
                    {"deep", collect([](const RunSummary& r) { return r.cum_deep; })},
                    {"hybrid", collect([](const RunSummary& r) { return r.cum_hybrid; })}};
    j["deep_stop_cycle"] = collect([](const RunSummary& r) { return r.deep_stop_cycle; });
    if (!runs.front().e1.empty()) {
        ordered_json a = ordered_json::array();
        for (std::size_t b = 0; b < runs.front().e1.size(); ++b) {
            a.push_back({{"block", runs.front().e1[b].first},
                         {"surface", collect([&](const RunSummary& r) { return r.e1.at(b).surface; })},
                         {"deep", collect([&](const RunSummary& r) { return r.e1.at(b).deep; })},
                         {"hybrid", collect([&](const RunSummary& r) { return r.e1.at(b).hybrid; })}});
        }
        j["e1"] = a;
    }
    j["config"] = config_json(cfg);
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os << text << '\n';
    if (!os) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

RunSummary run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
    switch (cfg.kind) {
        case ExperimentKind::mg: return run_mg(cfg, seed);
        case ExperimentKind::cats: return run_cats(cfg, seed);
        case ExperimentKind::smooth: return run_smooth(cfg, seed);
        case ExperimentKind::custom: return run_custom(cfg, seed);
    }
    throw Error("unknown experiment kind");
}

std::string summary_json(const ExperimentConfig& cfg, const RunSummary& run) {
    return summary_object(cfg, run).dump(2);
}

void write_artifacts(const ExperimentConfig& cfg, const RunSummary& run, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
    emit_plotdata(run.trace, (fs::path(dir) / "trace.csv").string());
    write_text(fs::path(dir) / "summary.json", summary_json(cfg, run));
    for (const auto& [stem, model] : run.models) save_model(model, (fs::path(dir) / (stem + ".json")).string());
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<RunSummary> runs;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        runs.push_back(run_trial(cfg, cfg.seed + i));
        const std::string dir =
            cfg.trials == 1 ? cfg.out : (fs::path(cfg.out) / ("trial-" + std::to_string(i))).string();
        write_artifacts(cfg, runs.back(), dir);
        runs.back().models.clear();
    }
    if (cfg.trials > 1) write_text(fs::path(cfg.out) / "summary.json", aggregate(cfg, runs).dump(2));
    return runs;
}

}  // namespace hybridnet
