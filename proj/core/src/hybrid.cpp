#include "hybridnet/hybrid.hpp"

#include <algorithm>
#include <cmath>

namespace hybridnet {

void FcSurface::retrain(const Dataset& recent) {
    const std::size_t k = fixed_k_ ? std::min(fixed_k_, recent.size()) : default_k(recent.size(), k_fraction_);
    net_ = FcNetwork::train(recent, k);
}

double FcSurface::predict(std::span<const double> window) const {
    if (!net_) throw Error("FcSurface: predict before training");
    return net_->predict_scalar(window);
}

void Cc4Surface::retrain(const Dataset& recent) {
    auto [in_q, out_q] = Cc4Regressor::fit_quantizers(recent, levels_, encoding_);
    model_ = Cc4Regressor::train(recent, std::move(in_q), out_q, radius_);
}

double Cc4Surface::predict(std::span<const double> window) const {
    if (!model_) throw Error("Cc4Surface: predict before training");
    return model_->predict(window);
}

void MlpDeep::adapt(const Dataset& buffer) {
    if (buffer.empty()) return;
    adaptation_cycle(net_, buffer, cfg_, rng_);
}

double MlpDeep::predict(std::span<const double> window) const { return net_.forward(window).at(0); }

// ---------------------------------------------------------------------------

namespace {

double rms_of(const std::deque<double>& errs) {
    double acc = 0.0;
    for (double e : errs) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errs.size()));
}

double median_of(Vec v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

CognitiveAgent::CognitiveAgent(CognitiveConfig cfg) : cfg_(cfg), active_(cfg.initial_source) {
    if (cfg_.eval_window < 1) throw Error("CognitiveConfig: eval window must be >= 1");
    if (!(cfg_.change_threshold > 1.0)) throw Error("CognitiveConfig: change threshold must be > 1");
    if (cfg_.persistence < 1) throw Error("CognitiveConfig: persistence must be >= 1");
}

double CognitiveAgent::window_rms(Source s) const {
    const auto& errs = s == Source::surface ? surface_errors_ : deep_errors_;
    return errs.empty() ? 0.0 : rms_of(errs);
}

std::optional<double> CognitiveAgent::baseline() const {
    if (deep_history_.empty()) return std::nullopt;
    return median_of(deep_history_);
}

bool CognitiveAgent::detect_change() const {
    if (deep_errors_.size() < cfg_.eval_window) return false;
    if (since_change_ < cfg_.eval_window) return false;
    const auto base = baseline();
    if (!base) return false;
    return window_rms(Source::deep) > cfg_.change_threshold * *base;
}

Source CognitiveAgent::select_source(bool change, double surface_rms, double deep_rms) {
    if (change) {
        active_ = Source::surface;
        wins_ = 0;
        return active_;
    }
    if (active_ == Source::deep) return active_;
    if (deep_errors_.size() < cfg_.eval_window || !(deep_rms < surface_rms)) {
        wins_ = 0;
        return active_;
    }
    if (++wins_ >= cfg_.persistence) {
        active_ = Source::deep;
        wins_ = 0;
    }
    return active_;
}

CognitiveAgent::Decision CognitiveAgent::observe(double err_surface, double err_deep) {
    surface_errors_.push_back(std::abs(err_surface));
    deep_errors_.push_back(std::abs(err_deep));
    if (surface_errors_.size() > cfg_.eval_window) surface_errors_.pop_front();
    if (deep_errors_.size() > cfg_.eval_window) deep_errors_.pop_front();
    ++since_change_;

    Decision d;
    d.change = detect_change();
    const double s_rms = window_rms(Source::surface);
    const double d_rms = window_rms(Source::deep);
    d.source = select_source(d.change, s_rms, d_rms);

    if (d.change) {
        deep_history_.clear();
        since_change_ = 0;
    } else if (deep_errors_.size() >= cfg_.eval_window) {
        deep_history_.push_back(d_rms);
    }
    return d;
}

// ---------------------------------------------------------------------------

HybridSystem::HybridSystem(std::unique_ptr<SurfaceLearner> surface, std::unique_ptr<DeepLearner> deep,
                           CognitiveConfig cfg, std::size_t window, RunMode mode)
    : surface_(std::move(surface)), deep_(std::move(deep)), agent_(cfg), window_(window), mode_(mode),
      history_(window, 1) {
    if (!surface_ || !deep_) throw Error("HybridSystem: both agents are required");
    if (window_ < 1) throw Error("HybridSystem: window must be >= 1");
    if (cfg.retrain_window < window_) throw Error("CognitiveConfig: retrain window M must be >= W");
    if (cfg.deep_window < 1) throw Error("CognitiveConfig: deep window must be >= 1");
}

Source HybridSystem::active() const noexcept {
    switch (mode_) {
        case RunMode::surface_only: return Source::surface;
        case RunMode::deep_only: return Source::deep;
        case RunMode::hybrid: break;
    }
    return agent_.active();
}

void HybridSystem::prime(const Dataset& history) {
    if (history.empty()) return;
    if (history.input_dim() != window_) throw Error("HybridSystem::prime: sample width != window");
    const auto& cfg = agent_.config();
    history_ = history.tail(std::max(cfg.retrain_window, cfg.deep_window));
    surface_->retrain(history_.tail(cfg.retrain_window));
}

StepRecord HybridSystem::predict(std::size_t cycle, std::span<const double> window) {
    if (pending_) throw Error("HybridSystem: cycle " + std::to_string(pending_->cycle) + " still awaits its truth");
    if (window.size() != window_) {
        throw Error("HybridSystem: window has " + std::to_string(window.size()) + " values, expected " +
                    std::to_string(window_));
    }
    if (!surface_->trained()) throw Error("HybridSystem: surface agent has no training data (call prime)");
    StepRecord rec;
    rec.cycle = cycle;
    rec.window.assign(window.begin(), window.end());
    rec.surface_pred = surface_->predict(window);
    rec.deep_pred = deep_->predict(window);
    rec.source = active();
    rec.hybrid_output = rec.source == Source::surface ? rec.surface_pred : rec.deep_pred;
    pending_ = rec;
    return rec;
}

StepRecord HybridSystem::reveal(std::size_t cycle, double truth) {
    if (!pending_ || pending_->cycle != cycle) {
        throw Error("HybridSystem: truth for cycle " + std::to_string(cycle) + " revealed out of order");
    }
    StepRecord rec = std::move(*pending_);
    pending_.reset();
    rec.truth = truth;
    rec.err_surface = std::abs(rec.surface_pred - truth);
    rec.err_deep = std::abs(rec.deep_pred - truth);
    rec.err_hybrid = std::abs(rec.hybrid_output - truth);

    const auto& cfg = agent_.config();
    history_.add({rec.window, {truth}});
    const std::size_t cap = std::max(cfg.retrain_window, cfg.deep_window);
    if (history_.size() > cap) history_ = history_.tail(cap);

    const auto decision = agent_.observe(rec.err_surface, rec.err_deep);
    rec.change_detected = decision.change;
    if (decision.change && mode_ == RunMode::hybrid && cfg.flush_on_change) {
        history_ = history_.tail(cfg.eval_window);
    }

    surface_->retrain(history_.tail(cfg.retrain_window));
    deep_->adapt(history_.tail(cfg.deep_window));
    return rec;
}

StepRecord HybridSystem::step(std::size_t cycle, std::span<const double> window, double truth) {
    predict(cycle, window);
    return reveal(cycle, truth);
}

// ---------------------------------------------------------------------------

StreamResult run_stream(HybridSystem& system, std::span<const double> series, bool keep_steps) {
    if (series.size() <= system.window()) throw Error("run_stream: stream shorter than one window plus target");
    const StreamSpan all{0, series.size()};
    return run_stream(system, series, std::span<const StreamSpan>(&all, 1), keep_steps);
}

StreamResult run_stream(HybridSystem& system, std::span<const double> series, std::span<const StreamSpan> spans,
                        bool keep_steps, const SpanHook& after_span) {
    const std::size_t w = system.window();
    std::size_t floor = 0;
    for (const auto& sp : spans) {
        if (sp.begin < floor || sp.end > series.size() || sp.end <= sp.begin + w) {
            throw Error("run_stream: spans must be ascending, inside the series and longer than the window");
        }
        floor = sp.end;
    }
    StreamResult out;
    Vec es, ed, eh;
    std::optional<Source> last;
    for (std::size_t k = 0; k < spans.size(); ++k) {
        for (std::size_t cycle = spans[k].begin + w; cycle < spans[k].end; ++cycle) {
            auto rec = system.step(cycle, series.subspan(cycle - w, w), series[cycle]);
            out.trace.push({cycle, rec.err_surface, rec.err_deep, rec.err_hybrid, rec.source});
            if (last && *last != rec.source) out.summary.switch_cycles.push_back(cycle);
            last = rec.source;
            if (rec.change_detected) out.summary.change_cycles.push_back(cycle);
            es.push_back(rec.err_surface);
            ed.push_back(rec.err_deep);
            eh.push_back(rec.err_hybrid);
            if (keep_steps) out.steps.push_back(std::move(rec));
        }
        if (after_span) after_span(system, k);
    }
    if (es.empty()) throw Error("run_stream: no spans");
    const Vec zeros(es.size(), 0.0);
    out.summary.cum_rms_surface = rms_error(es, zeros);
    out.summary.cum_rms_deep = rms_error(ed, zeros);
    out.summary.cum_rms_hybrid = rms_error(eh, zeros);
    return out;
}

double forward_window_rms(std::span<const double> errors, std::size_t first, std::size_t window) {
    if (first >= errors.size() || window == 0) throw Error("forward_window_rms: empty window");
    const std::size_t last = std::min(errors.size(), first + window);
    double acc = 0.0;
    for (std::size_t i = first; i < last; ++i) acc += errors[i] * errors[i];
    return std::sqrt(acc / static_cast<double>(last - first));
}

}  // namespace hybridnet
