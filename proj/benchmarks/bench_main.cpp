#include <benchmark/benchmark.h>

#include <random>

#include "hybridnet/cc4.hpp"
#include "hybridnet/datagen.hpp"
#include "hybridnet/fc.hpp"
#include "hybridnet/mlp.hpp"

using namespace hybridnet;

namespace {

std::vector<BinaryPattern> random_patterns(std::size_t count, std::size_t bits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<BinaryPattern> out(count);
    for (auto& p : out) {
        p.input.resize(bits);
        p.output.resize(1);
        for (auto& b : p.input) b = coin(rng);
        p.output[0] = coin(rng);
    }
    return out;
}

// Normalized Mackey-Glass windows, W = 6.
Dataset mg_windows(std::size_t n) {
    Vec s = mg_generate(mg_p1(), n + 6);
    const auto norm = Normalizer::fit_series(s);
    for (auto& v : s) v = norm.apply(v);
    return sliding_windows(s, 6);
}

}  // namespace

static void BM_Cc4Train(benchmark::State& state) {
    const auto pats = random_patterns(static_cast<std::size_t>(state.range(0)), 64, 1);
    for (auto _ : state) benchmark::DoNotOptimize(Cc4Network::train(pats, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Cc4Train)->Arg(64)->Arg(1024);

static void BM_Cc4Predict(benchmark::State& state) {
    const auto pats = random_patterns(static_cast<std::size_t>(state.range(0)), 64, 1);
    const auto net = Cc4Network::train(pats, 3);
    const auto probe = random_patterns(1, 64, 2).front().input;
    for (auto _ : state) benchmark::DoNotOptimize(net.predict(probe));
}
BENCHMARK(BM_Cc4Predict)->Arg(64)->Arg(1024);

static void BM_FcTrain(benchmark::State& state) {
    const auto data = mg_windows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(FcNetwork::train(data, default_k(data.size())));
}
BENCHMARK(BM_FcTrain)->Arg(10)->Arg(200)->Arg(1000);

static void BM_FcPredict(benchmark::State& state) {
    const auto data = mg_windows(static_cast<std::size_t>(state.range(0)));
    const auto net = FcNetwork::train(data, default_k(data.size()));
    const Vec probe{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    for (auto _ : state) benchmark::DoNotOptimize(net.predict_scalar(probe));
}
BENCHMARK(BM_FcPredict)->Arg(10)->Arg(200)->Arg(1000);

static void BM_MlpBackprop(benchmark::State& state) {
    const std::vector<std::size_t> sizes{6, static_cast<std::size_t>(state.range(0)), 1};
    Mlp net = Mlp::init(sizes, 1);
    const Sample s{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {0.7}};
    for (auto _ : state) benchmark::DoNotOptimize(net.backprop_update(s, 1e-4, 0.0));
}
BENCHMARK(BM_MlpBackprop)->Arg(10)->Arg(20)->Arg(100);

// One stream cycle of the deep agent: a shuffled pass over 1000 windows.
static void BM_MlpAdaptationCycle(benchmark::State& state) {
    const auto data = mg_windows(1000);
    const std::vector<std::size_t> sizes{6, 20, 1};
    Mlp net = Mlp::init(sizes, 1);
    TrainConfig cfg;
    cfg.learning_rate = 0.001;
    std::mt19937_64 rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(adaptation_cycle(net, data, cfg, rng));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_MlpAdaptationCycle);
BENCHMARK_MAIN();
