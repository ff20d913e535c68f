// hybridnet: run experiments, generate benchmark data, inspect models.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridnet/experiment.hpp"

namespace {

using namespace hybridnet;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    bool synthetic = false;
};

int cmd_run(const RunArgs& a) {
    ExperimentConfig cfg = load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    if (a.out) cfg.out = *a.out;
    if (a.synthetic) cfg.cats.synthetic = true;
    validate_config(cfg);

    const auto runs = run_experiment(cfg);
    for (const auto& r : runs) {
        std::printf("seed %llu  cum_rms surface %.6g deep %.6g hybrid %.6g  deep stop cycle %zu  changes %zu\n",
                    static_cast<unsigned long long>(r.seed), r.cum_surface, r.cum_deep, r.cum_hybrid,
                    r.deep_stop_cycle, r.change_cycles.size());
    }
    std::printf("artifacts in %s\n", cfg.out.c_str());
    return 0;
}

MgParams mg_preset(const std::string& name) {
    if (name == "p1") return mg_p1();
    if (name == "p2") return mg_p2();
    throw ConfigError("unknown preset '" + name + "' (p1 or p2)");
}

GaussParams gauss_preset(const std::string& name) {
    if (name == "p1") return gauss_p1();
    if (name == "p2") return gauss_p2();
    throw ConfigError("unknown preset '" + name + "' (p1 or p2)");
}

int report(const std::exception& e, int code) {
    std::cerr << "hybridnet: " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid surface/deep learner for drifting time series"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
    run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--seed", run.seed, "Base seed; trial i uses seed + i");
    run_cmd->add_option("--trials", run.trials, "Number of trials")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_flag("--synthetic", run.synthetic, "cats: use the synthetic surrogate series");

    auto* gen = app.add_subcommand("gen", "Write benchmark series and datasets");
    gen->require_subcommand(1);

    std::string mg_preset_name = "p1", mg_out;
    std::size_t mg_count = 1500;
    std::optional<double> mg_a, mg_b, mg_d;
    auto* gen_mg = gen->add_subcommand("mg", "Mackey-Glass series, one value per line");
    gen_mg->add_option("--preset", mg_preset_name, "Parameter preset: p1 or p2")->capture_default_str();
    gen_mg->add_option("--count", mg_count, "Number of samples")->capture_default_str();
    gen_mg->add_option("-a", mg_a, "Override the feedback gain");
    gen_mg->add_option("-b", mg_b, "Override the decay rate");
    gen_mg->add_option("-d", mg_d, "Override the delay");
    gen_mg->add_option("--out", mg_out, "Output file")->required();

    std::string g_preset_name = "p1", g_out;
    std::size_t g_side = 30;
    double g_lo = -2.0, g_hi = 2.0;
    auto* gen_gauss = gen->add_subcommand("gauss", "Bivariate Gaussian grid as dataset CSV");
    gen_gauss->add_option("--preset", g_preset_name, "Parameter preset: p1 or p2")->capture_default_str();
    gen_gauss->add_option("--side", g_side, "Grid points per axis")->capture_default_str();
    gen_gauss->add_option("--lo", g_lo, "Lower domain bound")->capture_default_str();
    gen_gauss->add_option("--hi", g_hi, "Upper domain bound")->capture_default_str();
    gen_gauss->add_option("--out", g_out, "Output file")->required();

    std::uint64_t cats_seed = 1;
    std::string cats_out;
    auto* gen_cats = gen->add_subcommand("cats-synthetic", "5000-point CATS-style surrogate series");
    gen_cats->add_option("--seed", cats_seed, "Noise seed")->capture_default_str();
    gen_cats->add_option("--out", cats_out, "Output file")->required();

    auto* model_cmd = app.add_subcommand("model", "Inspect saved models");
    model_cmd->require_subcommand(1);
    std::string model_path, model_out;
    std::vector<double> model_input;
    auto* model_show = model_cmd->add_subcommand("show", "Print a model's kind and shape");
    model_show->add_option("file", model_path, "Model JSON")->required();
    auto* model_predict = model_cmd->add_subcommand("predict", "Evaluate a model on one input vector");
    model_predict->add_option("file", model_path, "Model JSON")->required();
    model_predict->add_option("input", model_input, "Input values")->required();
    auto* model_copy = model_cmd->add_subcommand("copy", "Load a model and save it again");
    model_copy->add_option("file", model_path, "Model JSON")->required();
    model_copy->add_option("out", model_out, "Destination")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        if (*run_cmd) return cmd_run(run);

        if (*gen_mg) {
            MgParams p = mg_preset(mg_preset_name);
            if (mg_a) p.a = *mg_a;
            if (mg_b) p.b = *mg_b;
            if (mg_d) p.d = *mg_d;
            if (mg_count < 1) throw ConfigError("--count must be >= 1");
            write_series(mg_out, mg_generate(p, mg_count));
            return 0;
        }
        if (*gen_gauss) {
            if (g_side < 2 || !(g_hi > g_lo)) throw ConfigError("need --side >= 2 and --hi > --lo");
            write_dataset_csv(g_out, gauss_grid(gauss_preset(g_preset_name), g_side, g_lo, g_hi));
            return 0;
        }
        if (*gen_cats) {
            write_series(cats_out, cats_synthesize(cats_seed).values);
            return 0;
        }

        const Model m = load_model(model_path);
        if (*model_show) {
            std::printf("kind %s\n", std::string(model_kind(m)).c_str());
            std::visit(
                [](const auto& net) {
                    using T = std::decay_t<decltype(net)>;
                    if constexpr (std::is_same_v<T, Mlp>) {
                        std::printf("sizes");
                        for (auto s : net.sizes()) std::printf(" %zu", s);
                        std::printf("\nparameters %zu\n", net.parameter_count());
                    } else if constexpr (std::is_same_v<T, FcNetwork>) {
                        std::printf("exemplars %zu\ninputs %zu\nk %zu\n", net.size(), net.input_dim(), net.k());
                    } else if constexpr (std::is_same_v<T, Cc4Regressor>) {
                        std::printf("exemplars %zu\nr %d\n", net.network().hidden_count(), net.network().radius());
                    } else {
                        std::printf("exemplars %zu\nr %d\n", net.hidden_count(), net.radius());
                    }
                },
                m);
        } else if (*model_predict) {
            const Vec y = std::visit(
                [&](const auto& net) -> Vec {
                    using T = std::decay_t<decltype(net)>;
                    if constexpr (std::is_same_v<T, Cc4Regressor>) {
                        return {net.predict(model_input)};
                    } else if constexpr (std::is_same_v<T, Cc4Network>) {
                        std::vector<std::uint8_t> bits;
                        for (double v : model_input) bits.push_back(v != 0.0 ? 1 : 0);
                        const auto out = net.predict(bits);
                        return Vec(out.begin(), out.end());
                    } else if constexpr (std::is_same_v<T, FcNetwork>) {
                        return net.predict(model_input);
                    } else {
                        return net.forward(model_input);
                    }
                },
                m);
            for (std::size_t i = 0; i < y.size(); ++i) std::printf(i ? " %.17g" : "%.17g", y[i]);
            std::printf("\n");
        } else if (*model_copy) {
            save_model(m, model_out);
        }
        return 0;
    } catch (const ConfigError& e) {
        return report(e, kConfigError);
    } catch (const std::exception& e) {
        return report(e, kRuntimeError);
    }
}
