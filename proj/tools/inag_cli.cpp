// inag: command-line driver for the experiment pipeline.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "inag/bench/config.hpp"
#include "inag/bench/experiment.hpp"
#include "inag/common/error.hpp"
#include "inag/gan/nagan.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct Common {
    std::string config;
    std::string stage;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool real_eval = false;
    std::optional<std::size_t> parallelism;
};

void add_common(CLI::App* app, Common& c, bool with_stage) {
    app->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
    if (with_stage) app->add_option("--stage", c.stage, "run only this stage and its missing inputs");
    app->add_option("--seed", c.seed, "override master_seed");
    app->add_option("--out", c.out, "override output_dir");
    app->add_flag("--real-eval", c.real_eval, "also compute mdist_r by training sampled candidates");
    app->add_option("--parallelism", c.parallelism, "worker threads")->check(CLI::PositiveNumber);
}

inag::bench::ExperimentConfig load(const Common& c) {
    auto cfg = inag::bench::load_experiment_config(c.config);
    if (c.seed) {
        // Re-parse so every derived sub-seed follows the new master seed.
        auto j = inag::bench::to_json(cfg);
        j["master_seed"] = *c.seed;
        cfg = inag::bench::parse_experiment_config(j);
    }
    return cfg;
}

int run(const Common& c, const std::optional<std::string>& stage) {
    inag::bench::ExperimentConfig cfg;
    inag::bench::RunOptions opts;
    try {
        cfg = load(c);
        opts.stage = stage;
        opts.real_eval = c.real_eval;
        opts.parallelism = c.parallelism;
        if (!c.out.empty()) opts.output_dir = c.out;
        if (stage && !inag::bench::is_stage(*stage)) throw inag::ConfigError("unknown stage '" + *stage + "'");
        cfg = inag::bench::apply_options(cfg, opts);
    } catch (const inag::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const inag::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    opts.log = &std::cerr;
    try {
        const auto result = inag::bench::run_experiment(cfg, opts);
        std::cout << "output: " << result.directory.string() << "\nconfig digest: " << result.config_digest << "\n";
        for (const auto& s : result.stages) {
            std::cout << "  " << s.stage << ": " << inag::bench::to_string(s.status);
            if (!s.message.empty()) std::cout << " (" << s.message << ")";
            std::cout << "\n";
        }
        return result.ok() ? 0 : kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
}

int generate(const Common& c, double condition, std::size_t count) {
    Common up = c;
    if (const int rc = run(up, std::string("train")); rc != 0) return rc;
    try {
        auto cfg = load(c);
        if (!c.out.empty()) cfg.output_dir = c.out;
        const auto bundle = inag::gan::load_bundle(std::filesystem::path(cfg.output_dir) / inag::bench::artifacts::bundle);
        const auto seed = inag::bench::derive_seed(cfg.master_seed, inag::bench::SeedTag::generate);
        const auto bag = inag::gan::generate_bag(bundle.models.generator, bundle.space, condition, count, seed);
        const auto pred = inag::gan::encoder_predict(bundle.models.encoder, bundle.space, bag);
        for (std::size_t i = 0; i < bag.size(); ++i) {
            nlohmann::json j;
            j["condition"] = condition;
            j["predicted"] = pred[i];
            j["descriptor"] = bag[i];
            std::cout << j.dump() << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse neural architecture generation pipeline"};
    app.require_subcommand(1);

    Common common;
    std::string chosen_stage;
    for (auto stage : inag::bench::kStages) {
        const std::string name(stage);
        auto* sub = app.add_subcommand(name, "run the " + name + " stage (and any missing inputs)");
        add_common(sub, common, false);
        sub->callback([&chosen_stage, name] { chosen_stage = name; });
    }
    auto* run_cmd = app.add_subcommand("run", "run the whole pipeline, resuming completed stages");
    add_common(run_cmd, common, true);

    double condition = 0.9;
    std::size_t count = 10;
    auto* gen_cmd = app.add_subcommand("generate", "print descriptors sampled from the trained generator");
    add_common(gen_cmd, common, false);
    gen_cmd->add_option("--condition", condition, "requested performance in [0,1]")->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--count", count, "number of descriptors")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (gen_cmd->parsed()) return generate(common, condition, count);
    if (run_cmd->parsed()) return run(common, common.stage.empty() ? std::nullopt : std::optional(common.stage));
    return run(common, chosen_stage);
}
