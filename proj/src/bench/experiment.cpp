#include "inag/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "inag/bench/report.hpp"
#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "inag/common/parallel.hpp"
#include "inag/data/corpus.hpp"
#include "inag/nn/checkpoint.hpp"

namespace inag::bench {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_stage(std::string_view name) {
    return std::find(kStages.begin(), kStages.end(), name) != kStages.end();
}

std::vector<std::string_view> stage_inputs(std::string_view stage) {
    if (stage == "encoder") return {"datagen"};
    if (stage == "train") return {"datagen", "encoder"};
    if (stage == "sweep" || stage == "select" || stage == "baseline") return {"train"};
    if (stage == "report") return {"datagen", "encoder", "sweep", "select", "baseline"};
    return {};
}

std::string_view to_string(StageStatus s) {
    switch (s) {
        case StageStatus::complete: return "complete";
        case StageStatus::reused: return "reused";
        case StageStatus::failed: return "failed";
        case StageStatus::blocked: return "blocked";
    }
    return "failed";
}

bool RunResult::ok() const {
    return std::all_of(stages.begin(), stages.end(), [](const StageOutcome& s) {
        return s.status == StageStatus::complete || s.status == StageStatus::reused;
    });
}

ExperimentConfig apply_options(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.output_dir) cfg.output_dir = *opts.output_dir;
    if (opts.parallelism) cfg.parallelism = *opts.parallelism;
    if (opts.real_eval) cfg.metric.real_eval = true;
    cfg.validate();
    return cfg;
}

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Everything a stage needs while it runs. Upstream artifacts are always
// re-read from disk so a resumed run sees exactly what a fresh one would.
struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    std::string digest;
    std::ostream* log;
    json timings;

    std::optional<data::TaskDataset> task_cache;
    std::optional<space::SearchSpace> space_cache;

    const data::TaskDataset& task() {
        if (!task_cache) task_cache = load_task(cfg);
        return *task_cache;
    }
    const space::SearchSpace& space() {
        if (!space_cache) space_cache = bind_space(cfg, task());
        return *space_cache;
    }
    fs::path path(const char* name) const { return dir / name; }
};

using Outputs = std::vector<std::string>;

// ---- stages ---------------------------------------------------------------

Outputs stage_datagen(Context& ctx) {
    const auto& cfg = ctx.cfg;
    data::CorpusGenConfig gen;
    gen.n_records = cfg.corpus_records;
    gen.parallelism = cfg.parallelism;
    gen.master_seed = derive_seed(cfg.master_seed, SeedTag::corpus);
    gen.candidate = cfg.candidate;
    gen.energy = cfg.energy;
    const auto records = data::generate_corpus(ctx.space(), ctx.task(), gen);

    json task = to_json(cfg)["task"];
    task["name"] = ctx.task().name;
    const data::CorpusHeader header{1, ctx.space(), task, gen.master_seed, json(cfg.candidate)};
    data::write_corpus(ctx.path(artifacts::corpus), header, records);

    std::vector<std::size_t> deciles(10, 0);
    std::size_t diverged = 0;
    double mean = 0.0;
    for (const auto& r : records) {
        deciles[std::min<std::size_t>(9, static_cast<std::size_t>(r.condition * 10.0))]++;
        diverged += r.diverged ? 1 : 0;
        mean += r.condition;
    }
    const auto covered = static_cast<std::size_t>(std::count_if(deciles.begin(), deciles.end(), [](auto n) { return n > 0; }));
    write_file_atomic(ctx.path(artifacts::corpus_summary),
                      dump({{"config_digest", ctx.digest},
                            {"records", records.size()},
                            {"diverged", diverged},
                            {"mean_condition", records.empty() ? 0.0 : mean / static_cast<double>(records.size())},
                            {"condition_deciles", deciles},
                            {"deciles_covered", covered}}));
    return {artifacts::corpus, artifacts::corpus_summary};
}

Outputs stage_encoder(Context& ctx) {
    const auto corpus = data::read_corpus(ctx.path(artifacts::corpus));
    const auto rep = gan::pretrain_encoder(corpus.records, corpus.header.space, ctx.cfg.nagan);
    nn::save_checkpoint(ctx.path(artifacts::encoder), rep.encoder);
    write_file_atomic(ctx.path(artifacts::encoder_report),
                      dump({{"config_digest", ctx.digest},
                            {"holdout_mae", rep.holdout_mae},
                            {"train_records", rep.train_records},
                            {"holdout_records", rep.holdout_records}}));
    return {artifacts::encoder, artifacts::encoder_report};
}

Outputs stage_train(Context& ctx) {
    const auto corpus = data::read_corpus(ctx.path(artifacts::corpus));
    const auto encoder = nn::load_checkpoint(ctx.path(artifacts::encoder));
    const auto result = gan::nagan_train(corpus.records, corpus.header.space, encoder, ctx.cfg.nagan);
    gan::save_bundle(ctx.path(artifacts::bundle), result.models, corpus.header.space, ctx.cfg.nagan);
    std::ostringstream trace;
    trace << "iteration,discriminator,generator,encoder_teaching\n";
    char buf[128];
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const auto& t = result.trace[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, t.discriminator, t.generator, t.encoder_teaching);
        trace << buf;
    }
    write_file_atomic(ctx.path(artifacts::trace), trace.str());
    return {artifacts::bundle, artifacts::trace};
}

EvalTester real_tester(Context& ctx) {
    return [&ctx](const std::vector<space::ArchDescriptor>& bag, std::uint64_t seed) {
        std::vector<Evaluation> out(bag.size());
        const SeedStream root(seed, 0x7ea1);
        parallel_for(bag.size(), ctx.cfg.parallelism, [&](std::size_t i) {
            auto c = ctx.cfg.candidate;
            c.seed = root.split(i).next_u64();
            const auto r = lab::train_candidate(bag[i], ctx.space(), ctx.task(), c, ctx.cfg.energy);
            out[i] = {r.performance, r.diverged};
        });
        return out;
    };
}

Outputs stage_sweep(Context& ctx) {
    const auto bundle = gan::load_bundle(ctx.path(artifacts::bundle));
    const auto source = select::generator_source(bundle.models.generator, bundle.space);
    const auto encoder = from_tester(select::encoder_tester(bundle.models.encoder, bundle.space));
    ctx.task();  // load before any worker threads need it
    ctx.space();
    const auto real = real_tester(ctx);
    const auto report = sweep(source, encoder, &real, ctx.cfg.metric, derive_seed(ctx.cfg.master_seed, SeedTag::sweep),
                              ctx.digest);
    write_file_atomic(ctx.path(artifacts::sweep), dump(to_json_report(report)));
    return {artifacts::sweep};
}

Outputs stage_select(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto bundle = gan::load_bundle(ctx.path(artifacts::bundle));
    const auto& sp = bundle.space;
    const auto source = select::generator_source(bundle.models.generator, sp);
    const auto tester = select::encoder_tester(bundle.models.encoder, sp);
    const SeedStream root(derive_seed(cfg.master_seed, SeedTag::select), 0);

    std::string lines;
    std::string text;
    for (std::size_t k = 0; k < cfg.inag.scenarios.size(); ++k) {
        const auto& sc = cfg.inag.scenarios[k];
        select::InagConfig icfg{cfg.inag.bag_size, cfg.inag.step,     cfg.inag.c_min, cfg.metric.p_r,
                                cfg.inag.criterion, cfg.energy, root.split(k).next_u64()};
        const auto report = select::inag_run(source, tester, sc.condition, sc.constraints, sp, icfg);
        json j = select::report_json(report);
        j["scenario"] = sc.name;
        j["config_digest"] = ctx.digest;
        lines += j.dump() + "\n";
        text += "== scenario " + sc.name + " ==\n" + select::report_text(report) + "\n";
    }
    write_file_atomic(ctx.path(artifacts::selections), lines);
    write_file_atomic(ctx.path(artifacts::selections_text), text);

    // Pareto sweep across the metric grid.
    std::vector<double> chosen_c, bag_c;
    std::vector<select::AnnotatedCandidate> chosen, bag_all;
    select::ConstraintSet cons;
    cons.max_dist = cfg.inag.pareto_max_dist;
    const SeedStream pareto_root = root.split(1u << 20);
    for (std::size_t i = 0; i < cfg.metric.grid.size(); ++i) {
        const double c = cfg.metric.grid[i];
        select::InagConfig icfg{cfg.inag.bag_size, cfg.inag.step,           cfg.inag.c_min, cfg.metric.p_r,
                                cfg.inag.pareto_criterion, cfg.energy, pareto_root.split(i).next_u64()};
        const auto report = select::inag_run(source, tester, c, cons, sp, icfg);
        if (report.chosen) {
            chosen_c.push_back(c);
            chosen.push_back(*report.chosen);
        }
        // The first attempt's full bag, for the background scatter.
        const auto annotated =
            select::annotate(source(c, icfg.bag_size, icfg.seed), tester, c, icfg.p_r, sp, cfg.energy);
        for (const auto& a : annotated) {
            bag_c.push_back(c);
            bag_all.push_back(a);
        }
    }
    const auto chosen_rows = scatter_rows(chosen_c, chosen);
    emit_scatter(chosen_rows, ctx.path(artifacts::scatter_chosen));
    const auto bag_rows = scatter_rows(bag_c, bag_all);
    emit_scatter(bag_rows, ctx.path(artifacts::scatter_bag));

    std::set<double> storages;
    std::set<std::pair<double, double>> frontier;
    for (const auto& r : chosen_rows) {
        storages.insert(r.storage_norm);
        if (r.pareto) frontier.insert({r.performance, r.storage_norm});
    }
    std::set<std::pair<double, double>> bag_frontier;
    for (const auto& r : bag_rows)
        if (r.pareto) bag_frontier.insert({r.performance, r.storage_norm});
    write_file_atomic(ctx.path(artifacts::pareto),
                      dump({{"config_digest", ctx.digest},
                            {"criterion", select::to_string(cfg.inag.pareto_criterion)},
                            {"max_dist", cfg.inag.pareto_max_dist},
                            {"grid_points", cfg.metric.grid.size()},
                            {"chosen", chosen_rows.size()},
                            {"distinct_storage_norm", storages.size()},
                            {"frontier_points", frontier.size()},
                            {"bag_candidates", bag_rows.size()},
                            {"bag_frontier_points", bag_frontier.size()}}));
    return {artifacts::selections, artifacts::selections_text, artifacts::scatter_chosen, artifacts::scatter_bag,
            artifacts::pareto};
}

Outputs stage_baseline(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto bundle = gan::load_bundle(ctx.path(artifacts::bundle));
    const auto& sp = bundle.space;

    ComparisonInputs in;
    in.methods = cfg.baselines.methods;
    in.problem.space = sp;
    in.problem.constraints = cfg.baselines.constraints;
    in.problem.energy = cfg.energy;
    if (cfg.baselines.real_eval) {
        ctx.task();
        in.problem.evaluator = [&ctx, &sp](const space::ArchDescriptor& d) {
            auto c = ctx.cfg.candidate;
            std::uint64_t h = derive_seed(ctx.cfg.master_seed, SeedTag::generate);
            for (std::size_t idx : space::to_indices(d, sp)) h = mix64(h ^ idx);
            c.seed = h;
            return lab::train_candidate(d, sp, ctx.task(), c, ctx.cfg.energy).performance;
        };
    } else {
        const nn::DenseNet encoder = bundle.models.encoder;
        in.problem.evaluator = [encoder, sp](const space::ArchDescriptor& d) {
            return gan::encoder_predict(encoder, sp, {d}).front();
        };
    }
    in.ga = cfg.baselines.ga;
    in.bo = cfg.baselines.bo;
    in.source = select::generator_source(bundle.models.generator, sp);
    in.tester = select::encoder_tester(bundle.models.encoder, sp);
    in.condition = cfg.baselines.condition;
    in.inag = {cfg.inag.bag_size, cfg.inag.step, cfg.inag.c_min, cfg.metric.p_r, cfg.inag.criterion, cfg.energy,
               derive_seed(cfg.master_seed, SeedTag::inag_baseline)};
    if (ctx.timings.contains("train")) in.nagan_train_seconds = ctx.timings["train"].get<double>();

    std::vector<baselines::SearchOutcome> outcomes;
    const auto table = compare_baselines(in, &outcomes);
    write_file_atomic(ctx.path(artifacts::comparison_csv), comparison_csv(table));
    write_file_atomic(ctx.path(artifacts::comparison_text), comparison_text(table));
    std::string logs;
    for (const auto& o : outcomes) {
        json j = baselines::outcome_json(o, false);
        j["config_digest"] = ctx.digest;
        logs += j.dump() + "\n";
    }
    write_file_atomic(ctx.path(artifacts::baseline_logs), logs);
    return {artifacts::comparison_csv, artifacts::comparison_text, artifacts::baseline_logs};
}

Outputs stage_report(Context& ctx) {
    const json corpus = read_json(ctx.path(artifacts::corpus_summary));
    const json enc = read_json(ctx.path(artifacts::encoder_report));
    const json sw = read_json(ctx.path(artifacts::sweep));
    const json par = read_json(ctx.path(artifacts::pareto));
    const std::string table = read_file(ctx.path(artifacts::comparison_csv));

    // Timing-free copy of the comparison table.
    json rows = json::array();
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() >= 4) rows.push_back({{"method", cells[0]}, {"best_objective", cells[1]},
                                               {"best_performance", cells[2]}, {"evaluations", cells[3]}});
    }

    json summary{{"name", ctx.cfg.name},
                 {"config_digest", ctx.digest},
                 {"corpus", corpus},
                 {"encoder_holdout_mae", enc["holdout_mae"]},
                 {"mdist_f", sw["mdist_f"]},
                 {"mdist_r", sw["mdist_r"]},
                 {"pareto", par},
                 {"comparison", rows}};
    if (!sw["mdist_r"].is_null()) summary["mdist_f_below_mdist_r"] = sw["f_below_r"];
    write_file_atomic(ctx.path(artifacts::summary), dump(summary));

    std::ostringstream t;
    t << "experiment " << ctx.cfg.name << " (config " << ctx.digest << ")\n";
    t << "corpus: " << corpus["records"] << " records, " << corpus["diverged"] << " diverged, "
      << corpus["deciles_covered"] << "/10 condition deciles covered\n";
    t << "encoder holdout MAE: " << fixed(enc["holdout_mae"].get<double>(), 4) << "\n";
    t << "mdist_f: " << fixed(sw["mdist_f"].get<double>(), 4) << "\n";
    if (sw["mdist_r"].is_null()) {
        t << "mdist_r: not computed (enable metric.real_eval or pass --real-eval)\n";
    } else {
        t << "mdist_r: " << fixed(sw["mdist_r"].get<double>(), 4)
          << (sw["f_below_r"].get<bool>() ? "  (mdist_f <= mdist_r)" : "  (mdist_f > mdist_r)") << "\n";
    }
    t << "pareto sweep: " << par["chosen"] << " chosen, " << par["distinct_storage_norm"]
      << " distinct storage values, " << par["frontier_points"] << " frontier points\n";
    t << "comparison (timings in " << artifacts::comparison_text << "):\n";
    for (const auto& r : rows)
        t << "  " << r["method"].get<std::string>() << ": objective " << r["best_objective"].get<std::string>()
          << ", evaluations " << r["evaluations"].get<std::string>() << "\n";
    write_file_atomic(ctx.path(artifacts::summary_text), t.str());
    return {artifacts::summary, artifacts::summary_text};
}

using StageFn = Outputs (*)(Context&);

StageFn stage_fn(std::string_view s) {
    if (s == "datagen") return stage_datagen;
    if (s == "encoder") return stage_encoder;
    if (s == "train") return stage_train;
    if (s == "sweep") return stage_sweep;
    if (s == "select") return stage_select;
    if (s == "baseline") return stage_baseline;
    return stage_report;
}

// Config inputs per stage; upstream keys and output digests are added on top.
json stage_config(const ExperimentConfig& cfg, std::string_view stage) {
    const json full = to_json(cfg);
    const json& n = full.at("nagan");
    if (stage == "datagen")
        return {full.at("task"), full.at("space"), full.at("corpus").at("records"), full.at("candidate"), full.at("energy"),
                cfg.master_seed};
    if (stage == "encoder")
        return {n.at("encoder_hidden"), n.at("encoder_epochs"), n.at("encoder_batch"), n.at("encoder_learning_rate"),
                cfg.nagan.seed};
    if (stage == "train") return {n, cfg.nagan.seed};
    if (stage == "sweep") return {full.at("metric"), full.at("candidate"), full.at("energy"), cfg.master_seed};
    if (stage == "select") return {full.at("inag"), full.at("metric"), full.at("energy"), cfg.master_seed};
    if (stage == "baseline")
        return {full.at("baselines"), full.at("inag"), full.at("metric").at("p_r"), full.at("candidate"), full.at("energy"),
                cfg.master_seed};
    return {full.at("name")};
}

// Transitive closure of `target` plus itself, in kStages order.
std::vector<std::string_view> plan(const std::optional<std::string>& target) {
    if (!target) return {kStages.begin(), kStages.end()};
    std::set<std::string_view> need{*target};
    for (auto it = kStages.rbegin(); it != kStages.rend(); ++it)
        if (need.contains(*it))
            for (auto up : stage_inputs(*it)) need.insert(up);
    std::vector<std::string_view> out;
    for (auto s : kStages)
        if (need.contains(s)) out.push_back(s);
    return out;
}

bool outputs_intact(const fs::path& dir, const json& entry) {
    if (!entry.contains("outputs")) return false;
    for (const auto& [name, digest] : entry["outputs"].items()) {
        std::error_code ec;
        if (!fs::exists(dir / name, ec)) return false;
        if (digest_hex(read_file(dir / name)) != digest.get<std::string>()) return false;
    }
    return true;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& base_cfg, const RunOptions& opts) {
    if (opts.stage && !is_stage(*opts.stage)) throw ConfigError("unknown stage '" + *opts.stage + "'");
    const ExperimentConfig cfg = apply_options(base_cfg, opts);
    RunResult result;
    result.directory = cfg.output_dir;
    result.config_digest = config_digest(cfg);
    fs::create_directories(result.directory);

    Context ctx{cfg, result.directory, result.config_digest, opts.log, json::object(), {}, {}};
    const fs::path manifest_path = ctx.path(artifacts::manifest);
    const fs::path timings_path = ctx.path(artifacts::timings);
    json manifest;
    if (fs::exists(manifest_path)) {
        try {
            manifest = json::parse(read_file(manifest_path));
        } catch (const json::exception&) {
            manifest = json::object();
        }
    }
    if (!manifest.is_object() || manifest.value("format", "") != "inag-manifest") {
        manifest = {{"format", "inag-manifest"}, {"version", 1}, {"stages", json::object()}};
    }
    manifest["config_digest"] = result.config_digest;
    if (fs::exists(timings_path)) {
        try {
            ctx.timings = json::parse(read_file(timings_path));
        } catch (const json::exception&) {
            ctx.timings = json::object();
        }
    }
    write_file_atomic(ctx.path(artifacts::config), dump(to_json(cfg)));

    auto say = [&](const std::string& msg) {
        if (opts.log != nullptr) *opts.log << msg << std::endl;
    };

    std::map<std::string, json> done;  // stage -> manifest entry, for stages usable downstream
    for (std::string_view stage_view : plan(opts.stage)) {
        const std::string stage(stage_view);
        StageOutcome outcome;
        outcome.stage = stage;

        json key_src{{"stage", stage}, {"config", stage_config(cfg, stage)}, {"upstream", json::object()}};
        bool blocked = false;
        for (auto up : stage_inputs(stage)) {
            const auto it = done.find(std::string(up));
            if (it == done.end()) {
                blocked = true;
                break;
            }
            key_src["upstream"][std::string(up)] = {{"key", it->second["key"]}, {"outputs", it->second["outputs"]}};
        }
        if (blocked) {
            outcome.status = StageStatus::blocked;
            outcome.message = "an upstream stage did not complete";
            manifest["stages"][stage] = {{"status", "blocked"}, {"message", outcome.message}};
            write_file_atomic(manifest_path, dump(manifest));
            say("[" + stage + "] blocked");
            result.stages.push_back(outcome);
            continue;
        }
        const std::string key = digest_hex(key_src.dump());

        const json& prev = manifest["stages"].contains(stage) ? manifest["stages"][stage] : json::object();
        if (prev.value("status", "") == "complete" && prev.value("key", "") == key && outputs_intact(ctx.dir, prev)) {
            outcome.status = StageStatus::reused;
            done[stage] = prev;
            say("[" + stage + "] reused");
            result.stages.push_back(outcome);
            continue;
        }

        say("[" + stage + "] running");
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Outputs outputs = stage_fn(stage)(ctx);
            outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            json entry{{"status", "complete"}, {"key", key}, {"outputs", json::object()}};
            for (const auto& name : outputs) entry["outputs"][name] = digest_hex(read_file(ctx.path(name.c_str())));
            manifest["stages"][stage] = entry;
            done[stage] = entry;
            outcome.status = StageStatus::complete;
            ctx.timings[stage] = outcome.seconds;
            say("[" + stage + "] complete (" + fixed(outcome.seconds, 1) + " s)");
        } catch (const std::exception& e) {
            outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            outcome.status = StageStatus::failed;
            outcome.message = e.what();
            manifest["stages"][stage] = {{"status", "failed"}, {"key", key}, {"message", outcome.message}};
            say("[" + stage + "] failed: " + outcome.message);
        }
        write_file_atomic(manifest_path, dump(manifest));
        write_file_atomic(timings_path, dump(ctx.timings));
        result.stages.push_back(outcome);
    }
    return result;
}

}  // namespace inag::bench
