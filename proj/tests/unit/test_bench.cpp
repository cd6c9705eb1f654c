#include <filesystem>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "inag/bench/config.hpp"
#include "inag/bench/experiment.hpp"
#include "inag/bench/metric.hpp"
#include "inag/bench/report.hpp"
#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "selection_oracle.hpp"

using namespace inag;
using namespace inag::bench;
namespace fs = std::filesystem;

namespace {

const space::SearchSpace kSpace = space::SearchSpace::desk_default();

// Emits a fixed descriptor; the tester decides the "performance".
select::BagSource fixed_source() {
    return [](double, std::size_t n, std::uint64_t) {
        return std::vector<space::ArchDescriptor>(n, space::minimal_descriptor(kSpace));
    };
}

EvalTester constant_tester(double v) {
    return [v](const std::vector<space::ArchDescriptor>& bag, std::uint64_t) {
        return std::vector<Evaluation>(bag.size(), Evaluation{v, false});
    };
}

// A source that encodes the condition into the first width code so a tester
// can echo the condition back.
select::BagSource condition_source() {
    return [](double c, std::size_t n, std::uint64_t) {
        auto d = space::minimal_descriptor(kSpace);
        d.layers[0].width = static_cast<int>(std::lround(c * 100.0));
        return std::vector<space::ArchDescriptor>(n, d);
    };
}

EvalTester echo_tester() {
    return [](const std::vector<space::ArchDescriptor>& bag, std::uint64_t) {
        std::vector<Evaluation> out;
        for (const auto& d : bag) out.push_back({d.layers[0].width / 100.0, false});
        return out;
    };
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("inag_bench_" + name);
    fs::remove_all(p);
    return p;
}

// Small enough to run the whole pipeline in a few seconds.
ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig c;
    c.name = "tiny";
    c.task.synthetic.n_points = 64;
    c.space.layer_count = 2;
    c.space.width_options = {4, 8, 16};
    c.space.bit_options = {4, 8};
    c.corpus_records = 60;
    c.candidate.max_epochs = 3;
    c.nagan.iterations = 40;
    c.nagan.encoder_epochs = 10;
    c.nagan.generator_hidden = {8};
    c.nagan.discriminator_hidden = {8};
    c.nagan.encoder_hidden = {8};
    c.nagan.batch_size = 16;
    c.inag.bag_size = 20;
    c.inag.scenarios = {{"loose", 0.5, {}}};
    c.baselines.ga.population = 6;
    c.baselines.ga.generations = 3;
    c.baselines.bo.initial_samples = 4;
    c.baselines.bo.iterations = 4;
    c.baselines.bo.random_candidates = 64;
    c.metric.bag_size = 10;
    c.output_dir = out.string();
    c.master_seed = 11;
    return parse_experiment_config(to_json(c));
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_file(e.path());
    return files;
}

}  // namespace

TEST_CASE("mdist of a perfect generator is zero") {
    const auto s = mdist(condition_source(), echo_tester(), MetricConfig{}, 1);
    CHECK(s.mdist == doctest::Approx(0.0));
    CHECK(s.points.size() == 10);
}

TEST_CASE("mdist with a constant tester") {
    MetricConfig m;
    m.bag_size = 5;
    CHECK(mdist(fixed_source(), constant_tester(0.5), m, 1).mdist == doctest::Approx(0.25));
    m.p_r = 2.0;
    CHECK(mdist(fixed_source(), constant_tester(0.5), m, 1).mdist == doctest::Approx(0.125));
}

TEST_CASE("mdist aggregates equal recomputed per-point means") {
    SeedStream rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
        MetricConfig m;
        m.bag_size = 1 + rng.index(30);
        const EvalTester noisy = [](const std::vector<space::ArchDescriptor>& bag, std::uint64_t seed) {
            SeedStream r(seed, 1);
            std::vector<Evaluation> out;
            for (std::size_t i = 0; i < bag.size(); ++i) out.push_back({r.uniform(), r.uniform() < 0.1});
            return out;
        };
        const auto limit = rng.index(4);
        const auto s = mdist(fixed_source(), noisy, m, rng.next_u64(), limit);
        double sum = 0.0;
        std::size_t div = 0;
        for (const auto& p : s.points) {
            sum += p.mean_dist;
            div += p.divergences;
            CHECK(p.samples == (limit == 0 ? m.bag_size : std::min(limit, m.bag_size)));
        }
        CHECK(s.mdist == doctest::Approx(sum / 10.0));
        CHECK(s.divergences == div);
    }
}

TEST_CASE("mdist is reproducible from its seed") {
    const EvalTester noisy = [](const std::vector<space::ArchDescriptor>& bag, std::uint64_t seed) {
        SeedStream r(seed, 1);
        std::vector<Evaluation> out(bag.size());
        for (auto& e : out) e.performance = r.uniform();
        return out;
    };
    MetricConfig m;
    m.bag_size = 7;
    CHECK(mdist(fixed_source(), noisy, m, 9).mdist == mdist(fixed_source(), noisy, m, 9).mdist);
    CHECK(mdist(fixed_source(), noisy, m, 9).mdist != mdist(fixed_source(), noisy, m, 10).mdist);
}

TEST_CASE("sweep computes mdist_r only when asked") {
    MetricConfig m;
    m.bag_size = 4;
    const auto real = constant_tester(0.5);
    auto r = sweep(condition_source(), echo_tester(), &real, m, 1, "abc");
    CHECK_FALSE(r.mdist_r().has_value());
    m.real_eval = true;
    r = sweep(condition_source(), echo_tester(), &real, m, 1, "abc");
    REQUIRE(r.mdist_r().has_value());
    CHECK(*r.mdist_r() == doctest::Approx(0.25));
    CHECK(r.real->points.front().samples == 3);
    const auto j = to_json_report(r);
    CHECK(j["config_digest"] == "abc");
    CHECK(j["f_below_r"] == true);
}

TEST_CASE("MetricConfig validation") {
    MetricConfig m;
    m.p_r = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.grid = {0.2, 0.1};
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m.grid = {0.5, 1.5};
    CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("experiment config rejects unknown keys and derived seeds") {
    const auto good = to_json(tiny_config("/tmp/x"));
    CHECK_NOTHROW(parse_experiment_config(good));

    auto j = good;
    j["bogus"] = 1;
    CHECK_THROWS_WITH_AS(parse_experiment_config(j), doctest::Contains("bogus"), ConfigError);
    j = good;
    j["nagan"]["latent"] = 3;
    CHECK_THROWS_WITH_AS(parse_experiment_config(j), doctest::Contains("nagan.latent"), ConfigError);
    j = good;
    j["inag"]["scenarios"][0]["constraints"]["max_flops"] = 1;
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    j = good;
    j["nagan"]["seed"] = 5;
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
    j = good;
    j["corpus"]["records"] = "many";
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
}

TEST_CASE("config round trip and digest") {
    const auto a = tiny_config("/tmp/a");
    const auto b = parse_experiment_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    CHECK(config_digest(a) == config_digest(b));

    auto moved = a;
    moved.output_dir = "/elsewhere";
    moved.parallelism = 4;
    CHECK(config_digest(moved) == config_digest(a));

    auto j = to_json(a);
    j["master_seed"] = 12;
    const auto reseeded = parse_experiment_config(j);
    CHECK(config_digest(reseeded) != config_digest(a));
    CHECK(reseeded.nagan.seed != a.nagan.seed);
    CHECK(reseeded.baselines.ga.seed != a.baselines.ga.seed);
}

TEST_CASE("scatter of no candidates is a header-only file") {
    const auto dir = scratch("scatter_empty");
    emit_scatter({}, dir / "s.tsv");
    const auto text = read_file(dir / "s.tsv");
    CHECK(text == "condition\tperformance\tstorage_norm\tenergy_norm\tpareto\tdescriptor\n");
    CHECK(parse_scatter(text).empty());
    fs::remove_all(dir);
}

TEST_CASE("scatter round trip and pareto flags match the oracle") {
    SeedStream rng(21, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto bag = testing::random_bag(rng, kSpace, 1 + rng.index(60));
        std::vector<double> conds(bag.size());
        for (auto& c : conds) c = rng.uniform();
        const auto rows = scatter_rows(conds, bag);
        REQUIRE(rows.size() == bag.size());
        std::vector<select::ObjectivePoint> pts;
        for (const auto& c : bag) pts.push_back({c.predicted, c.storage_norm});
        const auto oracle = testing::pareto_oracle(pts);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].pareto == oracle[i]);
            CHECK(rows[i].descriptor == bag[i].descriptor);
        }
        CHECK(parse_scatter(scatter_to_string(rows)) == rows);
    }
}

TEST_CASE("parse_scatter reports the failing line") {
    const std::string bad = "condition\tperformance\tstorage_norm\tenergy_norm\tpareto\tdescriptor\n0.1\tx\n";
    CHECK_THROWS_WITH_AS(parse_scatter(bad), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("emit_scatter to an unwritable path") {
    CHECK_THROWS(emit_scatter({}, "/proc/definitely/not/here.tsv"));
}

TEST_CASE("comparison table rows and determinism") {
    const auto s = space::SearchSpace::desk_default();
    ComparisonInputs in;
    in.problem.space = s;
    in.problem.evaluator = [](const space::ArchDescriptor& d) {
        return 1.0 / (1.0 + static_cast<double>(d.layers[0].width));
    };
    in.ga.population = 8;
    in.ga.generations = 4;
    in.ga.seed = 3;
    in.bo.initial_samples = 4;
    in.bo.iterations = 4;
    in.bo.random_candidates = 64;
    in.bo.seed = 4;
    in.source = [s](double, std::size_t n, std::uint64_t seed) {
        SeedStream r(seed, 0);
        std::vector<space::ArchDescriptor> bag;
        for (std::size_t i = 0; i < n; ++i) bag.push_back(space::sample_uniform(s, r));
        return bag;
    };
    in.tester = [](const std::vector<space::ArchDescriptor>& bag) { return std::vector<double>(bag.size(), 0.6); };
    in.condition = 0.6;
    in.inag.bag_size = 20;
    in.inag.seed = 5;
    in.nagan_train_seconds = 12.5;

    for (const auto& methods : std::vector<std::vector<std::string>>{{"inag"}, {"ga", "bo"}, {"inag", "ga", "bo"}}) {
        in.methods = methods;
        const auto t = compare_baselines(in);
        CHECK(t.rows.size() == methods.size());
        for (std::size_t i = 0; i < methods.size(); ++i) CHECK(t.rows[i].method == methods[i]);
    }
    const auto a = compare_baselines(in);
    const auto b = compare_baselines(in);
    CHECK(comparison_csv(a, false) == comparison_csv(b, false));
    CHECK(comparison_text(a, false) == comparison_text(b, false));
    CHECK(comparison_csv(a).find("wall_seconds") != std::string::npos);
    CHECK(comparison_csv(a, false).find("wall_seconds") == std::string::npos);
    CHECK(comparison_text(a).find("12.5") != std::string::npos);
    CHECK(a.rows[0].evaluations == 20);
}

TEST_CASE("stage planning") {
    CHECK(is_stage("train"));
    CHECK_FALSE(is_stage("plot"));
    CHECK(stage_inputs("datagen").empty());
    CHECK(stage_inputs("report").size() == 5);
    // Every dependency appears earlier in execution order.
    for (std::size_t i = 0; i < kStages.size(); ++i)
        for (auto up : stage_inputs(kStages[i]))
            CHECK(std::find(kStages.begin(), kStages.begin() + i, up) != kStages.begin() + i);
}

TEST_CASE("run_experiment resumes without recomputation") {
    const auto dir = scratch("resume");
    const auto cfg = tiny_config(dir);
    const auto first = run_experiment(cfg);
    REQUIRE(first.ok());
    for (const auto& s : first.stages) CHECK(s.status == StageStatus::complete);
    const auto before = snapshot(dir);

    const auto second = run_experiment(cfg);
    REQUIRE(second.ok());
    for (const auto& s : second.stages) CHECK(s.status == StageStatus::reused);
    auto after = snapshot(dir);
    CHECK(after == before);

    // A damaged output is detected and rebuilt. The rebuilt bytes match, so
    // the report keyed on them is still reused.
    write_file_atomic(dir / artifacts::sweep, "{}");
    const auto third = run_experiment(cfg);
    REQUIRE(third.ok());
    for (const auto& s : third.stages)
        CHECK(s.status == (s.stage == "sweep" ? StageStatus::complete : StageStatus::reused));
    after = snapshot(dir);
    CHECK(after.at(artifacts::sweep) == before.at(artifacts::sweep));
    CHECK(after.at(artifacts::summary) == before.at(artifacts::summary));

    // Changing a downstream-only setting keeps the upstream stages.
    auto j = to_json(cfg);
    j["inag"]["bag_size"] = 15;
    const auto fourth = run_experiment(parse_experiment_config(j));
    REQUIRE(fourth.ok());
    for (const auto& s : fourth.stages) {
        const bool upstream = s.stage == "datagen" || s.stage == "encoder" || s.stage == "train" || s.stage == "sweep";
        CHECK(s.status == (upstream ? StageStatus::reused : StageStatus::complete));
    }
    fs::remove_all(dir);
}

TEST_CASE("run_experiment is reproducible into a fresh directory") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    REQUIRE(run_experiment(tiny_config(a)).ok());
    RunOptions opts;
    opts.output_dir = b.string();
    REQUIRE(run_experiment(tiny_config(a), opts).ok());
    const auto sa = snapshot(a);
    const auto sb = snapshot(b);
    for (const auto& [name, bytes] : sa) {
        if (name == artifacts::manifest || name == artifacts::timings || name == artifacts::config ||
            name == artifacts::comparison_csv || name == artifacts::comparison_text ||
            name.ends_with(".timings"))
            continue;
        INFO(name);
        CHECK(sb.at(name) == bytes);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("a corpus of one record fails at the encoder stage") {
    const auto dir = scratch("one");
    auto j = to_json(tiny_config(dir));
    j["corpus"]["records"] = 1;
    const auto r = run_experiment(parse_experiment_config(j));
    CHECK_FALSE(r.ok());
    REQUIRE(r.stages.size() == kStages.size());
    CHECK(r.stages[0].status == StageStatus::complete);
    CHECK(r.stages[1].status == StageStatus::failed);
    CHECK(r.stages[1].message.find("too small") != std::string::npos);
    for (std::size_t i = 2; i < r.stages.size(); ++i) CHECK(r.stages[i].status == StageStatus::blocked);
    const auto manifest = nlohmann::json::parse(read_file(dir / artifacts::manifest));
    CHECK(manifest["stages"]["encoder"]["status"] == "failed");
    CHECK(manifest["stages"]["train"]["status"] == "blocked");

    // A single stage request only runs what it needs.
    RunOptions opts;
    opts.stage = "datagen";
    const auto again = run_experiment(parse_experiment_config(j), opts);
    REQUIRE(again.stages.size() == 1);
    CHECK(again.stages[0].status == StageStatus::reused);
    fs::remove_all(dir);
}

TEST_CASE("shipped configs parse") {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(INAG_SOURCE_DIR "/configs")) {
        if (e.path().extension() != ".json") continue;
        INFO(e.path().string());
        CHECK_NOTHROW(load_experiment_config(e.path()));
        ++n;
    }
    CHECK(n >= 4);
    const auto ref = load_experiment_config(INAG_SOURCE_DIR "/configs/reg_a.json");
    CHECK(ref.task.kind == "data_a");
    CHECK(ref.corpus_records == 1000);
    CHECK(ref.metric.real_eval);
    CHECK(ref.metric.real_eval_per_point == 3);
}
