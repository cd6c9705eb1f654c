#include "inag/bench/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>

#include "inag/common/error.hpp"
#include "inag/common/io.hpp"
#include "inag/common/rng.hpp"
#include "inag/data/ingest.hpp"

namespace inag::bench {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> known) {
    if (!j.is_object()) throw ConfigError("'" + std::string(section) + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown key '" + std::string(section) + "." + key + "'");
        }
    }
}

TaskConfig parse_task(const json& j) {
    require_keys(j, "task", {"kind", "synthetic", "csv", "idx"});
    TaskConfig t;
    t.kind = j.value("kind", t.kind);
    if (j.contains("synthetic")) t.synthetic = j.at("synthetic").get<data::SyntheticTaskSpec>();
    if (j.contains("csv")) {
        const auto& c = j.at("csv");
        require_keys(c, "task.csv", {"path", "target"});
        t.csv_path = c.at("path").get<std::string>();
        t.csv_target = c.at("target").get<std::string>();
    }
    if (j.contains("idx")) {
        const auto& c = j.at("idx");
        require_keys(c, "task.idx", {"images", "labels", "limit", "classes"});
        t.idx_images = c.at("images").get<std::string>();
        t.idx_labels = c.at("labels").get<std::string>();
        t.idx_limit = c.value("limit", std::size_t{0});
        t.idx_classes = c.value("classes", std::size_t{10});
    }
    return t;
}

json task_json(const TaskConfig& t) {
    json j{{"kind", t.kind}};
    if (t.kind == "data_a" || t.kind == "data_b" || t.kind == "polynomial") {
        json s = t.synthetic;
        s.erase("seed");
        j["synthetic"] = s;
    } else if (t.kind == "csv") {
        j["csv"] = {{"path", t.csv_path}, {"target", t.csv_target}};
    } else if (t.kind == "idx") {
        j["idx"] = {{"images", t.idx_images}, {"labels", t.idx_labels}, {"limit", t.idx_limit},
                    {"classes", t.idx_classes}};
    }
    return j;
}

Scenario parse_scenario(const json& j) {
    require_keys(j, "inag.scenarios[]", {"name", "condition", "constraints"});
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.condition = j.value("condition", s.condition);
    if (j.contains("constraints")) s.constraints = j.at("constraints").get<select::ConstraintSet>();
    return s;
}

InagSection parse_inag(const json& j) {
    require_keys(j, "inag", {"bag_size", "step", "c_min", "criterion", "scenarios", "pareto_criterion",
                             "pareto_max_dist"});
    InagSection s;
    s.bag_size = j.value("bag_size", s.bag_size);
    s.step = j.value("step", s.step);
    s.c_min = j.value("c_min", s.c_min);
    if (j.contains("criterion")) s.criterion = select::criterion_from_string(j.at("criterion").get<std::string>());
    if (j.contains("pareto_criterion"))
        s.pareto_criterion = select::criterion_from_string(j.at("pareto_criterion").get<std::string>());
    s.pareto_max_dist = j.value("pareto_max_dist", s.pareto_max_dist);
    if (j.contains("scenarios"))
        for (const auto& sc : j.at("scenarios")) s.scenarios.push_back(parse_scenario(sc));
    return s;
}

BaselineSection parse_baselines(const json& j) {
    require_keys(j, "baselines", {"methods", "condition", "constraints", "ga", "bo", "real_eval"});
    BaselineSection b;
    b.methods = j.value("methods", b.methods);
    b.condition = j.value("condition", b.condition);
    if (j.contains("constraints")) b.constraints = j.at("constraints").get<select::ConstraintSet>();
    if (j.contains("ga")) b.ga = j.at("ga").get<baselines::GaConfig>();
    if (j.contains("bo")) b.bo = j.at("bo").get<baselines::BoConfig>();
    b.real_eval = j.value("real_eval", b.real_eval);
    return b;
}

json scenario_json(const Scenario& s) {
    return {{"name", s.name}, {"condition", s.condition}, {"constraints", s.constraints}};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, SeedTag tag) {
    return SeedStream(master, 0x5eed).split(static_cast<std::uint64_t>(tag)).next_u64();
}

void ExperimentConfig::validate() const {
    if (version != 1) throw ConfigError("unsupported config version " + std::to_string(version));
    if (name.empty()) throw ConfigError("name must not be empty");
    static const char* kinds[] = {"data_a", "data_b", "polynomial", "csv", "idx"};
    if (std::find(std::begin(kinds), std::end(kinds), task.kind) == std::end(kinds))
        throw ConfigError("unknown task kind '" + task.kind + "'");
    if (task.kind == "polynomial" && task.synthetic.coefficients.empty())
        throw ConfigError("task.synthetic.coefficients required for a polynomial task");
    if (task.kind == "csv" && (task.csv_path.empty() || task.csv_target.empty()))
        throw ConfigError("task.csv needs path and target");
    if (task.kind == "idx" && (task.idx_images.empty() || task.idx_labels.empty()))
        throw ConfigError("task.idx needs images and labels");
    space.validate();
    if (corpus_records == 0) throw ConfigError("corpus.records must be >= 1");
    if (parallelism == 0) throw ConfigError("corpus.parallelism must be >= 1");
    if (candidate.max_epochs == 0 || candidate.batch_size == 0) throw ConfigError("candidate budget must be positive");
    if (!(energy.e_ref > 0.0)) throw ConfigError("energy.e_ref must be > 0");
    nagan.validate();
    if (inag.bag_size == 0) throw ConfigError("inag.bag_size must be >= 1");
    if (!(inag.step > 0.0)) throw ConfigError("inag.step must be > 0");
    if (inag.c_min < 0.0 || inag.c_min > 1.0) throw ConfigError("inag.c_min must lie in [0,1]");
    if (inag.pareto_max_dist < 0.0) throw ConfigError("inag.pareto_max_dist must be >= 0");
    for (const auto& s : inag.scenarios) {
        if (s.condition < 0.0 || s.condition > 1.0) throw ConfigError("scenario '" + s.name + "' condition out of [0,1]");
        s.constraints.validate();
    }
    for (const auto& m : baselines.methods)
        if (m != "inag" && m != "ga" && m != "bo") throw ConfigError("unknown baseline method '" + m + "'");
    if (baselines.condition < 0.0 || baselines.condition > 1.0)
        throw ConfigError("baselines.condition must lie in [0,1]");
    baselines.constraints.validate();
    baselines.ga.validate();
    baselines.bo.validate();
    metric.validate();
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig c;
    try {
        for (const char* ptr : {"/nagan/seed", "/task/synthetic/seed", "/baselines/ga/seed", "/baselines/bo/seed"}) {
            if (j.contains(json::json_pointer(ptr)))
                throw ConfigError(std::string(ptr) + " is derived from master_seed and cannot be set");
        }
        require_keys(j, "config", {"version", "name", "task", "space", "corpus", "candidate", "energy", "nagan",
                                   "inag", "baselines", "metric", "output_dir", "master_seed"});
        c.version = j.value("version", c.version);
        c.name = j.value("name", c.name);
        if (j.contains("task")) c.task = parse_task(j.at("task"));
        if (j.contains("space")) c.space = j.at("space").get<space::SearchSpace>();
        if (j.contains("corpus")) {
            const auto& cj = j.at("corpus");
            require_keys(cj, "corpus", {"records", "parallelism"});
            c.corpus_records = cj.value("records", c.corpus_records);
            c.parallelism = cj.value("parallelism", c.parallelism);
        }
        if (j.contains("candidate")) c.candidate = j.at("candidate").get<lab::CandidateTrainConfig>();
        if (j.contains("energy")) c.energy = j.at("energy").get<lab::EnergyModel>();
        if (j.contains("nagan")) c.nagan = j.at("nagan").get<gan::NaganConfig>();
        if (j.contains("inag")) c.inag = parse_inag(j.at("inag"));
        if (j.contains("baselines")) c.baselines = parse_baselines(j.at("baselines"));
        if (j.contains("metric")) c.metric = j.at("metric").get<MetricConfig>();
        c.output_dir = j.value("output_dir", c.output_dir);
        c.master_seed = j.value("master_seed", c.master_seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    // Sub-seeds are not user settable: everything derives from master_seed.
    c.nagan.seed = derive_seed(c.master_seed, SeedTag::nagan);
    c.baselines.ga.seed = derive_seed(c.master_seed, SeedTag::ga);
    c.baselines.bo.seed = derive_seed(c.master_seed, SeedTag::bo);
    c.task.synthetic.seed = derive_seed(c.master_seed, SeedTag::task);
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config '" + path.string() + "': " + e.what());
    }
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_experiment_config(j);
}

json to_json(const ExperimentConfig& c) {
    json nagan = c.nagan;
    nagan.erase("seed");
    json ga = c.baselines.ga;
    ga.erase("seed");
    json bo = c.baselines.bo;
    bo.erase("seed");
    json scenarios = json::array();
    for (const auto& s : c.inag.scenarios) scenarios.push_back(scenario_json(s));
    return {{"version", c.version},
            {"name", c.name},
            {"task", task_json(c.task)},
            {"space", c.space},
            {"corpus", {{"records", c.corpus_records}, {"parallelism", c.parallelism}}},
            {"candidate", c.candidate},
            {"energy", c.energy},
            {"nagan", nagan},
            {"inag",
             {{"bag_size", c.inag.bag_size},
              {"step", c.inag.step},
              {"c_min", c.inag.c_min},
              {"criterion", select::to_string(c.inag.criterion)},
              {"scenarios", scenarios},
              {"pareto_criterion", select::to_string(c.inag.pareto_criterion)},
              {"pareto_max_dist", c.inag.pareto_max_dist}}},
            {"baselines",
             {{"methods", c.baselines.methods},
              {"condition", c.baselines.condition},
              {"constraints", c.baselines.constraints},
              {"ga", ga},
              {"bo", bo},
              {"real_eval", c.baselines.real_eval}}},
            {"metric", c.metric},
            {"output_dir", c.output_dir},
            {"master_seed", c.master_seed}};
}

std::string config_digest(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("output_dir");
    j["corpus"].erase("parallelism");
    return digest_hex(j.dump());
}

data::TaskDataset load_task(const ExperimentConfig& c) {
    const std::uint64_t split_seed = derive_seed(c.master_seed, SeedTag::task);
    if (c.task.kind == "data_a") return data::make_data_a(c.task.synthetic);
    if (c.task.kind == "data_b") return data::make_data_b(c.task.synthetic);
    if (c.task.kind == "polynomial") return data::make_synthetic(c.task.synthetic, "polynomial");
    if (c.task.kind == "csv") return data::load_csv_table(c.task.csv_path, c.task.csv_target, split_seed);
    if (c.task.kind == "idx")
        return data::load_idx_pair(c.task.idx_images, c.task.idx_labels, c.task.idx_limit, c.task.idx_classes,
                                   split_seed);
    throw ConfigError("unknown task kind '" + c.task.kind + "'");
}

space::SearchSpace bind_space(const ExperimentConfig& c, const data::TaskDataset& task) {
    space::SearchSpace s = c.space;
    s.input_dim = task.input_dim();
    s.output_dim = task.output_dim();
    s.task = task.kind;
    s.validate();
    return s;
}

}  // namespace inag::bench
