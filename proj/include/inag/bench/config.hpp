#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "inag/baselines/search.hpp"
#include "inag/bench/metric.hpp"
#include "inag/data/synthetic.hpp"
#include "inag/data/task_dataset.hpp"
#include "inag/gan/nagan.hpp"
#include "inag/lab/analytics.hpp"
#include "inag/lab/candidate.hpp"
#include "inag/select/inag.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::bench {

/// Where the task data comes from.
struct TaskConfig {
    /// data_a, data_b, polynomial (custom coefficients), csv, idx
    std::string kind = "data_a";
    data::SyntheticTaskSpec synthetic;  // data_a, data_b, polynomial; seed is derived
    std::string csv_path;
    std::string csv_target;
    std::string idx_images;
    std::string idx_labels;
    std::size_t idx_limit = 0;
    std::size_t idx_classes = 10;
};

/// One INAG query: target condition plus constraints.
struct Scenario {
    std::string name;
    double condition = 0.8;
    select::ConstraintSet constraints;
};

struct InagSection {
    std::size_t bag_size = 200;
    double step = 0.1;
    double c_min = 0.1;
    select::Criterion criterion = select::Criterion::dist_f;
    std::vector<Scenario> scenarios;
    /// Pareto sweep: one INAG run per metric grid point, chosen by this
    /// criterion among candidates within max_dist of the condition.
    select::Criterion pareto_criterion = select::Criterion::storage;
    double pareto_max_dist = 0.05;
};

struct BaselineSection {
    std::vector<std::string> methods{"inag", "ga", "bo"};
    double condition = 1.0;  // INAG target for the comparison row
    select::ConstraintSet constraints;
    baselines::GaConfig ga;
    baselines::BoConfig bo;
    bool real_eval = false;  // train candidates instead of asking the encoder
};

struct ExperimentConfig {
    int version = 1;
    std::string name = "experiment";
    TaskConfig task;
    space::SearchSpace space = space::SearchSpace::desk_default();
    std::size_t corpus_records = 1000;
    std::size_t parallelism = 1;
    lab::CandidateTrainConfig candidate;
    lab::EnergyModel energy;
    gan::NaganConfig nagan;
    InagSection inag;
    BaselineSection baselines;
    MetricConfig metric;
    std::string output_dir = "runs/experiment";
    std::uint64_t master_seed = 0;

    void validate() const;
};

/// Stream tags for seeds derived from the master seed.
enum class SeedTag : std::uint64_t { task = 1, corpus, nagan, sweep, select, ga, bo, inag_baseline, generate };
std::uint64_t derive_seed(std::uint64_t master, SeedTag tag);

/// Parses and validates; every unknown key anywhere is a ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

/// Digest of everything that affects results (output_dir and parallelism
/// excluded).
std::string config_digest(const ExperimentConfig& c);

/// Builds the task dataset named by the config.
data::TaskDataset load_task(const ExperimentConfig& c);

/// The search space with input/output dims and task kind taken from the
/// dataset.
space::SearchSpace bind_space(const ExperimentConfig& c, const data::TaskDataset& task);

}  // namespace inag::bench
