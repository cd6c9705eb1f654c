#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inag/bench/config.hpp"

namespace inag::bench {

/// Pipeline stages in execution order. Dependencies:
///   datagen -> encoder -> train -> {sweep, select, baseline} -> report
inline constexpr std::array<std::string_view, 7> kStages{"datagen", "encoder", "train", "sweep",
                                                         "select",  "baseline", "report"};

bool is_stage(std::string_view name);
/// Direct upstream stages of `stage`.
std::vector<std::string_view> stage_inputs(std::string_view stage);

struct RunOptions {
    /// Run only this stage and whatever it (transitively) needs.
    std::optional<std::string> stage;
    /// Turn on mdist_r for the sweep regardless of the config.
    bool real_eval = false;
    std::optional<std::size_t> parallelism;
    std::optional<std::string> output_dir;
    std::ostream* log = nullptr;
};

enum class StageStatus { complete, reused, failed, blocked };
std::string_view to_string(StageStatus s);

struct StageOutcome {
    std::string stage;
    StageStatus status = StageStatus::complete;
    std::string message;
    double seconds = 0.0;
};

struct RunResult {
    std::filesystem::path directory;
    std::string config_digest;
    std::vector<StageOutcome> stages;
    [[nodiscard]] bool ok() const;
};

/// Applies RunOptions overrides to a config (output_dir, parallelism,
/// real_eval).
ExperimentConfig apply_options(ExperimentConfig cfg, const RunOptions& opts);

/// Runs the pipeline into cfg.output_dir. Each stage records a key derived
/// from its config inputs and upstream keys, plus digests of its output
/// files, in manifest.json. A stage whose key and outputs still match is
/// reused, never recomputed. A failing stage is marked failed and its
/// dependents blocked; rerunning resumes from there. Wall-clock times go
/// to timings.json, keeping every other artifact deterministic.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* timings = "timings.json";
inline constexpr const char* config = "config.json";
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* corpus_summary = "corpus_summary.json";
inline constexpr const char* encoder = "encoder.ckpt";
inline constexpr const char* encoder_report = "encoder_report.json";
inline constexpr const char* bundle = "nagan.bundle";
inline constexpr const char* trace = "nagan_trace.csv";
inline constexpr const char* sweep = "sweep.json";
inline constexpr const char* selections = "selections.jsonl";
inline constexpr const char* selections_text = "selections.txt";
inline constexpr const char* scatter_chosen = "scatter_chosen.tsv";
inline constexpr const char* scatter_bag = "scatter_bag.tsv";
inline constexpr const char* pareto = "pareto.json";
inline constexpr const char* comparison_csv = "comparison.csv";
inline constexpr const char* comparison_text = "comparison.txt";
inline constexpr const char* baseline_logs = "baseline_logs.jsonl";
inline constexpr const char* summary = "summary.json";
inline constexpr const char* summary_text = "summary.txt";
}  // namespace artifacts

}  // namespace inag::bench
