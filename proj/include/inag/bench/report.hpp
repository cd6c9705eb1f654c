#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "inag/baselines/search.hpp"
#include "inag/select/inag.hpp"

namespace inag::bench {

/// One point of a Pareto scatter: tab-separated columns
/// condition, performance, storage_norm, energy_norm, pareto, descriptor.
struct ScatterRow {
    double condition = 0.0;
    double performance = 0.0;
    double storage_norm = 0.0;
    double energy_norm = 0.0;
    bool pareto = false;
    space::ArchDescriptor descriptor;
    friend bool operator==(const ScatterRow&, const ScatterRow&) = default;
};

/// Rows in the given order; pareto flags recomputed over (performance up,
/// storage_norm down) across all rows.
std::vector<ScatterRow> scatter_rows(const std::vector<double>& conditions,
                                     const std::vector<select::AnnotatedCandidate>& candidates);

std::string scatter_to_string(const std::vector<ScatterRow>& rows);
std::vector<ScatterRow> parse_scatter(const std::string& text);
/// Header plus one row per candidate; throws on an unwritable path.
void emit_scatter(const std::vector<ScatterRow>& rows, const std::filesystem::path& path);

struct ComparisonRow {
    std::string method;
    std::optional<space::ArchDescriptor> best;
    std::optional<double> best_objective;
    std::optional<double> best_performance;
    std::size_t evaluations = 0;
    double wall_seconds = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::vector<std::string> footnotes;
};

struct ComparisonInputs {
    std::vector<std::string> methods;  // subset of inag, ga, bo, in output order
    baselines::SearchProblem problem;
    baselines::GaConfig ga;
    baselines::BoConfig bo;
    // INAG row
    select::BagSource source;
    select::Tester tester;
    double condition = 1.0;
    select::InagConfig inag;
    std::optional<double> nagan_train_seconds;
};

/// One row per enabled method under identical constraints and evaluator.
/// INAG's wall time covers generation and selection only; the NAGAN
/// training time goes in a footnote. INAG's objective is the penalized
/// objective of its chosen candidate, using the GA's initial mu.
ComparisonTable compare_baselines(const ComparisonInputs& in, std::vector<baselines::SearchOutcome>* outcomes = nullptr);

std::string comparison_csv(const ComparisonTable& t, bool include_timing = true);
std::string comparison_text(const ComparisonTable& t, bool include_timing = true);

}  // namespace inag::bench
