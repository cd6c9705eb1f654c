#pragma once

#include <cstddef>
#include <cstdint>

#include "inag/data/task_dataset.hpp"
#include "inag/lab/analytics.hpp"
#include "inag/nn/optimizer.hpp"
#include "inag/space/search_space.hpp"
#include "json.hpp"

namespace inag::lab {

struct CandidateTrainConfig {
    std::size_t max_epochs = 150;
    std::size_t batch_size = 32;
    std::size_t patience = 20;  // epochs without a new best training loss
    nn::OptimizerSettings optimizer = nn::OptimizerSettings::candidate_default();
    bool quantize = true;
    std::uint64_t seed = 0;
};

struct CandidateResult {
    space::ArchDescriptor descriptor;
    double performance = 0.0;  // normalized, in [0,1]
    double raw_metric = 0.0;   // R^2 (regression) or accuracy
    double train_seconds = 0.0;
    std::size_t epochs_run = 0;
    bool diverged = false;
    NetworkAnalytics analytics;
};

/// Regression: clamp(R^2, 0, 1). Classification: accuracy as is.
/// Throws DomainError on NaN.
double normalize_performance(double raw, space::TaskKind kind);

/// Coefficient of determination of predictions against targets.
double r_squared(const nn::Matrix& predictions, const nn::Matrix& targets);
double accuracy(const nn::Matrix& logits, const nn::Matrix& one_hot);

/// Trains the described network on the task's train split with fake-quantized
/// weights and activations (straight-through gradients) and scores it on the
/// test split. Non-finite losses mark the result diverged with performance 0.
CandidateResult train_candidate(const space::ArchDescriptor& d, const space::SearchSpace& space,
                                const data::TaskDataset& task, const CandidateTrainConfig& cfg,
                                const EnergyModel& energy = {});

void to_json(nlohmann::json& j, const CandidateTrainConfig& c);
void from_json(const nlohmann::json& j, CandidateTrainConfig& c);

}  // namespace inag::lab
