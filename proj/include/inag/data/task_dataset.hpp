#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "inag/nn/matrix.hpp"
#include "inag/space/search_space.hpp"

namespace inag::data {

struct NormalizationStats {
    std::vector<double> feature_mean;
    std::vector<double> feature_std;  // divisor actually used (1 for zero-variance columns)
    double target_min = 0.0;
    double target_max = 1.0;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Features and targets ready for training. Regression targets are a single
/// column scaled with the train split's min/max; classification targets are
/// one-hot rows. Normalization statistics come from the train split only.
struct TaskDataset {
    std::string name;
    space::TaskKind kind = space::TaskKind::regression;
    nn::Matrix features;  // [n x d], normalized
    nn::Matrix targets;   // [n x 1] or [n x k]
    Split split;
    NormalizationStats stats;
    std::uint64_t split_seed = 0;
    std::size_t dropped_rows = 0;

    [[nodiscard]] std::size_t size() const { return features.rows(); }
    [[nodiscard]] std::size_t input_dim() const { return features.cols(); }
    [[nodiscard]] std::size_t output_dim() const { return targets.cols(); }
};

/// Deterministic train/test split: a pure function of (n, seed). The train
/// share is round(0.8 n), kept within [1, n-1] for n >= 2.
Split make_split(std::size_t n, std::uint64_t seed, double train_fraction = 0.8);

/// Builds a regression dataset from raw columns: z-scores features and
/// min-max scales the target using train-split statistics. A zero standard
/// deviation (or zero target range) uses a unit divisor.
TaskDataset make_regression_dataset(std::string name, const nn::Matrix& raw_features,
                                    const std::vector<double>& raw_targets, std::uint64_t split_seed);

/// Classification dataset; features are used as given (already scaled).
TaskDataset make_classification_dataset(std::string name, nn::Matrix features, const std::vector<int>& labels,
                                        std::size_t classes, std::uint64_t split_seed);

}  // namespace inag::data
