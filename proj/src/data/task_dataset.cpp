#include "inag/data/task_dataset.hpp"

#include <algorithm>
#include <cmath>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"

namespace inag::data {

Split make_split(std::size_t n, std::uint64_t seed, double train_fraction) {
    if (n < 2) throw ConfigError("a train/test split needs at least 2 rows");
    SeedStream stream(seed, 0x5b11);
    const auto perm = random_permutation(stream, n);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

TaskDataset make_regression_dataset(std::string name, const nn::Matrix& raw_features,
                                    const std::vector<double>& raw_targets, std::uint64_t split_seed) {
    const std::size_t n = raw_features.rows();
    if (raw_targets.size() != n) throw ShapeError("feature and target row counts differ");
    TaskDataset ds;
    ds.name = std::move(name);
    ds.kind = space::TaskKind::regression;
    ds.split_seed = split_seed;
    ds.split = make_split(n, split_seed);

    const std::size_t d = raw_features.cols();
    const auto& train = ds.split.train;
    const double m = static_cast<double>(train.size());
    ds.stats.feature_mean.assign(d, 0.0);
    ds.stats.feature_std.assign(d, 1.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r : train) sum += raw_features(r, c);
        const double mean = sum / m;
        double var = 0.0;
        for (std::size_t r : train) var += (raw_features(r, c) - mean) * (raw_features(r, c) - mean);
        const double sd = std::sqrt(var / m);
        ds.stats.feature_mean[c] = mean;
        ds.stats.feature_std[c] = sd > 0.0 ? sd : 1.0;
    }
    double lo = raw_targets[train.front()];
    double hi = lo;
    for (std::size_t r : train) {
        lo = std::min(lo, raw_targets[r]);
        hi = std::max(hi, raw_targets[r]);
    }
    ds.stats.target_min = lo;
    ds.stats.target_max = hi;
    const double range = hi > lo ? hi - lo : 1.0;

    ds.features = nn::Matrix(n, d);
    ds.targets = nn::Matrix(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            ds.features(r, c) = (raw_features(r, c) - ds.stats.feature_mean[c]) / ds.stats.feature_std[c];
        }
        ds.targets(r, 0) = (raw_targets[r] - lo) / range;
    }
    return ds;
}

TaskDataset make_classification_dataset(std::string name, nn::Matrix features, const std::vector<int>& labels,
                                        std::size_t classes, std::uint64_t split_seed) {
    const std::size_t n = features.rows();
    if (labels.size() != n) throw ShapeError("feature and label row counts differ");
    TaskDataset ds;
    ds.name = std::move(name);
    ds.kind = space::TaskKind::classification;
    ds.split_seed = split_seed;
    ds.split = make_split(n, split_seed);
    ds.stats.feature_mean.assign(features.cols(), 0.0);
    ds.stats.feature_std.assign(features.cols(), 1.0);
    ds.targets = nn::Matrix(n, classes);
    for (std::size_t r = 0; r < n; ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
            throw DomainError("label " + std::to_string(labels[r]) + " outside [0," + std::to_string(classes) + ")");
        }
        ds.targets(r, static_cast<std::size_t>(labels[r])) = 1.0;
    }
    ds.features = std::move(features);
    return ds;
}

}  // namespace inag::data
