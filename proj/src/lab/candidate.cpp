#include "inag/lab/candidate.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"
#include "inag/lab/quantize.hpp"

namespace inag::lab {

double normalize_performance(double raw, space::TaskKind kind) {
    if (std::isnan(raw)) throw DomainError("raw metric is NaN");
    if (kind == space::TaskKind::regression) return std::clamp(raw, 0.0, 1.0);
    return raw;
}

double r_squared(const nn::Matrix& predictions, const nn::Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols() || targets.empty()) {
        throw ShapeError("r_squared shape mismatch");
    }
    double mean = 0.0;
    for (double t : targets.values()) mean += t;
    mean /= static_cast<double>(targets.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double t = targets.values()[i];
        const double e = predictions.values()[i] - t;
        ss_res += e * e;
        ss_tot += (t - mean) * (t - mean);
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

double accuracy(const nn::Matrix& logits, const nn::Matrix& one_hot) {
    if (logits.rows() != one_hot.rows() || logits.cols() != one_hot.cols() || logits.rows() == 0) {
        throw ShapeError("accuracy shape mismatch");
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        const auto truth = one_hot.row(r);
        const auto pred = std::max_element(row.begin(), row.end()) - row.begin();
        const auto label = std::max_element(truth.begin(), truth.end()) - truth.begin();
        if (pred == label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

CandidateResult train_candidate(const space::ArchDescriptor& d, const space::SearchSpace& space,
                                const data::TaskDataset& task, const CandidateTrainConfig& cfg,
                                const EnergyModel& energy) {
    if (task.input_dim() != space.input_dim || task.output_dim() != space.output_dim) {
        throw ShapeError("task dimensions do not match the search space");
    }
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    CandidateResult result;
    result.descriptor = d;
    result.analytics = analyze(d, space, energy);

    SeedStream root(cfg.seed, 0xca0d);
    nn::DenseNet net = space::instantiate(d, space, root.next_u64());
    nn::OptimizerState opt(cfg.optimizer, net);
    QuantizationHooks hooks(layer_bits(d));
    nn::ForwardHooks* active_hooks = cfg.quantize ? &hooks : nullptr;
    const nn::LossKind loss =
        task.kind == space::TaskKind::regression ? nn::LossKind::mse : nn::LossKind::softmax_cross_entropy;

    const auto& train = task.split.train;
    const nn::Matrix train_x = task.features.gather_rows(train);
    const nn::Matrix train_y = task.targets.gather_rows(train);
    SeedStream shuffle = root.split(1);
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    // Low-bit training is jumpy from epoch to epoch; keep the weights (and
    // activation ranges) of the epoch with the lowest deployed training loss.
    nn::DenseNet best_net = net;
    QuantizationHooks best_hooks = hooks;

    try {
        for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
            const auto order = random_permutation(shuffle, train.size());
            hooks.set_training(true);
            for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
                const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
                std::vector<std::size_t> rows;
                rows.reserve(end - begin);
                for (std::size_t i = begin; i < end; ++i) rows.push_back(train[order[i]]);
                const nn::Matrix x = task.features.gather_rows(rows);
                const nn::Matrix y = task.targets.gather_rows(rows);
                const auto trace = nn::forward_trace(net, x, active_hooks);
                const double l = nn::compute_loss(net, trace, loss, y);
                if (!std::isfinite(l)) throw DivergenceError("non-finite training loss");
                nn::apply_update(net, nn::backward(net, trace, loss, y), opt, nn::Direction::descent);
            }
            result.epochs_run = epoch + 1;
            hooks.set_training(false);
            const auto eval = nn::forward_trace(net, train_x, active_hooks);
            const double deployed = nn::compute_loss(net, eval, loss, train_y);
            if (!std::isfinite(deployed)) throw DivergenceError("non-finite training loss");
            if (deployed < best) {
                best = deployed;
                since_best = 0;
                best_net = net;
                best_hooks = hooks;
            } else if (++since_best >= cfg.patience) {
                break;
            }
        }

        net = std::move(best_net);
        hooks = std::move(best_hooks);
        hooks.set_training(false);
        const nn::Matrix x = task.features.gather_rows(task.split.test);
        const nn::Matrix y = task.targets.gather_rows(task.split.test);
        const nn::Matrix pred = nn::forward(net, x, active_hooks);
        if (!pred.all_finite()) throw DivergenceError("non-finite predictions");
        result.raw_metric = task.kind == space::TaskKind::regression ? r_squared(pred, y) : accuracy(pred, y);
        result.performance = normalize_performance(result.raw_metric, task.kind);
    } catch (const DivergenceError&) {
        result.diverged = true;
        result.performance = 0.0;
        result.raw_metric = 0.0;
    }
    result.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void to_json(nlohmann::json& j, const CandidateTrainConfig& c) {
    j = {{"max_epochs", c.max_epochs},
         {"batch_size", c.batch_size},
         {"patience", c.patience},
         {"learning_rate", c.optimizer.learning_rate},
         {"quantize", c.quantize}};
}

void from_json(const nlohmann::json& j, CandidateTrainConfig& c) {
    static const char* known[] = {"max_epochs", "batch_size", "patience", "learning_rate", "quantize"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError("unknown key 'candidate." + key + "'");
        }
    }
    const CandidateTrainConfig d;
    c.max_epochs = j.value("max_epochs", d.max_epochs);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.patience = j.value("patience", d.patience);
    c.optimizer = nn::OptimizerSettings::candidate_default();
    c.optimizer.learning_rate = j.value("learning_rate", d.optimizer.learning_rate);
    c.quantize = j.value("quantize", d.quantize);
}

}  // namespace inag::lab
