#pragma once

#include <cstdint>
#include <vector>

#include "inag/nn/dense_net.hpp"

namespace inag::nn {

enum class OptimizerKind { sgd, adam };

enum class Direction { descent, ascent };

struct OptimizerSettings {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Adam(2e-4, 0.5, 0.999) for generator/discriminator training.
    static OptimizerSettings gan_default();
    /// Adam(1e-3, 0.9, 0.999) for candidate networks and the encoder.
    static OptimizerSettings candidate_default();
    static OptimizerSettings sgd(double lr);
};

/// Per-parameter optimizer state for one network. Moment buffers mirror the
/// parameter shapes of the network the state was created for.
class OptimizerState {
public:
    OptimizerState(const OptimizerSettings& settings, const DenseNet& net);

    [[nodiscard]] const OptimizerSettings& settings() const { return settings_; }
    [[nodiscard]] std::uint64_t steps() const { return steps_; }

private:
    friend void apply_update(DenseNet&, const Gradients&, OptimizerState&, Direction);

    OptimizerSettings settings_;
    std::vector<Matrix> m_w_, v_w_;
    std::vector<std::vector<double>> m_b_, v_b_;
    std::uint64_t steps_ = 0;
};

/// Applies one optimizer step in place. Ascent is descent on the negated
/// gradients. Throws DivergenceError naming the first non-finite gradient
/// block; the network is untouched in that case.
void apply_update(DenseNet& net, const Gradients& grads, OptimizerState& opt, Direction direction);

}  // namespace inag::nn
