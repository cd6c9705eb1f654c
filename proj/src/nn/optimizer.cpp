#include "inag/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "inag/common/error.hpp"
#include "inag/simd/kernels.hpp"

namespace inag::nn {

OptimizerSettings OptimizerSettings::gan_default() { return {OptimizerKind::adam, 2e-4, 0.5, 0.999, 1e-8}; }
OptimizerSettings OptimizerSettings::candidate_default() { return {OptimizerKind::adam, 1e-3, 0.9, 0.999, 1e-8}; }
OptimizerSettings OptimizerSettings::sgd(double lr) { return {OptimizerKind::sgd, lr, 0.0, 0.0, 0.0}; }

OptimizerState::OptimizerState(const OptimizerSettings& settings, const DenseNet& net) : settings_(settings) {
    if (!(settings.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (settings.kind == OptimizerKind::adam) {
        for (const auto& l : net.layers()) {
            m_w_.emplace_back(l.out_dim(), l.in_dim());
            v_w_.emplace_back(l.out_dim(), l.in_dim());
            m_b_.emplace_back(l.out_dim(), 0.0);
            v_b_.emplace_back(l.out_dim(), 0.0);
        }
    }
}

namespace {

void check_finite(const Gradients& g) {
    for (std::size_t i = 0; i < g.weight.size(); ++i) {
        for (double v : g.weight[i].values())
            if (!std::isfinite(v)) throw DivergenceError("non-finite gradient in layer " + std::to_string(i) + " weight");
        for (double v : g.bias[i])
            if (!std::isfinite(v)) throw DivergenceError("non-finite gradient in layer " + std::to_string(i) + " bias");
    }
}

}  // namespace

void apply_update(DenseNet& net, const Gradients& grads, OptimizerState& opt, Direction direction) {
    if (grads.weight.size() != net.layer_count()) throw ShapeError("gradient layer count mismatch");
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const auto& l = net.layers()[i];
        if (grads.weight[i].rows() != l.out_dim() || grads.weight[i].cols() != l.in_dim() ||
            grads.bias[i].size() != l.out_dim()) {
            throw ShapeError("gradient shape mismatch in layer " + std::to_string(i));
        }
    }
    check_finite(grads);

    const auto& k = simd::active();
    const OptimizerSettings& s = opt.settings_;
    const double sign = direction == Direction::descent ? 1.0 : -1.0;
    ++opt.steps_;

    if (s.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            auto& l = net.layers()[i];
            k.axpy(-sign * s.learning_rate, grads.weight[i].data(), l.weight.data(), l.weight.size());
            k.axpy(-sign * s.learning_rate, grads.bias[i].data(), l.bias.data(), l.bias.size());
        }
        return;
    }

    const double t = static_cast<double>(opt.steps_);
    const simd::AdamCoeffs c{s.learning_rate, s.beta1, s.beta2, s.epsilon, 1.0 - std::pow(s.beta1, t),
                             1.0 - std::pow(s.beta2, t)};
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        auto& l = net.layers()[i];
        if (direction == Direction::descent) {
            k.adam_step(l.weight.data(), opt.m_w_[i].data(), opt.v_w_[i].data(), grads.weight[i].data(),
                        l.weight.size(), c);
            k.adam_step(l.bias.data(), opt.m_b_[i].data(), opt.v_b_[i].data(), grads.bias[i].data(), l.bias.size(),
                        c);
        } else {
            Matrix gw = grads.weight[i];
            for (double& v : gw.values()) v = -v;
            std::vector<double> gb = grads.bias[i];
            for (double& v : gb) v = -v;
            k.adam_step(l.weight.data(), opt.m_w_[i].data(), opt.v_w_[i].data(), gw.data(), l.weight.size(), c);
            k.adam_step(l.bias.data(), opt.m_b_[i].data(), opt.v_b_[i].data(), gb.data(), l.bias.size(), c);
        }
    }
    if (!net.all_finite()) throw DivergenceError("non-finite parameter after update");
}

}  // namespace inag::nn
