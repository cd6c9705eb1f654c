#pragma once

// Central finite-difference oracle for dense-network gradients. It only uses
// forward passes and the loss value, never backward().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "inag/common/rng.hpp"
#include "inag/nn/dense_net.hpp"

namespace inag::testing {

struct GradientCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;  // parameters whose +-h probe crossed a ReLU kink
};

inline double loss_at(const nn::DenseNet& net, const nn::Matrix& x, nn::LossKind loss, const nn::Matrix& t,
                      std::vector<bool>* relu_signs = nullptr) {
    const auto trace = nn::forward_trace(net, x);
    if (relu_signs != nullptr) {
        relu_signs->clear();
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            if (net.layers()[l].activation != nn::Activation::relu) continue;
            for (double z : trace.pre[l].values()) relu_signs->push_back(z > 0.0);
        }
    }
    return nn::compute_loss(net, trace, loss, t);
}

inline double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    return std::fabs(analytic - numeric) / denom;
}

/// Compares backward() against central differences with step h.
inline GradientCheck check_gradients(nn::DenseNet net, const nn::Matrix& x, nn::LossKind loss, const nn::Matrix& t,
                                     double h = 1e-4) {
    const auto trace = nn::forward_trace(net, x);
    const nn::Gradients g = nn::backward(net, trace, loss, t);
    GradientCheck out;
    std::vector<bool> plus_signs;
    std::vector<bool> minus_signs;
    auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double lp = loss_at(net, x, loss, t, &plus_signs);
        param = saved - h;
        const double lm = loss_at(net, x, loss, t, &minus_signs);
        param = saved;
        if (plus_signs != minus_signs) {
            ++out.skipped_kinks;
            return;
        }
        const double numeric = (lp - lm) / (2.0 * h);
        out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic, numeric));
        ++out.checked;
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& layer = net.layers()[l];
        for (std::size_t i = 0; i < layer.weight.size(); ++i) probe(layer.weight.values()[i], g.weight[l].values()[i]);
        for (std::size_t o = 0; o < layer.bias.size(); ++o) probe(layer.bias[o], g.bias[l][o]);
    }
    return out;
}

/// Random net with 1..3 layers of 1..8 units, a batch, and targets suited to
/// the loss kind.
struct GradientCase {
    nn::DenseNet net;
    nn::Matrix x;
    nn::Matrix targets;
};

inline GradientCase random_gradient_case(SeedStream& rng, nn::LossKind loss) {
    const std::size_t layers = 1 + rng.index(3);
    std::vector<std::size_t> dims{1 + rng.index(8)};
    std::vector<nn::Activation> acts;
    const nn::Activation hidden[] = {nn::Activation::relu, nn::Activation::tanh, nn::Activation::sigmoid,
                                     nn::Activation::identity};
    for (std::size_t l = 0; l < layers; ++l) {
        dims.push_back(1 + rng.index(8));
        acts.push_back(hidden[rng.index(4)]);
    }
    if (loss == nn::LossKind::binary_cross_entropy) acts.back() = nn::Activation::sigmoid;
    if (loss == nn::LossKind::softmax_cross_entropy) {
        if (dims.back() < 2) dims.back() = 2;
        acts.back() = nn::Activation::identity;
    }
    GradientCase c{nn::DenseNet::make(dims, acts, rng.next_u64()), nn::Matrix(1 + rng.index(6), dims.front()), {}};
    // Non-zero biases so ReLU kinks are not aligned with zero inputs.
    for (auto& l : c.net.layers())
        for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
    for (double& v : c.x.values()) v = rng.uniform(-1.5, 1.5);
    c.targets = nn::Matrix(c.x.rows(), dims.back());
    switch (loss) {
        case nn::LossKind::mse:
            for (double& v : c.targets.values()) v = rng.uniform(-1.0, 1.0);
            break;
        case nn::LossKind::binary_cross_entropy:
            for (double& v : c.targets.values()) v = rng.uniform();
            break;
        case nn::LossKind::softmax_cross_entropy:
            for (std::size_t r = 0; r < c.targets.rows(); ++r) c.targets(r, rng.index(dims.back())) = 1.0;
            break;
    }
    return c;
}

}  // namespace inag::testing
