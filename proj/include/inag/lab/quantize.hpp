#pragma once

#include <span>
#include <vector>

#include "inag/nn/dense_net.hpp"
#include "inag/space/search_space.hpp"

namespace inag::lab {

/// Symmetric linear fake quantization of a tensor to `bits`.
///
/// scale = max|v| / (2^(B-1) - 1); each value becomes
/// scale * clamp(round(v / scale), -2^(B-1), 2^(B-1) - 1), rounding half to
/// even. An all-zero tensor stays zero and B = 32 is a pass-through.
std::vector<double> fake_quantize(std::span<const double> values, int bits);

/// Same rule with a caller-supplied range (max magnitude) instead of the
/// tensor's own max. `blocked` (resized to values.size()) receives 1.0 where
/// the clamp was active, which is where the straight-through gradient stops.
void fake_quantize_with_range(std::span<const double> values, int bits, double range, std::span<double> out,
                              std::span<double> blocked);

/// Largest positive integer level, 2^(B-1) - 1.
double quant_levels(int bits);

/// Per-layer bit plan: hidden layer i uses B(i); the output head reuses the
/// last hidden layer's bits.
std::vector<int> layer_bits(const space::ArchDescriptor& d);

/// Forward hooks that fake-quantize every layer's weights and every hidden
/// layer's activations. Activation ranges track a running max (EMA of the
/// batch max) in training mode and are frozen in evaluation mode.
class QuantizationHooks : public nn::ForwardHooks {
public:
    explicit QuantizationHooks(std::vector<int> bits, double momentum = 0.9);

    void set_training(bool training) { training_ = training; }
    [[nodiscard]] const std::vector<double>& activation_ranges() const { return running_max_; }

    bool transform_weights(std::size_t layer, const nn::Matrix& weight, nn::Matrix& out,
                           nn::Matrix& blocked) override;
    bool transform_activations(std::size_t layer, nn::Matrix& activations, nn::Matrix& blocked) override;

private:
    std::vector<int> bits_;
    std::vector<double> running_max_;
    std::vector<bool> seen_;
    double momentum_;
    bool training_ = true;
};

}  // namespace inag::lab
