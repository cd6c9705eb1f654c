#include "inag/lab/quantize.hpp"

#include <cmath>

#include "inag/common/error.hpp"
#include "inag/simd/kernels.hpp"

namespace inag::lab {

double quant_levels(int bits) { return std::ldexp(1.0, bits - 1) - 1.0; }

void fake_quantize_with_range(std::span<const double> values, int bits, double range, std::span<double> out,
                              std::span<double> blocked) {
    if (bits < 2 || bits > 32) throw DomainError("bit-width " + std::to_string(bits) + " outside [2,32]");
    if (out.size() != values.size()) throw ShapeError("fake_quantize output size mismatch");
    const bool want_mask = !blocked.empty();
    if (want_mask && blocked.size() != values.size()) throw ShapeError("fake_quantize mask size mismatch");
    if (bits == 32) {
        std::copy(values.begin(), values.end(), out.begin());
        if (want_mask) std::fill(blocked.begin(), blocked.end(), 0.0);
        return;
    }
    if (!(range > 0.0)) {
        std::fill(out.begin(), out.end(), 0.0);
        if (want_mask) std::fill(blocked.begin(), blocked.end(), 0.0);
        return;
    }
    const double levels = quant_levels(bits);
    const double scale = range / levels;
    simd::active().fake_quant(values.data(), out.data(), want_mask ? blocked.data() : nullptr, values.size(), scale,
                              -(levels + 1.0), levels);
}

std::vector<double> fake_quantize(std::span<const double> values, int bits) {
    std::vector<double> out(values.size());
    const double range = simd::active().max_abs(values.data(), values.size());
    fake_quantize_with_range(values, bits, range, out, {});
    return out;
}

std::vector<int> layer_bits(const space::ArchDescriptor& d) {
    std::vector<int> bits;
    for (const auto& c : d.layers) bits.push_back(c.bits);
    if (!bits.empty()) bits.push_back(bits.back());
    return bits;
}

QuantizationHooks::QuantizationHooks(std::vector<int> bits, double momentum)
    : bits_(std::move(bits)), running_max_(bits_.size(), 0.0), seen_(bits_.size(), false), momentum_(momentum) {}

bool QuantizationHooks::transform_weights(std::size_t layer, const nn::Matrix& weight, nn::Matrix& out,
                                          nn::Matrix& blocked) {
    if (layer >= bits_.size() || bits_[layer] >= 32) return false;
    out = nn::Matrix(weight.rows(), weight.cols());
    blocked = nn::Matrix(weight.rows(), weight.cols());
    const double range = simd::active().max_abs(weight.data(), weight.size());
    fake_quantize_with_range(weight.values(), bits_[layer], range, out.values(), blocked.values());
    return true;
}

bool QuantizationHooks::transform_activations(std::size_t layer, nn::Matrix& activations, nn::Matrix& blocked) {
    // The output head (last entry of bits_) is not activation-quantized.
    if (layer + 1 >= bits_.size() || bits_[layer] >= 32) return false;
    if (training_) {
        const double batch_max = simd::active().max_abs(activations.data(), activations.size());
        running_max_[layer] = seen_[layer] ? momentum_ * running_max_[layer] + (1.0 - momentum_) * batch_max : batch_max;
        seen_[layer] = true;
    }
    blocked = nn::Matrix(activations.rows(), activations.cols());
    const nn::Matrix input = activations;
    fake_quantize_with_range(input.values(), bits_[layer], running_max_[layer], activations.values(),
                             blocked.values());
    return true;
}

}  // namespace inag::lab
