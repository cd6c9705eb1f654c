#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inag/nn/matrix.hpp"

namespace inag::nn {

enum class Activation { relu, tanh, sigmoid, identity };

enum class LossKind { mse, binary_cross_entropy, softmax_cross_entropy };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);
std::string_view to_string(LossKind k);

struct DenseLayer {
    Matrix weight;              // [out x in]
    std::vector<double> bias;   // [out]
    Activation activation = Activation::identity;

    [[nodiscard]] std::size_t in_dim() const { return weight.cols(); }
    [[nodiscard]] std::size_t out_dim() const { return weight.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected feed-forward network.
///
/// Weights are stored [out x in]; a forward pass computes
/// act(X * W^T + b) layer by layer.
class DenseNet {
public:
    DenseNet() = default;
    DenseNet(std::vector<DenseLayer> layers, std::uint64_t seed);

    /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    /// `dims` has one more entry than `activations`.
    static DenseNet make(std::span<const std::size_t> dims, std::span<const Activation> activations,
                         std::uint64_t seed);

    [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    [[nodiscard]] std::size_t layer_count() const { return layers_.size(); }
    [[nodiscard]] std::size_t input_dim() const;
    [[nodiscard]] std::size_t output_dim() const;
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const DenseNet&, const DenseNet&) = default;

private:
    void check_chain() const;

    std::vector<DenseLayer> layers_;
    std::uint64_t seed_ = 0;
};

/// Optional per-layer transforms applied during a forward pass.
///
/// Used for quantization-aware training: weights may be replaced by a
/// transformed copy and layer outputs may be rewritten in place. Masks hold
/// 1.0 where the straight-through gradient is blocked (the value was clipped)
/// and 0.0 elsewhere; leave a mask empty when nothing is blocked.
class ForwardHooks {
public:
    virtual ~ForwardHooks() = default;
    /// Return true after filling `out` (same shape as `weight`).
    virtual bool transform_weights(std::size_t layer, const Matrix& weight, Matrix& out, Matrix& blocked);
    /// Return true if `activations` were rewritten.
    virtual bool transform_activations(std::size_t layer, Matrix& activations, Matrix& blocked);
};

/// Everything backward() needs from a forward pass.
struct ForwardTrace {
    std::vector<Matrix> inputs;          // input to layer i
    std::vector<Matrix> pre;             // pre-activation of layer i
    std::vector<Matrix> outputs;         // (possibly transformed) output of layer i
    std::vector<Matrix> act_blocked;     // empty unless layer i's output was transformed
    std::vector<Matrix> eff_weight;      // empty unless layer i's weights were transformed
    std::vector<Matrix> weight_blocked;  // empty unless some weight was clipped

    [[nodiscard]] const Matrix& output() const { return outputs.back(); }
};

/// Parameter gradients, shaped like the network, plus the gradient with
/// respect to the network input.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    Matrix input;

    static Gradients zeros_like(const DenseNet& net);
    void scale(double factor);
    void add(const Gradients& other);
    [[nodiscard]] bool all_finite() const;
};

Matrix forward(const DenseNet& net, const Matrix& batch, ForwardHooks* hooks = nullptr);
ForwardTrace forward_trace(const DenseNet& net, const Matrix& batch, ForwardHooks* hooks = nullptr);

/// Mean loss of the traced outputs against `targets`.
///
/// mse averages (y - t)^2 over batch and outputs. Binary cross-entropy
/// averages over batch and outputs; when the last layer is a sigmoid it is
/// evaluated from the logits so saturated outputs stay finite.
/// Softmax cross-entropy treats the last layer's output as logits and
/// averages over the batch.
double compute_loss(const DenseNet& net, const ForwardTrace& trace, LossKind loss, const Matrix& targets);

/// Loss on raw predictions. Binary cross-entropy requires every prediction
/// in the open interval (0, 1); softmax cross-entropy takes logits.
double loss_on_predictions(LossKind loss, const Matrix& predictions, const Matrix& targets);

/// Analytic gradients of compute_loss with respect to every parameter.
Gradients backward(const DenseNet& net, const ForwardTrace& trace, LossKind loss, const Matrix& targets);

/// Back-propagates an arbitrary gradient on the network output.
Gradients backprop(const DenseNet& net, const ForwardTrace& trace, const Matrix& output_grad);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace inag::nn
