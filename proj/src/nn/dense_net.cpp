#include "inag/nn/dense_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inag/common/error.hpp"
#include "inag/common/rng.hpp"
#include "inag/simd/kernels.hpp"

namespace inag::nn {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return sigmoid(z);
        case Activation::identity: return z;
    }
    return z;
}

double activation_slope(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            const double s = sigmoid(z);
            return s * (1.0 - s);
        }
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", got " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
}

// log(1 + exp(-|z|)) + max(z, 0) - z * t
double bce_from_logit(double z, double t) {
    return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
}

bool fused_bce(const DenseNet& net, LossKind loss) {
    return loss == LossKind::binary_cross_entropy && net.layers().back().activation == Activation::sigmoid;
}

}  // namespace

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw ParseError("unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(LossKind k) {
    switch (k) {
        case LossKind::mse: return "mse";
        case LossKind::binary_cross_entropy: return "binary_cross_entropy";
        case LossKind::softmax_cross_entropy: return "softmax_cross_entropy";
    }
    return "mse";
}

DenseNet::DenseNet(std::vector<DenseLayer> layers, std::uint64_t seed) : layers_(std::move(layers)), seed_(seed) {
    check_chain();
}

void DenseNet::check_chain() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        if (l.bias.size() != l.out_dim()) {
            throw ShapeError("layer " + std::to_string(i) + ": bias length " + std::to_string(l.bias.size()) +
                             " != output dim " + std::to_string(l.out_dim()));
        }
        if (i > 0 && l.in_dim() != layers_[i - 1].out_dim()) {
            throw ShapeError("layer " + std::to_string(i) + ": input dim " + std::to_string(l.in_dim()) +
                             " does not chain with previous output dim " +
                             std::to_string(layers_[i - 1].out_dim()));
        }
    }
}

DenseNet DenseNet::make(std::span<const std::size_t> dims, std::span<const Activation> activations,
                        std::uint64_t seed) {
    if (dims.size() < 2 || activations.size() + 1 != dims.size()) {
        throw ShapeError("DenseNet::make needs dims.size() == activations.size() + 1 >= 2");
    }
    const SeedStream root(seed, 0x1a7e);
    std::vector<DenseLayer> layers;
    layers.reserve(activations.size());
    for (std::size_t i = 0; i < activations.size(); ++i) {
        const std::size_t in = dims[i];
        const std::size_t out = dims[i + 1];
        if (in == 0 || out == 0) throw ShapeError("zero-width layer");
        SeedStream stream = root.split(i);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0), activations[i]};
        for (double& w : layer.weight.values()) w = stream.uniform(-limit, limit);
        layers.push_back(std::move(layer));
    }
    return DenseNet(std::move(layers), seed);
}

std::size_t DenseNet::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t DenseNet::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

bool DenseNet::all_finite() const {
    return std::all_of(layers_.begin(), layers_.end(), [](const DenseLayer& l) {
        return l.weight.all_finite() &&
               std::all_of(l.bias.begin(), l.bias.end(), [](double b) { return std::isfinite(b); });
    });
}

bool ForwardHooks::transform_weights(std::size_t, const Matrix&, Matrix&, Matrix&) { return false; }
bool ForwardHooks::transform_activations(std::size_t, Matrix&, Matrix&) { return false; }

Gradients Gradients::zeros_like(const DenseNet& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
        g.weight.emplace_back(l.out_dim(), l.in_dim());
        g.bias.emplace_back(l.out_dim(), 0.0);
    }
    return g;
}

void Gradients::scale(double factor) {
    for (auto& w : weight)
        for (double& v : w.values()) v *= factor;
    for (auto& b : bias)
        for (double& v : b) v *= factor;
    for (double& v : input.values()) v *= factor;
}

void Gradients::add(const Gradients& other) {
    if (other.weight.size() != weight.size()) throw ShapeError("gradient sets differ in layer count");
    const auto& k = simd::active();
    for (std::size_t i = 0; i < weight.size(); ++i) {
        require_same_shape(weight[i], other.weight[i], "gradient add");
        k.axpy(1.0, other.weight[i].data(), weight[i].data(), weight[i].size());
        k.axpy(1.0, other.bias[i].data(), bias[i].data(), bias[i].size());
    }
    if (!other.input.empty()) {
        if (input.empty()) {
            input = other.input;
        } else {
            require_same_shape(input, other.input, "gradient add (input)");
            k.axpy(1.0, other.input.data(), input.data(), input.size());
        }
    }
}

bool Gradients::all_finite() const {
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (!weight[i].all_finite()) return false;
        for (double b : bias[i])
            if (!std::isfinite(b)) return false;
    }
    return true;
}

ForwardTrace forward_trace(const DenseNet& net, const Matrix& batch, ForwardHooks* hooks) {
    if (net.layer_count() == 0) throw ShapeError("forward on an empty network");
    if (batch.cols() != net.input_dim()) {
        throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                         std::to_string(net.input_dim()));
    }
    const auto& k = simd::active();
    const std::size_t n = batch.rows();
    const std::size_t count = net.layer_count();
    ForwardTrace trace;
    trace.inputs.reserve(count);
    trace.pre.reserve(count);
    trace.outputs.reserve(count);
    trace.act_blocked.resize(count);
    trace.eff_weight.resize(count);
    trace.weight_blocked.resize(count);

    for (std::size_t li = 0; li < count; ++li) {
        const DenseLayer& layer = net.layers()[li];
        const Matrix& x = li == 0 ? batch : trace.outputs.back();
        trace.inputs.push_back(x);

        const Matrix* w = &layer.weight;
        if (hooks != nullptr) {
            Matrix replaced;
            Matrix blocked;
            if (hooks->transform_weights(li, layer.weight, replaced, blocked)) {
                require_same_shape(layer.weight, replaced, "transformed weights");
                trace.eff_weight[li] = std::move(replaced);
                trace.weight_blocked[li] = std::move(blocked);
                w = &trace.eff_weight[li];
            }
        }

        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();
        Matrix z(n, out);
        Matrix a(n, out);
        for (std::size_t r = 0; r < n; ++r) {
            const double* xr = trace.inputs[li].data() + r * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double v = k.dot(xr, w->data() + o * in, in) + layer.bias[o];
                z(r, o) = v;
                a(r, o) = activate(layer.activation, v);
            }
        }
        if (hooks != nullptr) {
            Matrix blocked;
            if (hooks->transform_activations(li, a, blocked)) trace.act_blocked[li] = std::move(blocked);
        }
        trace.pre.push_back(std::move(z));
        trace.outputs.push_back(std::move(a));
    }
    return trace;
}

Matrix forward(const DenseNet& net, const Matrix& batch, ForwardHooks* hooks) {
    ForwardTrace t = forward_trace(net, batch, hooks);
    return std::move(t.outputs.back());
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        const double m = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            out(r, c) = std::exp(row[c] - m);
            sum += out(r, c);
        }
        for (std::size_t c = 0; c < row.size(); ++c) out(r, c) /= sum;
    }
    return out;
}

double loss_on_predictions(LossKind loss, const Matrix& predictions, const Matrix& targets) {
    require_same_shape(predictions, targets, "loss targets");
    const std::size_t n = predictions.rows();
    if (n == 0) throw ShapeError("loss on an empty batch");
    const auto p = predictions.values();
    const auto t = targets.values();
    double sum = 0.0;
    switch (loss) {
        case LossKind::mse:
            for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] - t[i]) * (p[i] - t[i]);
            return sum / static_cast<double>(p.size());
        case LossKind::binary_cross_entropy:
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (!(p[i] > 0.0 && p[i] < 1.0)) {
                    throw DomainError("binary cross-entropy needs predictions in (0,1), got " +
                                      std::to_string(p[i]) + " at element " + std::to_string(i));
                }
                sum -= t[i] * std::log(p[i]) + (1.0 - t[i]) * std::log1p(-p[i]);
            }
            return sum / static_cast<double>(p.size());
        case LossKind::softmax_cross_entropy: {
            for (std::size_t r = 0; r < n; ++r) {
                const auto row = predictions.row(r);
                const double m = *std::max_element(row.begin(), row.end());
                double z = 0.0;
                for (double v : row) z += std::exp(v - m);
                const double lse = m + std::log(z);
                for (std::size_t c = 0; c < row.size(); ++c) sum -= targets(r, c) * (row[c] - lse);
            }
            return sum / static_cast<double>(n);
        }
    }
    return sum;
}

double compute_loss(const DenseNet& net, const ForwardTrace& trace, LossKind loss, const Matrix& targets) {
    if (fused_bce(net, loss) && trace.act_blocked.back().empty()) {
        const Matrix& z = trace.pre.back();
        require_same_shape(z, targets, "loss targets");
        double sum = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) sum += bce_from_logit(z.values()[i], targets.values()[i]);
        return sum / static_cast<double>(z.size());
    }
    return loss_on_predictions(loss, trace.output(), targets);
}

namespace {

// Gradient of the mean loss with respect to the last layer's pre-activation.
Matrix output_pre_gradient(const DenseNet& net, const ForwardTrace& trace, LossKind loss, const Matrix& targets) {
    const Matrix& y = trace.output();
    require_same_shape(y, targets, "loss targets");
    const std::size_t n = y.rows();
    if (n == 0) throw ShapeError("backward on an empty batch");
    const double count = static_cast<double>(y.size());
    const auto& last = net.layers().back();
    const Matrix& z = trace.pre.back();

    if (fused_bce(net, loss) && trace.act_blocked.back().empty()) {
        Matrix dz(n, y.cols());
        for (std::size_t i = 0; i < y.size(); ++i) {
            dz.values()[i] = (sigmoid(z.values()[i]) - targets.values()[i]) / count;
        }
        return dz;
    }

    Matrix dy(n, y.cols());
    switch (loss) {
        case LossKind::mse:
            for (std::size_t i = 0; i < y.size(); ++i) {
                dy.values()[i] = 2.0 * (y.values()[i] - targets.values()[i]) / count;
            }
            break;
        case LossKind::binary_cross_entropy:
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double p = y.values()[i];
                if (!(p > 0.0 && p < 1.0)) {
                    throw DomainError("binary cross-entropy needs predictions in (0,1), got " + std::to_string(p));
                }
                dy.values()[i] = (p - targets.values()[i]) / (p * (1.0 - p)) / count;
            }
            break;
        case LossKind::softmax_cross_entropy: {
            const Matrix s = softmax_rows(y);
            for (std::size_t i = 0; i < y.size(); ++i) {
                dy.values()[i] = (s.values()[i] - targets.values()[i]) / static_cast<double>(n);
            }
            break;
        }
    }
    const Matrix& blocked = trace.act_blocked.back();
    for (std::size_t i = 0; i < y.size(); ++i) {
        double g = dy.values()[i];
        if (!blocked.empty() && blocked.values()[i] != 0.0) g = 0.0;
        dy.values()[i] = g * activation_slope(last.activation, z.values()[i]);
    }
    return dy;
}

Gradients propagate(const DenseNet& net, const ForwardTrace& trace, Matrix dz) {
    const auto& k = simd::active();
    Gradients g = Gradients::zeros_like(net);
    for (std::size_t li = net.layer_count(); li-- > 0;) {
        const DenseLayer& layer = net.layers()[li];
        const Matrix& x = trace.inputs[li];
        const Matrix& w = trace.eff_weight[li].empty() ? layer.weight : trace.eff_weight[li];
        const std::size_t n = x.rows();
        const std::size_t in = layer.in_dim();
        const std::size_t out = layer.out_dim();
        Matrix dx(n, in);
        Matrix& dw = g.weight[li];
        auto& db = g.bias[li];
        for (std::size_t r = 0; r < n; ++r) {
            const double* xr = x.data() + r * in;
            double* dxr = dx.data() + r * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double d = dz(r, o);
                if (d == 0.0) continue;
                k.axpy(d, xr, dw.data() + o * in, in);
                k.axpy(d, w.data() + o * in, dxr, in);
                db[o] += d;
            }
        }
        const Matrix& wb = trace.weight_blocked[li];
        if (!wb.empty()) {
            for (std::size_t i = 0; i < dw.size(); ++i)
                if (wb.values()[i] != 0.0) dw.values()[i] = 0.0;
        }
        if (li == 0) {
            g.input = std::move(dx);
            break;
        }
        // Through the previous layer's activation (and its STE mask).
        const DenseLayer& prev = net.layers()[li - 1];
        const Matrix& zp = trace.pre[li - 1];
        const Matrix& blocked = trace.act_blocked[li - 1];
        dz = Matrix(n, in);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            double d = dx.values()[i];
            if (!blocked.empty() && blocked.values()[i] != 0.0) d = 0.0;
            dz.values()[i] = d * activation_slope(prev.activation, zp.values()[i]);
        }
    }
    return g;
}

}  // namespace

Gradients backward(const DenseNet& net, const ForwardTrace& trace, LossKind loss, const Matrix& targets) {
    if (trace.outputs.size() != net.layer_count()) throw ShapeError("trace does not belong to this network");
    return propagate(net, trace, output_pre_gradient(net, trace, loss, targets));
}

Gradients backprop(const DenseNet& net, const ForwardTrace& trace, const Matrix& output_grad) {
    if (trace.outputs.size() != net.layer_count()) throw ShapeError("trace does not belong to this network");
    const Matrix& y = trace.output();
    require_same_shape(y, output_grad, "output gradient");
    const auto& last = net.layers().back();
    const Matrix& z = trace.pre.back();
    const Matrix& blocked = trace.act_blocked.back();
    Matrix dz(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = output_grad.values()[i];
        if (!blocked.empty() && blocked.values()[i] != 0.0) d = 0.0;
        dz.values()[i] = d * activation_slope(last.activation, z.values()[i]);
    }
    return propagate(net, trace, std::move(dz));
}

}  // namespace inag::nn
