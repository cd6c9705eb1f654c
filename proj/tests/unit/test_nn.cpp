#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gradient_oracle.hpp"
#include "inag/common/error.hpp"
#include "inag/nn/checkpoint.hpp"
#include "inag/nn/dense_net.hpp"
#include "inag/nn/optimizer.hpp"

using namespace inag;
using nn::Activation;
using nn::LossKind;
using nn::Matrix;

namespace {

nn::DenseNet single(double w, double b, Activation act) {
    nn::DenseLayer l{Matrix{{w}}, {b}, act};
    return nn::DenseNet({l}, 0);
}

}  // namespace

TEST_CASE("forward: identity net passes input through") {
    nn::DenseLayer l{Matrix{{1, 0}, {0, 1}}, {0, 0}, Activation::identity};
    const nn::DenseNet net({l}, 0);
    const Matrix x{{1.5, -2.0}, {0.25, 3.0}};
    CHECK(nn::forward(net, x) == x);
}

TEST_CASE("forward: hand-computed single layers") {
    CHECK(nn::forward(single(2, 1, Activation::identity), Matrix{{3}})(0, 0) == 7.0);
    CHECK(nn::forward(single(1, -5, Activation::relu), Matrix{{3}})(0, 0) == 0.0);
}

TEST_CASE("forward: column mismatch is a shape error") {
    const auto net = single(1, 0, Activation::identity);
    CHECK_THROWS_AS(nn::forward(net, Matrix(2, 3)), ShapeError);
}

TEST_CASE("DenseNet rejects layers whose dims do not chain") {
    nn::DenseLayer a{Matrix(3, 2), {0, 0, 0}, Activation::relu};
    nn::DenseLayer b{Matrix(1, 4), {0}, Activation::identity};
    CHECK_THROWS_AS(nn::DenseNet({a, b}, 0), ShapeError);
}

TEST_CASE("backward: zero signal at the mse minimum") {
    const std::size_t dims[] = {2, 3, 2};
    const Activation acts[] = {Activation::tanh, Activation::identity};
    const auto net = nn::DenseNet::make(dims, acts, 5);
    const Matrix x{{0.3, -0.2}, {1.0, 0.5}};
    const auto trace = nn::forward_trace(net, x);
    const auto g = nn::backward(net, trace, LossKind::mse, trace.output());
    for (const auto& w : g.weight)
        for (double v : w.values()) CHECK(v == 0.0);
    for (const auto& b : g.bias)
        for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("backward: y = w x with mse, no one-half factor") {
    const auto net = single(2, 0, Activation::identity);
    const Matrix x{{1}};
    const auto trace = nn::forward_trace(net, x);
    const auto g = nn::backward(net, trace, LossKind::mse, Matrix{{0}});
    CHECK(g.weight[0](0, 0) == doctest::Approx(4.0));
    CHECK(nn::compute_loss(net, trace, LossKind::mse, Matrix{{0}}) == doctest::Approx(4.0));
}

TEST_CASE("backward: target shape mismatch is a shape error") {
    const auto net = single(1, 0, Activation::identity);
    const auto trace = nn::forward_trace(net, Matrix{{1}});
    CHECK_THROWS_AS(nn::backward(net, trace, LossKind::mse, Matrix(1, 2)), ShapeError);
}

TEST_CASE("binary cross-entropy requires predictions in (0,1)") {
    CHECK_THROWS_AS(nn::loss_on_predictions(LossKind::binary_cross_entropy, Matrix{{1.0}}, Matrix{{1.0}}),
                    DomainError);
    CHECK_THROWS_AS(nn::loss_on_predictions(LossKind::binary_cross_entropy, Matrix{{-0.1}}, Matrix{{0.0}}),
                    DomainError);
    const double l = nn::loss_on_predictions(LossKind::binary_cross_entropy, Matrix{{0.5}}, Matrix{{1.0}});
    CHECK(l == doctest::Approx(std::log(2.0)));
    // An identity head feeding BCE must stay inside the domain too.
    const auto net = single(1, 0, Activation::identity);
    const auto trace = nn::forward_trace(net, Matrix{{2.0}});
    CHECK_THROWS_AS(nn::backward(net, trace, LossKind::binary_cross_entropy, Matrix{{1.0}}), DomainError);
}

TEST_CASE("softmax cross-entropy on logits") {
    const double l = nn::loss_on_predictions(LossKind::softmax_cross_entropy, Matrix{{0.0, 0.0}}, Matrix{{1.0, 0.0}});
    CHECK(l == doctest::Approx(std::log(2.0)));
    const auto p = nn::softmax_rows(Matrix{{1000.0, 0.0}});
    CHECK(p(0, 0) == doctest::Approx(1.0));
    CHECK(p.all_finite());
}

TEST_CASE("gradients match central finite differences for every loss kind") {
    SeedStream rng(314);
    for (LossKind loss : {LossKind::mse, LossKind::binary_cross_entropy, LossKind::softmax_cross_entropy}) {
        CAPTURE(nn::to_string(loss));
        std::size_t checked = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto c = testing::random_gradient_case(rng, loss);
            const auto r = testing::check_gradients(c.net, c.x, loss, c.targets);
            CHECK(r.max_rel_error < 1e-4);
            checked += r.checked;
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("gradients through saturated sigmoid BCE stay finite") {
    auto net = single(50.0, 0, Activation::sigmoid);
    const auto trace = nn::forward_trace(net, Matrix{{10.0}});
    const double loss = nn::compute_loss(net, trace, LossKind::binary_cross_entropy, Matrix{{0.0}});
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(500.0));
    const auto g = nn::backward(net, trace, LossKind::binary_cross_entropy, Matrix{{0.0}});
    CHECK(g.all_finite());
}

TEST_CASE("apply_update: sgd hand arithmetic and ascent sign") {
    auto net = single(1, 0, Activation::identity);
    auto g = nn::Gradients::zeros_like(net);
    nn::OptimizerState opt(nn::OptimizerSettings::sgd(0.1), net);

    nn::apply_update(net, g, opt, nn::Direction::descent);
    CHECK(net.layers()[0].weight(0, 0) == 1.0);

    g.weight[0](0, 0) = 2.0;
    nn::apply_update(net, g, opt, nn::Direction::descent);
    CHECK(net.layers()[0].weight(0, 0) == doctest::Approx(0.8));

    auto net2 = single(1, 0, Activation::identity);
    nn::OptimizerState opt2(nn::OptimizerSettings::sgd(0.1), net2);
    nn::apply_update(net2, g, opt2, nn::Direction::ascent);
    CHECK(net2.layers()[0].weight(0, 0) == doctest::Approx(1.2));
}

TEST_CASE("apply_update: g then -g restores sgd but not adam") {
    const std::size_t dims[] = {3, 4, 2};
    const Activation acts[] = {Activation::relu, Activation::identity};
    const auto start = nn::DenseNet::make(dims, acts, 9);
    auto g = nn::Gradients::zeros_like(start);
    SeedStream rng(1);
    for (auto& w : g.weight)
        for (double& v : w.values()) v = rng.uniform(-1, 1);
    auto neg = g;
    neg.scale(-1.0);

    auto net = start;
    nn::OptimizerState sgd(nn::OptimizerSettings::sgd(0.05), net);
    nn::apply_update(net, g, sgd, nn::Direction::descent);
    nn::apply_update(net, neg, sgd, nn::Direction::descent);
    for (std::size_t l = 0; l < net.layer_count(); ++l)
        for (std::size_t i = 0; i < net.layers()[l].weight.size(); ++i)
            CHECK(std::fabs(net.layers()[l].weight.values()[i] - start.layers()[l].weight.values()[i]) <= 1e-12);

    auto anet = start;
    nn::OptimizerState adam(nn::OptimizerSettings::candidate_default(), anet);
    nn::apply_update(anet, g, adam, nn::Direction::descent);
    nn::apply_update(anet, neg, adam, nn::Direction::descent);
    CHECK(adam.steps() == 2);
    CHECK_FALSE(anet == start);
}

TEST_CASE("apply_update: non-finite gradient names the block and leaves the net intact") {
    const std::size_t dims[] = {2, 2, 1};
    const Activation acts[] = {Activation::relu, Activation::identity};
    auto net = nn::DenseNet::make(dims, acts, 2);
    const auto before = net;
    auto g = nn::Gradients::zeros_like(net);
    g.bias[1][0] = std::nan("");
    nn::OptimizerState opt(nn::OptimizerSettings::candidate_default(), net);
    try {
        nn::apply_update(net, g, opt, nn::Direction::descent);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("layer 1 bias") != std::string::npos);
    }
    CHECK(net == before);
    CHECK(opt.steps() == 0);
}

TEST_CASE("training is bitwise reproducible from the seed") {
    auto run = [] {
        const std::size_t dims[] = {2, 8, 1};
        const Activation acts[] = {Activation::tanh, Activation::identity};
        auto net = nn::DenseNet::make(dims, acts, 77);
        nn::OptimizerState opt(nn::OptimizerSettings::candidate_default(), net);
        const Matrix x{{0.1, 0.2}, {0.3, -0.4}, {-1.0, 0.5}};
        const Matrix t{{1.0}, {0.0}, {-1.0}};
        for (int k = 0; k < 25; ++k) {
            const auto trace = nn::forward_trace(net, x);
            nn::apply_update(net, nn::backward(net, trace, LossKind::mse, t), opt, nn::Direction::descent);
        }
        return net;
    };
    CHECK(run() == run());
}

TEST_CASE("activation ranges") {
    SeedStream rng(8);
    const std::size_t dims[] = {3, 16, 16};
    for (Activation a : {Activation::sigmoid, Activation::relu}) {
        const Activation acts[] = {Activation::identity, a};
        const auto net = nn::DenseNet::make(dims, acts, 4);
        Matrix x(64, 3);
        for (double& v : x.values()) v = rng.uniform(-20, 20);
        const Matrix out = nn::forward(net, x);
        for (double y : out.values()) {
            if (a == Activation::sigmoid) {
                CHECK(y > 0.0);
                CHECK(y < 1.0);
            } else {
                CHECK(y >= 0.0);
            }
        }
    }
}

TEST_CASE("Glorot initialization bounds and zero biases") {
    const std::size_t dims[] = {10, 30, 5};
    const Activation acts[] = {Activation::relu, Activation::identity};
    const auto net = nn::DenseNet::make(dims, acts, 3);
    for (const auto& l : net.layers()) {
        const double bound = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
        for (double w : l.weight.values()) CHECK(std::fabs(w) <= bound);
        for (double b : l.bias) CHECK(b == 0.0);
    }
    CHECK(net.parameter_count() == 10 * 30 + 30 + 30 * 5 + 5);
    CHECK(nn::DenseNet::make(dims, acts, 3) == net);
    CHECK_FALSE(nn::DenseNet::make(dims, acts, 4) == net);
}

TEST_CASE("checkpoint round-trips bit for bit") {
    const std::size_t dims[] = {3, 5, 2};
    const Activation acts[] = {Activation::sigmoid, Activation::tanh};
    auto net = nn::DenseNet::make(dims, acts, 123456789012345ULL);
    net.layers()[0].bias[2] = 1.0 / 3.0;
    std::stringstream ss;
    nn::write_checkpoint(ss, net);
    const auto back = nn::read_checkpoint(ss);
    CHECK(back == net);
    CHECK(back.seed() == 123456789012345ULL);
}

TEST_CASE("checkpoint rejects wrong version and truncation") {
    std::istringstream bad_version("inag-densenet 2\nseed 0\nlayers 0\nend\n");
    CHECK_THROWS_AS(nn::read_checkpoint(bad_version), ParseError);

    const std::size_t dims[] = {2, 2};
    const Activation acts[] = {Activation::identity};
    std::stringstream ss;
    nn::write_checkpoint(ss, nn::DenseNet::make(dims, acts, 1));
    const std::string text = ss.str();
    std::istringstream cut(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(nn::read_checkpoint(cut), ParseError);
}
