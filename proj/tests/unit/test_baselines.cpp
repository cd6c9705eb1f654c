#include <cmath>

#include "doctest.h"
#include "inag/baselines/search.hpp"
#include "inag/common/error.hpp"
#include "inag/select/inag.hpp"

using namespace inag;
using baselines::ConstraintValue;

namespace {

baselines::SearchProblem storage_toy(const space::SearchSpace& s) {
    const auto base = select::NormalizationBase::for_space(s, {});
    baselines::SearchProblem p;
    p.space = s;
    p.evaluator = [s, base](const space::ArchDescriptor& d) {
        return -static_cast<double>(lab::storage_bits(d, s)) / base.storage_bits;
    };
    return p;
}

}  // namespace

TEST_CASE("penalized_objective") {
    CHECK(baselines::penalized_objective(0.7, {}, 0.01) == 0.7);
    const ConstraintValue one{0.4, 0.5};
    CHECK(baselines::penalized_objective(0.9, std::span(&one, 1), 0.01) == doctest::Approx(0.8));
    const ConstraintValue at{0.5, 0.5};
    CHECK(baselines::penalized_objective(0.9, std::span(&at, 1), 0.01) == doctest::Approx(-1.0));
    const ConstraintValue over[] = {{0.7, 0.5}, {0.2, 0.1}};
    CHECK(baselines::penalized_objective(0.9, over, 0.01) == doctest::Approx(-1.3));
}

TEST_CASE("penalty decreases strictly as slack shrinks") {
    double prev = 1e300;
    for (int i = 1000; i >= 1; --i) {
        const ConstraintValue c{0.5 - i * 1e-4, 0.5};
        const double v = baselines::penalized_objective(0.9, std::span(&c, 1), 0.01);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("GA on a single-option space") {
    space::SearchSpace s;
    s.layer_count = 2;
    s.width_options = {8};
    s.bit_options = {4};
    auto p = storage_toy(s);
    baselines::GaConfig cfg;
    cfg.generations = 1;
    cfg.population = 4;
    const auto out = baselines::ga_search(p, cfg);
    CHECK(out.best == space::maximal_descriptor(s));
    CHECK(out.evaluations == 1);
}

TEST_CASE("GA recovers the all-min descriptor on the storage toy") {
    const auto s = space::SearchSpace::desk_default();
    auto p = storage_toy(s);
    baselines::GaConfig cfg;
    cfg.seed = 1;
    const auto out = baselines::ga_search(p, cfg);
    CHECK(out.best == space::minimal_descriptor(s));
    bool in_log = false;
    for (const auto& e : out.log) {
        CHECK(space::is_member(e.descriptor, s));
        in_log = in_log || e.descriptor == out.best;
    }
    CHECK(in_log);
    const auto again = baselines::ga_search(p, cfg);
    CHECK(again.log == out.log);
    CHECK(baselines::outcome_json(again, false) == baselines::outcome_json(out, false));
}

TEST_CASE("GA and BO config validation") {
    baselines::GaConfig g;
    g.population = 1;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = {};
    g.mutation_rate = 1.5;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    baselines::BoConfig b;
    b.lengthscale = 0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
}

TEST_CASE("GP interpolates training points and keeps variance non-negative") {
    baselines::GaussianProcess gp(0.3, 1.0, 0.0);
    const std::vector<std::vector<double>> x{{0.1, 0.2}, {0.5, 0.5}, {0.9, 0.1}};
    const std::vector<double> y{1.0, -0.5, 2.0};
    gp.fit(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto pr = gp.predict(x[i]);
        CHECK(pr.mean == doctest::Approx(y[i]).epsilon(1e-8));
    }
    SeedStream rng(1);
    for (int i = 0; i < 500; ++i) {
        const std::vector<double> q{rng.uniform(), rng.uniform()};
        CHECK(gp.predict(q).variance >= 0.0);
    }
}

TEST_CASE("GP survives duplicate inputs via jitter") {
    baselines::GaussianProcess gp(0.3, 1.0, 0.0);
    gp.fit({{0.5}, {0.5}, {0.5}}, {1.0, 1.0, 1.0});
    CHECK(gp.jitter_used() > 0.0);
}

TEST_CASE("expected improvement") {
    CHECK(baselines::expected_improvement(1.0, 0.0, 1.0) == 0.0);
    CHECK(baselines::expected_improvement(2.0, 0.0, 1.0) == doctest::Approx(1.0));
    // Zero mean gap: EI = sigma * phi(0).
    CHECK(baselines::expected_improvement(1.0, 4.0, 1.0) == doctest::Approx(2.0 / std::sqrt(2.0 * M_PI)));
    SeedStream rng(2);
    for (int i = 0; i < 1000; ++i)
        CHECK(baselines::expected_improvement(rng.uniform(-3, 3), rng.uniform(0, 4), rng.uniform(-3, 3)) >= 0.0);
}

TEST_CASE("BO finds the optimum of a one-slot toy quickly") {
    space::SearchSpace s;
    s.layer_count = 1;
    s.width_options = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
    s.bit_options = {8};
    baselines::SearchProblem p;
    p.space = s;
    p.evaluator = [](const space::ArchDescriptor& d) {
        const double w = d.layers[0].width;
        return -(w - 11) * (w - 11) / 100.0;
    };
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        baselines::BoConfig cfg;
        cfg.initial_samples = 5;
        cfg.iterations = 25;
        cfg.seed = seed;
        const auto out = baselines::bo_search(p, cfg);
        CHECK(out.evaluations <= 30);
        hits += out.best.layers[0].width == 11;
    }
    CHECK(hits >= 9);
}

TEST_CASE("BO best always appears in its log, and constraints are respected") {
    const auto s = space::SearchSpace::desk_default();
    auto p = storage_toy(s);
    p.evaluator = [s](const space::ArchDescriptor& d) { return space::encode(d, s)[0]; };
    p.constraints.max_storage_norm = 0.3;
    baselines::BoConfig cfg;
    cfg.iterations = 20;
    cfg.random_candidates = 256;
    const auto out = baselines::bo_search(p, cfg);
    bool found = false;
    for (const auto& e : out.log) found = found || (e.descriptor == out.best && e.objective == out.best_objective);
    CHECK(found);
    CHECK(out.best_objective > -1.0);
    CHECK(out.wall_seconds >= 0.0);
}
