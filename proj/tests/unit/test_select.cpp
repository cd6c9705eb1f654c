#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "inag/common/error.hpp"
#include "inag/lab/analytics.hpp"
#include "inag/select/inag.hpp"
#include "inag/select/pareto.hpp"
#include "selection_oracle.hpp"

using namespace inag;
using select::AnnotatedCandidate;
using select::Criterion;
using space::ArchDescriptor;

namespace {

space::SearchSpace toy_space() {
    space::SearchSpace s;
    s.layer_count = 1;
    s.width_options = {4, 8, 16};
    s.bit_options = {2, 4, 8};
    return s;
}

// Tester that reads performance off the first width code.
select::Tester width_tester(const space::SearchSpace& s) {
    return [s](const std::vector<ArchDescriptor>& bag) {
        std::vector<double> out;
        for (const auto& d : bag) out.push_back(space::encode(d, s)[0]);
        return out;
    };
}

}  // namespace

TEST_CASE("pareto_front examples") {
    const std::vector<select::ObjectivePoint> pts{{0.9, 100}, {0.8, 50}, {0.7, 120}};
    CHECK(select::pareto_front(pts) == std::vector<bool>{true, true, false});
    const std::vector<select::ObjectivePoint> one{{0.5, 5}};
    CHECK(select::pareto_front(one) == std::vector<bool>{true});
    const std::vector<select::ObjectivePoint> dup{{0.5, 5}, {0.5, 5}, {0.4, 6}};
    CHECK(select::pareto_front(dup) == std::vector<bool>{true, true, false});
    CHECK(select::pareto_front({}).empty());
}

TEST_CASE("pareto_front equals the pairwise oracle") {
    SeedStream rng(5);
    for (int t = 0; t < 300; ++t) {
        std::vector<select::ObjectivePoint> pts(rng.index(60));
        for (auto& p : pts) p = {static_cast<double>(rng.index(8)), static_cast<double>(rng.index(8))};
        CHECK(select::pareto_front(pts) == testing::pareto_oracle(pts));
    }
}

TEST_CASE("confidence selector") {
    const auto s = toy_space();
    const ArchDescriptor d{{{8, 4}}};  // width code 0.5
    auto a = select::annotate({d}, width_tester(s), 0.5, 1.0, s, {});
    CHECK(a[0].dist_f == 0.0);
    CHECK(select::confidence_select(a, 0.0).size() == 1);

    select::Tester fixed = [](const std::vector<ArchDescriptor>& bag) { return std::vector<double>(bag.size(), 0.7); };
    a = select::annotate({d}, fixed, 0.8, 1.0, s, {});
    CHECK(a[0].dist_f == doctest::Approx(0.1));
    CHECK(select::confidence_select(a, 0.0).empty());
    a = select::annotate({d}, fixed, 0.8, 2.0, s, {});
    CHECK(a[0].dist_f == doctest::Approx(0.05));
    CHECK_THROWS(select::annotate({d}, fixed, 0.8, 0.0, s, {}));
}

TEST_CASE("storage and energy normalization against the maximal descriptor") {
    const auto s = toy_space();
    const auto a = select::annotate({space::maximal_descriptor(s), space::minimal_descriptor(s)}, width_tester(s), 0.5,
                                    1.0, s, {});
    CHECK(a[0].storage_norm == 1.0);
    CHECK(a[0].energy_norm == 1.0);
    CHECK(a[1].storage_norm < 1.0);
    CHECK(select::storage_select(a, 1.0).size() == 2);
    CHECK(select::storage_select(a, std::nullopt).size() == 2);

    // p = 0: energy depends on MACs only.
    const ArchDescriptor lo{{{8, 2}}};
    const ArchDescriptor hi{{{8, 8}}};
    const auto e = select::annotate({lo, hi}, width_tester(s), 0.5, 1.0, s, {1.0, 0.0});
    CHECK(e[0].energy_norm == e[1].energy_norm);
}

TEST_CASE("storage_select: three-point bag") {
    std::vector<AnnotatedCandidate> bag(3);
    bag[0].storage_norm = 0.3;
    bag[1].storage_norm = 0.6;
    bag[2].storage_norm = 0.9;
    const auto kept = select::storage_select(bag, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].storage_norm == 0.3);
}

TEST_CASE("output_select tie order") {
    std::vector<AnnotatedCandidate> bag(2);
    bag[0].dist_f = 0.1;
    bag[0].storage_norm = 0.5;
    bag[1].dist_f = 0.1;
    bag[1].storage_norm = 0.2;
    CHECK(select::output_select(bag, Criterion::dist_f)->storage_norm == 0.2);
    CHECK(select::output_select({bag[0]}, Criterion::energy)->storage_norm == 0.5);
    CHECK_FALSE(select::output_select({}, Criterion::dist_f).has_value());
}

TEST_CASE("selectors equal brute-force filters on random bags") {
    const auto s = space::SearchSpace::desk_default();
    SeedStream rng(77);
    for (int t = 0; t < 200; ++t) {
        const auto bag = testing::random_bag(rng, s, rng.index(120));
        const double dist = rng.uniform();
        const double st = rng.uniform();
        const double en = rng.uniform();
        CHECK(select::confidence_select(bag, dist) == testing::filter_by(bag, &AnnotatedCandidate::dist_f, dist));
        CHECK(select::storage_select(bag, st) == testing::filter_by(bag, &AnnotatedCandidate::storage_norm, st));
        CHECK(select::energy_select(bag, en) == testing::filter_by(bag, &AnnotatedCandidate::energy_norm, en));
        for (Criterion c : {Criterion::dist_f, Criterion::storage, Criterion::energy})
            CHECK(select::output_select(bag, c) == testing::argmin_oracle(bag, c));

        // Pipeline survivors are the intersection of the individual filters.
        const auto piped = select::energy_select(select::storage_select(select::confidence_select(bag, dist), st), en);
        std::vector<AnnotatedCandidate> inter;
        for (const auto& c : bag)
            if (c.dist_f <= dist && c.storage_norm <= st && c.energy_norm <= en) inter.push_back(c);
        CHECK(piped == inter);
    }
}

TEST_CASE("inag_run") {
    const auto s = toy_space();
    const std::vector<ArchDescriptor> fixed_bag{{{{4, 2}}}, {{{8, 4}}}, {{{16, 8}}}, {{{8, 8}}}};
    const select::BagSource stub = [&](double, std::size_t, std::uint64_t) { return fixed_bag; };
    select::InagConfig cfg;
    cfg.bag_size = fixed_bag.size();

    SUBCASE("unconstrained run picks the closest candidate") {
        const auto r = select::inag_run(stub, width_tester(s), 0.5, {}, s, cfg);
        REQUIRE(r.chosen.has_value());
        // Width codes: 4 -> 1/6, 8 -> 0.5, 16 -> 5/6. Two width-8 candidates
        // tie on dist_f; the 4-bit one stores less.
        CHECK(r.chosen->descriptor == fixed_bag[1]);
        REQUIRE(r.attempts.size() == 1);
        CHECK(r.attempts[0].after_energy == 4);
    }
    SUBCASE("hand-computed constrained pipeline") {
        select::ConstraintSet cons;
        cons.max_dist = 0.4;
        cons.max_storage_norm = 0.2;
        const auto r = select::inag_run(stub, width_tester(s), 0.5, cons, s, cfg);
        // Base: 1 -> 16 -> 1 at 8 bits: (32 + 16 + 17 + 1) * 8 = 528 bits.
        // Every width lies within 1/3 of 0.5, so dist <= 0.4 keeps all four.
        // Storage of 4@2 is (8 + 4 + 5 + 1) * 2 = 36 -> 0.068; 8@4 is
        // (16 + 8 + 9 + 1) * 4 = 136 -> 0.258; the 8-bit ones are larger.
        REQUIRE(r.attempts.size() == 1);
        CHECK(r.attempts[0].after_confidence == 4);
        CHECK(r.attempts[0].after_storage == 1);
        REQUIRE(r.chosen.has_value());
        CHECK(r.chosen->descriptor == fixed_bag[0]);
        CHECK(r.chosen->storage_norm == doctest::Approx(36.0 / 528.0));
    }
    SUBCASE("infeasible storage walks down to c_min") {
        select::ConstraintSet cons;
        cons.max_storage_norm = 0.0;
        const auto r = select::inag_run(stub, width_tester(s), 0.8, cons, s, cfg);
        CHECK_FALSE(r.chosen.has_value());
        REQUIRE(r.attempts.size() == 8);
        for (std::size_t i = 1; i < r.attempts.size(); ++i)
            CHECK(r.attempts[i].condition < r.attempts[i - 1].condition);
        CHECK(r.attempts.back().condition >= cfg.c_min - 1e-12);
        for (const auto& a : r.attempts) {
            CHECK(a.after_confidence <= a.bag);
            CHECK(a.after_storage <= a.after_confidence);
            CHECK(a.after_energy <= a.after_storage);
        }
        CHECK_FALSE(select::report_text(r).empty());
        CHECK(select::report_json(r)["chosen"].is_null());
    }
}

TEST_CASE("ConstraintSet validation") {
    select::ConstraintSet c;
    c.max_storage_norm = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.max_storage_norm = 0.5;
    c.max_dist = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
