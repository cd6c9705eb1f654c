#include <map>
#include <set>

#include "doctest.h"
#include "inag/common/error.hpp"
#include "inag/space/search_space.hpp"

using namespace inag;
using space::ArchDescriptor;
using space::SearchSpace;

namespace {

SearchSpace small_space(std::vector<int> widths, std::vector<int> bits, std::size_t L) {
    SearchSpace s;
    s.layer_count = L;
    s.width_options = std::move(widths);
    s.bit_options = std::move(bits);
    return s;
}

// Every member of a small space, by odometer over slot indices.
std::vector<ArchDescriptor> enumerate(const SearchSpace& s) {
    std::vector<ArchDescriptor> out;
    std::vector<std::size_t> idx(s.vector_dim(), 0);
    while (true) {
        out.push_back(space::from_indices(idx, s));
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == s.options_in_slot(k)) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return out;
}

}  // namespace

TEST_CASE("SearchSpace validation") {
    CHECK_NOTHROW(SearchSpace::desk_default().validate());
    CHECK_THROWS_AS(small_space({4}, {8}, 0).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({}, {8}, 1).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({8, 4}, {8}, 1).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({4, 4}, {8}, 1).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({4}, {1}, 1).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({4}, {33}, 1).validate(), ConfigError);
    CHECK_THROWS_AS(small_space({0}, {8}, 1).validate(), ConfigError);
}

TEST_CASE("sample_uniform") {
    SUBCASE("single-option lists force the descriptor") {
        const auto s = small_space({16}, {4}, 3);
        SeedStream rng(1);
        for (int i = 0; i < 10; ++i) CHECK(space::sample_uniform(s, rng) == space::maximal_descriptor(s));
    }
    SUBCASE("two widths split evenly") {
        const auto s = small_space({4, 8}, {8}, 1);
        SeedStream rng(2);
        int fours = 0;
        for (int i = 0; i < 10000; ++i) fours += space::sample_uniform(s, rng).layers[0].width == 4;
        CHECK(fours >= 4700);
        CHECK(fours <= 5300);
    }
    SUBCASE("same seed, same descriptor") {
        SeedStream a(5);
        SeedStream b(5);
        const auto s = SearchSpace::desk_default();
        CHECK(space::sample_uniform(s, a) == space::sample_uniform(s, b));
    }
}

TEST_CASE("encode uses bin centers") {
    const auto s = small_space({4, 8}, {5}, 1);
    ArchDescriptor d{{{4, 5}}};
    CHECK(space::encode(d, s) == std::vector<double>{0.25, 0.5});
    d.layers[0].width = 8;
    CHECK(space::encode(d, s) == std::vector<double>{0.75, 0.5});
    d.layers[0].bits = 6;
    CHECK_THROWS_AS(space::encode(d, s), DomainError);
}

TEST_CASE("decode floors with a top clamp") {
    const auto s = small_space({1, 2, 3, 4, 5, 6, 7, 8}, {8}, 1);
    auto width_at = [&](double v) { return space::decode(std::vector<double>{v, 0.5}, s).layers[0].width; };
    CHECK(width_at(0.0) == 1);
    CHECK(width_at(1.0) == 8);
    CHECK(width_at(0.999) == 8);
    CHECK(width_at(0.125) == 2);
    CHECK_THROWS_AS(width_at(-0.01), DomainError);
    CHECK_THROWS_AS(width_at(1.01), DomainError);
    CHECK_THROWS_AS(space::decode(std::vector<double>{0.5}, s), ShapeError);
}

TEST_CASE("decode is monotone per slot") {
    const auto s = SearchSpace::desk_default();
    std::vector<double> v(s.vector_dim(), 0.5);
    int prev = 0;
    for (int i = 0; i <= 1000; ++i) {
        v[0] = i / 1000.0;
        const int w = space::decode(v, s).layers[0].width;
        CHECK(w >= prev);
        prev = w;
    }
}

TEST_CASE("decode(encode(d)) is the identity, exhaustively") {
    const auto s = small_space({4, 8, 16}, {2, 8}, 3);
    const auto all = enumerate(s);
    CHECK(all.size() == 216);
    for (const auto& d : all) CHECK(space::decode(space::encode(d, s), s) == d);
}

TEST_CASE("cardinality") {
    CHECK(space::cardinality(small_space({1, 2, 3}, {2, 4}, 2)).value == 36);
    CHECK(space::cardinality(small_space({1, 2, 3}, {2, 4}, 2)).value == enumerate(small_space({1, 2, 3}, {2, 4}, 2)).size());
    CHECK(space::cardinality(small_space({4, 8}, {2, 3, 4}, 4)).value ==
          enumerate(small_space({4, 8}, {2, 3, 4}, 4)).size());
    const auto desk = space::cardinality(SearchSpace::desk_default());
    CHECK(desk.value == 16777216ULL);
    CHECK_FALSE(desk.saturated);
    auto huge = SearchSpace::desk_default();
    huge.layer_count = 40;
    CHECK(space::cardinality(huge).saturated);
}

TEST_CASE("instantiate builds the described topology") {
    auto s = small_space({4}, {8}, 1);
    const auto net = space::instantiate(space::maximal_descriptor(s), s, 1);
    CHECK(net.input_dim() == 1);
    CHECK(net.layers()[0].out_dim() == 4);
    CHECK(net.output_dim() == 1);
    CHECK(net.parameter_count() == 13);
    CHECK(net.layers()[0].activation == nn::Activation::relu);
    CHECK(net.layers()[1].activation == nn::Activation::identity);

    auto cls = SearchSpace::desk_default(784, 10, space::TaskKind::classification);
    SeedStream rng(3);
    CHECK(space::instantiate(space::sample_uniform(cls, rng), cls, 2).output_dim() == 10);
}

TEST_CASE("descriptor JSON round-trip and ordering") {
    const auto s = SearchSpace::desk_default();
    SeedStream rng(4);
    for (int i = 0; i < 20; ++i) {
        const auto d = space::sample_uniform(s, rng);
        nlohmann::json j = d;
        CHECK(j.get<ArchDescriptor>() == d);
    }
    nlohmann::json sj = s;
    CHECK(sj.get<SearchSpace>() == s);
    sj["surprise"] = 1;
    CHECK_THROWS(sj.get<SearchSpace>());
    CHECK(space::minimal_descriptor(s) < space::maximal_descriptor(s));
}
