#pragma once

// Brute-force reference implementations for the selectors and the Pareto
// front. Deliberately naive: linear scans and O(n^2) pairwise checks.

#include <optional>
#include <vector>

#include "inag/common/rng.hpp"
#include "inag/select/inag.hpp"
#include "inag/select/pareto.hpp"

namespace inag::testing {

inline std::vector<select::AnnotatedCandidate> filter_by(const std::vector<select::AnnotatedCandidate>& bag,
                                                         double select::AnnotatedCandidate::*field,
                                                         std::optional<double> bound) {
    std::vector<select::AnnotatedCandidate> out;
    for (const auto& c : bag)
        if (!bound || c.*field <= *bound) out.push_back(c);
    return out;
}

inline bool key_less(const select::AnnotatedCandidate& a, const select::AnnotatedCandidate& b,
                     select::Criterion criterion) {
    auto primary = [&](const select::AnnotatedCandidate& c) {
        switch (criterion) {
            case select::Criterion::dist_f: return c.dist_f;
            case select::Criterion::storage: return c.storage_norm;
            case select::Criterion::energy: return c.energy_norm;
        }
        return c.dist_f;
    };
    if (primary(a) != primary(b)) return primary(a) < primary(b);
    if (a.dist_f != b.dist_f) return a.dist_f < b.dist_f;
    if (a.storage_norm != b.storage_norm) return a.storage_norm < b.storage_norm;
    if (a.energy_norm != b.energy_norm) return a.energy_norm < b.energy_norm;
    return a.descriptor < b.descriptor;
}

inline std::optional<select::AnnotatedCandidate> argmin_oracle(const std::vector<select::AnnotatedCandidate>& bag,
                                                               select::Criterion criterion) {
    std::optional<select::AnnotatedCandidate> best;
    for (const auto& c : bag) {
        bool beaten = false;
        for (const auto& o : bag)
            if (key_less(o, c, criterion)) beaten = true;
        if (!beaten && !best) best = c;
    }
    return best;
}

inline std::vector<bool> pareto_oracle(const std::vector<select::ObjectivePoint>& pts) {
    std::vector<bool> keep(pts.size(), true);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const bool ge = pts[j].performance >= pts[i].performance && pts[j].storage <= pts[i].storage;
            const bool strict = pts[j].performance > pts[i].performance || pts[j].storage < pts[i].storage;
            if (ge && strict) keep[i] = false;
        }
    return keep;
}

/// Random annotated bag. Values sit on a coarse grid so ties are common and
/// the tie-breaking chain is actually exercised.
inline std::vector<select::AnnotatedCandidate> random_bag(SeedStream& rng, const space::SearchSpace& space,
                                                          std::size_t n) {
    std::vector<select::AnnotatedCandidate> bag(n);
    auto grid = [&](std::size_t steps) { return static_cast<double>(rng.index(steps + 1)) / static_cast<double>(steps); };
    for (auto& c : bag) {
        c.descriptor = space::sample_uniform(space, rng);
        c.predicted = grid(20);
        c.dist_f = grid(10);
        c.storage_norm = grid(10);
        c.energy_norm = grid(10);
    }
    return bag;
}

}  // namespace inag::testing
