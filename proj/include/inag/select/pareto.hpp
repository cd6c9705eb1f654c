#pragma once

#include <span>
#include <vector>

namespace inag::select {

struct ObjectivePoint {
    double performance = 0.0;  // maximized
    double storage = 0.0;      // minimized
};

/// true iff `a` dominates `b`: at least as good in both objectives and
/// strictly better in one.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

/// Non-dominated flags. Exact duplicates do not dominate each other, so all
/// copies of a frontier point are kept. O(n log n): sort by performance
/// descending then sweep the running storage minimum.
std::vector<bool> pareto_front(std::span<const ObjectivePoint> points);

}  // namespace inag::select
