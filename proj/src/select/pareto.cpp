#include "inag/select/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace inag::select {

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    return a.performance >= b.performance && a.storage <= b.storage &&
           (a.performance > b.performance || a.storage < b.storage);
}

std::vector<bool> pareto_front(std::span<const ObjectivePoint> points) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].performance != points[b].performance) return points[a].performance > points[b].performance;
        return points[a].storage < points[b].storage;
    });

    std::vector<bool> flags(n, false);
    // best_storage: minimum storage among points with strictly higher performance.
    double best_storage = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        const double perf = points[order[i]].performance;
        while (j < n && points[order[j]].performance == perf) ++j;
        // Within a tie group the first entry has the least storage.
        const double group_min = points[order[i]].storage;
        for (std::size_t k = i; k < j; ++k) {
            const double s = points[order[k]].storage;
            flags[order[k]] = s < best_storage && s == group_min;
        }
        best_storage = std::min(best_storage, group_min);
        i = j;
    }
    return flags;
}

}  // namespace inag::select
