#include "cfx/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cfx {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    const auto x = a.as_array();
    const auto y = b.as_array();
    bool strictly = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] > y[k]) return false;
        if (x[k] < y[k]) strictly = true;
    }
    return strictly;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> objectives) {
    const std::size_t n = objectives.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(objectives[p], objectives[q])) {
                dominated_by_me[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(objectives[q], objectives[p])) {
                dominated_by_me[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated_by_me[p]) {
                if (--domination_count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), kInf);
        return distance;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < ObjectiveVector::size(); ++k) {
        const auto value = [&](std::size_t i) { return front[i].as_array()[k]; };
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        distance[order.front()] = kInf;
        distance[order.back()] = kInf;
        const double span = value(order.back()) - value(order.front());
        if (span <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            distance[order[i]] += (value(order[i + 1]) - value(order[i - 1])) / span;
        }
    }
    return distance;
}

}  // namespace cfx
