#pragma once

#include <array>
#include <span>
#include <vector>

namespace cfx {

/// Objectives minimized by the evolutionary search.
struct ObjectiveVector {
    double validity_gap = 0.0;  // max(0, 0.5 + margin - p_target)
    double proximity = 0.0;     // L2(x, x') / sqrt(C T)
    double sparsity = 0.0;      // changed fraction
    double segments = 0.0;      // changed segment count

    static constexpr std::size_t size() { return 4; }
    std::array<double, 4> as_array() const { return {validity_gap, proximity, sparsity, segments}; }
    bool operator==(const ObjectiveVector&) const = default;
};

/// a is no worse than b everywhere and strictly better somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Fast non-dominated sort. Front 0 is the non-dominated set; indices
/// within a front are ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> objectives);

/// NSGA-II crowding distance. Per-objective boundary points get +inf; a
/// front of at most two points is all +inf.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

}  // namespace cfx
