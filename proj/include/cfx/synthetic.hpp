#pragma once

#include <cstdint>

#include "cfx/timeseries.hpp"

namespace cfx {

/// Two-class toy: class 0 is gaussian noise, class 1 is the same noise plus
/// a smooth half-sine bump over [bump_start, bump_start + bump_length).
/// Labels alternate 0, 1, 0, ... so both classes are balanced.
struct PlantedPatternSpec {
    std::size_t instances = 200;
    std::size_t length = 100;
    std::size_t channels = 1;
    std::size_t bump_start = 40;
    std::size_t bump_length = 11;
    double bump_height = 2.0;
    double noise = 0.1;
    /// Channel carrying the bump; all other channels are pure noise.
    std::size_t signal_channel = 0;
    std::uint64_t seed = 0;
};

Dataset make_planted_pattern(const PlantedPatternSpec& spec);

}  // namespace cfx
