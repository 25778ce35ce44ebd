#include "cfx/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "cfx/errors.hpp"
#include "cfx/rng.hpp"

namespace cfx {

Dataset make_planted_pattern(const PlantedPatternSpec& spec) {
    if (spec.bump_start + spec.bump_length > spec.length) throw ConfigError("bump does not fit in the series");
    if (spec.signal_channel >= spec.channels) throw ConfigError("signal channel out of range");
    if (spec.instances == 0) throw ConfigError("planted pattern needs at least one instance");

    Rng rng = make_rng(spec.seed, {0x706c616eULL});
    std::normal_distribution<double> noise(0.0, spec.noise);

    std::vector<LabeledInstance> instances;
    instances.reserve(spec.instances);
    for (std::size_t i = 0; i < spec.instances; ++i) {
        const ClassLabel label = i % 2;
        TimeSeries s(spec.channels, spec.length, 0.0);
        for (double& v : s.values()) v = noise(rng);
        if (label == 1) {
            for (std::size_t k = 0; k < spec.bump_length; ++k) {
                const double phase = std::numbers::pi * static_cast<double>(k + 1) /
                                     static_cast<double>(spec.bump_length + 1);
                s(spec.signal_channel, spec.bump_start + k) += spec.bump_height * std::sin(phase);
            }
        }
        instances.push_back({std::move(s), label});
    }
    Dataset d(std::move(instances), {"0", "1"});
    d.set_problem_name("planted_pattern");
    return d;
}

}  // namespace cfx
