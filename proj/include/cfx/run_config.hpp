#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/benchmark.hpp"
#include "cfx/params.hpp"

namespace cfx {

struct ConfigSection {
    std::string name;
    Params params;
    std::size_t line = 0;
};

/// `key = value` lines under `[section]` headers; `#` and `;` start
/// comments. Keys before the first header, duplicate keys and duplicate
/// sections are ConfigErrors.
std::vector<ConfigSection> parse_config_sections(std::string_view text);

/// Full benchmark config. Relative paths resolve against base_dir and must
/// exist; unknown sections, keys and generator ids are rejected.
BenchmarkConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = ".");
BenchmarkConfig load_run_config(const std::filesystem::path& path);

/// [classifier] section settings: model, hidden, activation, epochs,
/// learning_rate, batch_size, momentum, k, metric, dtw_band.
ClassifierSpec classifier_spec_from(const Params& params);
const std::vector<std::string>& classifier_keys();

/// Section by name, or an empty Params.
Params section_params(const std::vector<ConfigSection>& sections, std::string_view name);

}  // namespace cfx
