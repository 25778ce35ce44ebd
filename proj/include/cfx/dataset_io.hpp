#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cfx/timeseries.hpp"

namespace cfx {

enum class DatasetFormat { ucr_tsv, ts };

DatasetFormat parse_format(std::string_view name);
std::string_view format_name(DatasetFormat format);

/// UCR archive text: one instance per line, a label token followed by the
/// values. Tabs, commas and spaces all separate tokens; a run of separators
/// counts as one. Labels become dense indices in first-appearance order.
Dataset parse_ucr_tsv(std::string_view text);

/// Restricted sktime `.ts` grammar: `@problemName`, `@univariate`,
/// `@classLabel`, `@data`, plus the equal-length/no-missing/no-timestamp
/// declarations found in archive files. Channels are `:`-separated, values
/// comma-separated, the last field is the class label.
Dataset parse_ts(std::string_view text);

/// Exact inverse of the parsers: values are written in shortest round-trip form.
std::string serialize_dataset(const Dataset& dataset, DatasetFormat format);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// `.ts` extension selects the ts grammar, anything else the UCR grammar.
DatasetFormat guess_format(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

}  // namespace cfx
