#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/dataset_io.hpp"
#include "cfx/distances.hpp"
#include "cfx/metrics.hpp"
#include "cfx/params.hpp"
#include "cfx/synthetic.hpp"

namespace cfx {

struct DatasetSpec {
    std::string name = "dataset";
    /// Training file; unset for the synthetic planted-pattern set.
    std::optional<std::filesystem::path> path;
    /// Instances to explain are drawn from here, or from the training set when unset.
    std::optional<std::filesystem::path> test_path;
    DatasetFormat format = DatasetFormat::ucr_tsv;
    bool znormalize = false;
    std::optional<PlantedPatternSpec> synthetic;
};

struct ClassifierSpec {
    std::string kind = "mlp";  // mlp | knn
    MLPSpec mlp;
    std::size_t k = 1;
    DistanceConfig metric;
};

struct GeneratorSpec {
    std::string id;
    Params params;
};

struct EvaluationSpec {
    std::size_t instances = 25;
    std::uint64_t seed = 0;
    /// "auto" (runner-up class) or a class name.
    std::string target = "auto";
    std::size_t stability_trials = 0;
    double stability_sigma = 0.1;
    EvalConfig metrics;
};

struct OutputSpec {
    std::filesystem::path dir;
    bool resume = false;
};

struct BenchmarkConfig {
    std::vector<DatasetSpec> datasets;
    ClassifierSpec classifier;
    std::vector<GeneratorSpec> generators;
    EvaluationSpec evaluation;
    OutputSpec output;
    std::size_t jobs = 1;
};

/// Canonical form used for the config digest.
nlohmann::json to_json(const BenchmarkConfig& cfg);
std::uint64_t config_digest(const BenchmarkConfig& cfg);

struct BenchmarkRow {
    std::string dataset;
    std::string generator;
    /// Index into the instance pool of the dataset.
    std::size_t instance = 0;
    ClassLabel target = 0;
    ClassLabel true_label = 0;
    std::uint64_t seed = 0;
    std::optional<std::string> error;
    /// Metrics of the set's representative (its first member).
    std::optional<MetricReport> metrics;
    double diversity = 0.0;
    std::size_t set_size = 0;
    bool budget_exhausted = false;
    std::optional<StabilityReport> stability;
};

nlohmann::json to_json(const BenchmarkRow& row, bool include_timing = true);
BenchmarkRow benchmark_row_from_json(const nlohmann::json& j);

struct AggregateStat {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // sample stddev, 0 for n < 2
};

AggregateStat summarize(std::vector<double> values);

struct BenchmarkAggregate {
    std::string dataset;
    std::string generator;
    std::size_t rows = 0;
    std::size_t failures = 0;
    std::size_t valid = 0;
    /// valid / rows; failed cells count as invalid.
    double validity_rate = 0.0;
    std::map<std::string, AggregateStat> stats;
};

/// Groups rows by (dataset, generator) in first-appearance order.
std::vector<BenchmarkAggregate> aggregate_rows(const std::vector<BenchmarkRow>& rows);

struct BenchmarkReport {
    nlohmann::json run;
    std::vector<BenchmarkRow> rows;
    std::vector<BenchmarkAggregate> aggregates;
};

/// Trains, samples, generates and evaluates every (dataset, instance,
/// generator) cell. Per-cell seeds depend only on the global seed and the
/// cell's identity, so the report is independent of `jobs`. Failures are
/// recorded in the row. With an output dir, finished cells leave markers
/// that a resumed run reuses.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

/// Timing fields and timestamps are dropped when include_timing is false.
nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timing = true);
std::string report_to_csv(const BenchmarkReport& report);
/// Writes report.json and report.csv.
void write_report(const BenchmarkReport& report, const std::filesystem::path& dir);

/// Fixed-width table, one line per generator (pooled over datasets).
std::string summary_table(const BenchmarkReport& report);

}  // namespace cfx
