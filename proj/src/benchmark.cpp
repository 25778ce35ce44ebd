#include "cfx/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "cfx/errors.hpp"
#include "cfx/generators.hpp"
#include "cfx/rng.hpp"

namespace cfx {

namespace {

struct PreparedDataset {
    std::string name;
    Dataset train;
    Dataset pool;
    std::unique_ptr<Classifier> model;
    double train_accuracy = 0.0;
    std::optional<Autoencoder> autoencoder;
    std::vector<std::size_t> sample;
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

nlohmann::json optional_path(const std::optional<std::filesystem::path>& p) {
    return p ? nlohmann::json(p->generic_string()) : nlohmann::json(nullptr);
}

std::pair<Dataset, Dataset> load_spec(const DatasetSpec& spec) {
    if (spec.synthetic) {
        PlantedPatternSpec train_spec = *spec.synthetic;
        PlantedPatternSpec test_spec = train_spec;
        test_spec.seed = derive_seed(train_spec.seed, {0x74657374});
        Dataset train = make_planted_pattern(train_spec);
        Dataset test = make_planted_pattern(test_spec);
        train.set_problem_name(spec.name);
        test.set_problem_name(spec.name);
        return {std::move(train), std::move(test)};
    }
    if (!spec.path) throw ConfigError("dataset '" + spec.name + "' has neither a path nor a synthetic generator");
    Dataset train = load_dataset(*spec.path, spec.format);
    Dataset pool = spec.test_path ? load_dataset(*spec.test_path, spec.format) : train;
    if (pool.shape() != train.shape()) throw ShapeError("test split shape differs from the training split");
    if (pool.class_names() != train.class_names()) {
        // Relabel the pool onto the training class list.
        std::vector<LabeledInstance> relabeled;
        for (const auto& inst : pool.instances()) {
            const auto idx = train.class_index(pool.class_names()[inst.label]);
            if (!idx) throw ConfigError("test class '" + pool.class_names()[inst.label] + "' is absent from training data");
            relabeled.push_back({inst.series, *idx});
        }
        pool = Dataset(std::move(relabeled), train.class_names());
    }
    if (spec.znormalize) {
        const NormStats stats = compute_norm_stats(train);
        train = apply_normalization(train, stats);
        pool = apply_normalization(pool, stats);
    }
    train.set_problem_name(spec.name);
    pool.set_problem_name(spec.name);
    return {std::move(train), std::move(pool)};
}

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec, const Dataset& train, std::uint64_t seed,
                                             double& accuracy_out) {
    std::unique_ptr<Classifier> model;
    if (spec.kind == "knn") {
        model = std::make_unique<KnnClassifier>(train, spec.k, spec.metric);
    } else if (spec.kind == "mlp") {
        MLPSpec mlp = spec.mlp;
        mlp.seed = seed;
        model = std::make_unique<MlpClassifier>(train_mlp(train, mlp));
    } else {
        throw ConfigError("classifier model must be mlp or knn, got '" + spec.kind + "'");
    }
    accuracy_out = accuracy(*model, train);
    return model;
}

std::filesystem::path marker_path(const std::filesystem::path& dir, const BenchmarkRow& row) {
    return dir / "cells" / (row.dataset + "__" + row.generator + "__" + std::to_string(row.instance) + ".json");
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::json to_json(const BenchmarkConfig& cfg) {
    nlohmann::json j;
    j["datasets"] = nlohmann::json::array();
    for (const auto& d : cfg.datasets) {
        nlohmann::json e{{"name", d.name},
                         {"path", optional_path(d.path)},
                         {"test_path", optional_path(d.test_path)},
                         {"format", format_name(d.format)},
                         {"znormalize", d.znormalize}};
        if (d.synthetic) {
            const auto& s = *d.synthetic;
            e["synthetic"] = {{"instances", s.instances}, {"length", s.length},           {"channels", s.channels},
                              {"bump_start", s.bump_start}, {"bump_length", s.bump_length}, {"bump_height", s.bump_height},
                              {"noise", s.noise},           {"signal_channel", s.signal_channel}, {"seed", s.seed}};
        }
        j["datasets"].push_back(e);
    }
    const auto& c = cfg.classifier;
    j["classifier"] = {{"kind", c.kind},
                       {"hidden", c.mlp.hidden_sizes},
                       {"activation", activation_name(c.mlp.activation)},
                       {"learning_rate", c.mlp.learning_rate},
                       {"epochs", c.mlp.epochs},
                       {"batch_size", c.mlp.batch_size},
                       {"momentum", c.mlp.momentum},
                       {"k", c.k},
                       {"metric", metric_name(c.metric.metric)},
                       {"dtw_band", c.metric.dtw_band ? nlohmann::json(*c.metric.dtw_band) : nlohmann::json(nullptr)}};
    j["generators"] = nlohmann::json::array();
    for (const auto& g : cfg.generators) j["generators"].push_back({{"id", g.id}, {"params", g.params.values()}});
    const auto& e = cfg.evaluation;
    j["evaluation"] = {{"instances", e.instances},
                       {"seed", e.seed},
                       {"target", e.target},
                       {"stability_trials", e.stability_trials},
                       {"stability_sigma", e.stability_sigma},
                       {"change_tolerance", e.metrics.change_tolerance},
                       {"dtw_band", e.metrics.dtw_band ? nlohmann::json(*e.metrics.dtw_band) : nlohmann::json(nullptr)},
                       {"max_lag", e.metrics.max_lag ? nlohmann::json(*e.metrics.max_lag) : nlohmann::json(nullptr)},
                       {"ood_metric", metric_name(e.metrics.metric.metric)}};
    return j;
}

std::uint64_t config_digest(const BenchmarkConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    return fnv1a(text.data(), text.size());
}

nlohmann::json to_json(const BenchmarkRow& row, bool include_timing) {
    nlohmann::json j{{"dataset", row.dataset},
                     {"generator", row.generator},
                     {"instance", row.instance},
                     {"target", row.target},
                     {"true_label", row.true_label},
                     {"seed", row.seed},
                     {"error", row.error ? nlohmann::json(*row.error) : nlohmann::json(nullptr)},
                     {"metrics", row.metrics ? to_json(*row.metrics, include_timing) : nlohmann::json(nullptr)},
                     {"diversity", row.diversity},
                     {"set_size", row.set_size},
                     {"budget_exhausted", row.budget_exhausted}};
    if (row.stability) {
        j["stability"] = {{"cf_distance_mean", row.stability->cf_distance_mean},
                          {"validity_retention", row.stability->validity_retention},
                          {"failed_trials", row.stability->failed_trials}};
    } else {
        j["stability"] = nullptr;
    }
    return j;
}

BenchmarkRow benchmark_row_from_json(const nlohmann::json& j) {
    BenchmarkRow row;
    row.dataset = j.at("dataset").get<std::string>();
    row.generator = j.at("generator").get<std::string>();
    row.instance = j.at("instance").get<std::size_t>();
    row.target = j.at("target").get<ClassLabel>();
    row.true_label = j.at("true_label").get<ClassLabel>();
    row.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("error").is_null()) row.error = j.at("error").get<std::string>();
    if (!j.at("metrics").is_null()) row.metrics = metric_report_from_json(j.at("metrics"));
    row.diversity = j.at("diversity").get<double>();
    row.set_size = j.at("set_size").get<std::size_t>();
    row.budget_exhausted = j.at("budget_exhausted").get<bool>();
    if (j.contains("stability") && !j.at("stability").is_null()) {
        const auto& s = j.at("stability");
        row.stability = StabilityReport{s.at("cf_distance_mean").get<double>(), s.at("validity_retention").get<double>(),
                                        s.at("failed_trials").get<std::size_t>()};
    }
    return row;
}

AggregateStat summarize(std::vector<double> values) {
    AggregateStat s;
    s.n = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(s.n - 1));
    }
    s.median = median_of(std::move(values));
    return s;
}

std::vector<BenchmarkAggregate> aggregate_rows(const std::vector<BenchmarkRow>& rows) {
    std::vector<BenchmarkAggregate> out;
    std::vector<std::vector<const BenchmarkRow*>> groups;
    for (const auto& row : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const BenchmarkAggregate& a) {
            return a.dataset == row.dataset && a.generator == row.generator;
        });
        if (it == out.end()) {
            out.push_back({row.dataset, row.generator});
            groups.emplace_back();
            it = out.end() - 1;
        }
        groups[static_cast<std::size_t>(it - out.begin())].push_back(&row);
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        auto& agg = out[g];
        agg.rows = groups[g].size();
        for (const auto* row : groups[g]) {
            if (row->error) ++agg.failures;
            if (row->metrics && row->metrics->validity) ++agg.valid;
        }
        agg.validity_rate = agg.rows == 0 ? 0.0 : static_cast<double>(agg.valid) / static_cast<double>(agg.rows);
        auto fields = metric_fields();
        fields.push_back("diversity");
        for (const auto& f : fields) {
            std::vector<double> values;
            for (const auto* row : groups[g]) {
                if (!row->metrics) continue;
                if (f == "diversity") {
                    values.push_back(row->diversity);
                } else if (const auto v = metric_value(*row->metrics, f)) {
                    values.push_back(*v);
                }
            }
            agg.stats[f] = summarize(std::move(values));
        }
    }
    return out;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    if (cfg.datasets.empty()) throw ConfigError("benchmark config lists no dataset");
    if (cfg.generators.empty()) throw ConfigError("benchmark config lists no generator");
    if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
    for (const auto& g : cfg.generators) validate_generator_params(g.id, g.params);
    const std::uint64_t seed = cfg.evaluation.seed;
    const std::string started = timestamp();

    std::vector<PreparedDataset> prepared;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        const auto& spec = cfg.datasets[d];
        auto [train, pool] = load_spec(spec);
        PreparedDataset p{spec.name, std::move(train), std::move(pool)};
        p.model = train_classifier(cfg.classifier, p.train, derive_seed(seed, {0x636c6173, d}), p.train_accuracy);
        for (const auto& g : cfg.generators) {
            if (generator_needs_autoencoder(g.id) && !p.autoencoder) {
                p.autoencoder = train_autoencoder(p.train, autoencoder_latent_dim(g.params, p.train.shape()),
                                                  autoencoder_spec(g.params, derive_seed(seed, {0x61650000, d})));
            }
        }
        std::vector<std::size_t> order(p.pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(seed, {0x73616d70, d});
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(std::min(order.size(), cfg.evaluation.instances));
        std::sort(order.begin(), order.end());
        p.sample = std::move(order);
        prepared.push_back(std::move(p));
    }

    struct Cell {
        std::size_t dataset;
        std::size_t instance;
        std::size_t generator;
    };
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < prepared.size(); ++d) {
        for (auto i : prepared[d].sample) {
            for (std::size_t g = 0; g < cfg.generators.size(); ++g) cells.push_back({d, i, g});
        }
    }

    const bool markers = !cfg.output.dir.empty();
    if (markers) std::filesystem::create_directories(cfg.output.dir / "cells");

    std::vector<BenchmarkRow> rows(cells.size());
    const auto run_cell = [&](std::size_t c) {
        const Cell& cell = cells[c];
        const PreparedDataset& p = prepared[cell.dataset];
        const GeneratorSpec& gen = cfg.generators[cell.generator];
        BenchmarkRow row;
        row.dataset = p.name;
        row.generator = gen.id;
        row.instance = cell.instance;
        row.seed = derive_seed(seed, {cell.dataset, fnv1a(gen.id.data(), gen.id.size()), cell.instance});
        const LabeledInstance& inst = p.pool[cell.instance];
        row.true_label = inst.label;

        if (markers && cfg.output.resume) {
            const auto path = marker_path(cfg.output.dir, row);
            if (std::filesystem::exists(path)) {
                rows[c] = benchmark_row_from_json(nlohmann::json::parse(read_text_file(path)));
                return;
            }
        }

        try {
            if (cfg.evaluation.target == "auto") {
                row.target = p.model->predict_proba(inst.series).runner_up();
            } else {
                const auto idx = p.train.class_index(cfg.evaluation.target);
                if (!idx) throw ConfigError("target class '" + cfg.evaluation.target + "' not in dataset " + p.name);
                row.target = *idx;
            }
            const GeneratorContext ctx{*p.model, p.train, p.autoencoder ? &*p.autoencoder : nullptr};
            const auto t0 = std::chrono::steady_clock::now();
            const CounterfactualSet set = run_generator(gen.id, gen.params, ctx, inst.series, row.target, row.seed);
            const auto t1 = std::chrono::steady_clock::now();
            MetricReport m = evaluate_one(*p.model, p.train, inst.series, set.best(), cfg.evaluation.metrics);
            m.generation_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            m.model_calls = static_cast<double>(std::max(set.model_calls, set.best().model_calls));
            row.metrics = m;
            row.diversity = diversity(set, cfg.evaluation.metrics.metric);
            row.set_size = set.members.size();
            row.budget_exhausted = set.budget_exhausted;
            if (cfg.evaluation.stability_trials > 0) {
                const GeneratorFn fn = [&](const TimeSeries& s, std::uint64_t sd) {
                    return run_generator(gen.id, gen.params, ctx, s, row.target, sd).best();
                };
                row.stability = stability(fn, *p.model, inst.series, row.target, cfg.evaluation.stability_sigma,
                                          cfg.evaluation.stability_trials, row.seed);
            }
        } catch (const Error& e) {
            row.error = e.what();
            row.metrics.reset();
        }
        if (markers) write_text_file(marker_path(cfg.output.dir, row), to_json(row).dump());
        rows[c] = std::move(row);
    };

    if (cfg.jobs == 1) {
        for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr failure;
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < std::min(cfg.jobs, cells.size()); ++w) {
            workers.emplace_back([&] {
                for (std::size_t c = next++; c < cells.size(); c = next++) {
                    try {
                        run_cell(c);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    BenchmarkReport report;
    report.rows = std::move(rows);
    report.aggregates = aggregate_rows(report.rows);
    report.run = {{"seed", seed},
                  {"config_digest", config_digest(cfg)},
                  {"jobs", cfg.jobs},
                  {"started", started},
                  {"finished", timestamp()},
                  {"generators", nlohmann::json::array()},
                  {"datasets", nlohmann::json::array()},
                  {"ood_score", "nearest target-class distance over mean leave-one-out nearest-neighbour distance"}};
    for (const auto& g : cfg.generators) report.run["generators"].push_back(g.id);
    for (const auto& p : prepared) {
        report.run["datasets"].push_back({{"name", p.name},
                                          {"train_size", p.train.size()},
                                          {"pool_size", p.pool.size()},
                                          {"channels", p.train.channels()},
                                          {"length", p.train.length()},
                                          {"classes", p.train.class_names()},
                                          {"classifier", cfg.classifier.kind},
                                          {"train_accuracy", p.train_accuracy},
                                          {"instances", p.sample}});
    }
    return report;
}

nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timing) {
    nlohmann::json j;
    j["run"] = report.run;
    if (!include_timing) {
        j["run"].erase("started");
        j["run"].erase("finished");
        j["run"].erase("jobs");
    }
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) j["rows"].push_back(to_json(row, include_timing));
    j["aggregates"] = nlohmann::json::array();
    for (const auto& a : report.aggregates) {
        nlohmann::json stats = nlohmann::json::object();
        for (const auto& [name, s] : a.stats) {
            if (name == "generation_time_ms" && !include_timing) continue;
            stats[name] = {{"n", s.n}, {"mean", s.mean}, {"median", s.median}, {"stddev", s.stddev}};
        }
        j["aggregates"].push_back({{"dataset", a.dataset},
                                   {"generator", a.generator},
                                   {"rows", a.rows},
                                   {"failures", a.failures},
                                   {"valid", a.valid},
                                   {"validity_rate", a.validity_rate},
                                   {"stats", stats}});
    }
    return j;
}

std::string report_to_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "dataset,generator,instance,target,true_label,seed,error,validity,achieved";
    for (const auto& f : metric_fields()) out << ',' << f;
    out << ",diversity,set_size,budget_exhausted,stability_cf_distance_mean,stability_validity_retention\n";
    for (const auto& row : report.rows) {
        out << csv_escape(row.dataset) << ',' << row.generator << ',' << row.instance << ',' << row.target << ','
            << row.true_label << ',' << row.seed << ',' << csv_escape(row.error.value_or("")) << ',';
        if (row.metrics) {
            out << (row.metrics->validity ? "true" : "false") << ',' << row.metrics->achieved;
            for (const auto& f : metric_fields()) {
                const auto v = metric_value(*row.metrics, f);
                out << ',' << (v ? format_double(*v) : "");
            }
        } else {
            out << "false,";
            for (std::size_t k = 0; k < metric_fields().size(); ++k) out << ',';
        }
        out << ',' << format_double(row.diversity) << ',' << row.set_size << ',' << (row.budget_exhausted ? "true" : "false");
        if (row.stability) {
            out << ',' << format_double(row.stability->cf_distance_mean) << ','
                << format_double(row.stability->validity_retention);
        } else {
            out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

void write_report(const BenchmarkReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_text_file(dir / "report.csv", report_to_csv(report));
}

std::string summary_table(const BenchmarkReport& report) {
    std::vector<std::string> order;
    for (const auto& row : report.rows) {
        if (std::find(order.begin(), order.end(), row.generator) == order.end()) order.push_back(row.generator);
    }
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %9s %10s %10s %10s %10s\n", "generator", "validity", "median_l2",
                  "median_chg", "median_seg", "median_ms");
    out << line;
    for (const auto& g : order) {
        std::size_t n = 0, valid = 0;
        std::vector<double> l2, chg, seg, ms;
        for (const auto& row : report.rows) {
            if (row.generator != g) continue;
            ++n;
            if (!row.metrics) continue;
            if (row.metrics->validity) ++valid;
            l2.push_back(row.metrics->l2);
            chg.push_back(row.metrics->changed_fraction);
            seg.push_back(row.metrics->segment_count);
            ms.push_back(row.metrics->generation_time_ms);
        }
        std::snprintf(line, sizeof line, "%-14s %9.3f %10.4f %10.4f %10.1f %10.2f\n", g.c_str(),
                      n == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(n), median_of(l2),
                      median_of(chg), median_of(seg), median_of(ms));
        out << line;
    }
    return out.str();
}

}  // namespace cfx
