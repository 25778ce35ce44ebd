// cfx: train models, generate and evaluate counterfactuals, run benchmarks,
// plot overlays and list the method catalog.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfx/benchmark.hpp"
#include "cfx/catalog.hpp"
#include "cfx/dataset_io.hpp"
#include "cfx/errors.hpp"
#include "cfx/generators.hpp"
#include "cfx/metrics.hpp"
#include "cfx/model_io.hpp"
#include "cfx/run_config.hpp"
#include "cfx/svg.hpp"

namespace {

using nlohmann::json;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("CFX_SEED"); env != nullptr && *env != '\0') {
        return cfx::parse_u64(env, "CFX_SEED");
    }
    return 0;
}

/// format_double, but integral values keep a ".0" so they read as floats.
std::string float_text(double v) {
    std::string s = cfx::format_double(v);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

cfx::DatasetFormat resolve_format(const std::string& flag, const std::string& path) {
    return flag == "auto" ? cfx::guess_format(path) : cfx::parse_format(flag);
}

std::vector<cfx::ConfigSection> optional_config(const std::string& path) {
    if (path.empty()) return {};
    return cfx::parse_config_sections(cfx::read_text_file(path));
}

json segments_json(const cfx::ChangeMask& mask) {
    json out = json::array();
    for (const auto& s : mask.segments) out.push_back({{"channel", s.channel}, {"start", s.start}, {"end", s.end}});
    return out;
}

cfx::TimeSeries series_from_json(const json& j) {
    return cfx::TimeSeries::from_channels(j.get<std::vector<std::vector<double>>>());
}

struct TrainArgs {
    std::string data, format = "auto", model = "mlp", out, config;
    std::optional<std::uint64_t> seed;
    bool znormalize = false;
};

int cmd_train(const TrainArgs& a) {
    const std::uint64_t seed = resolve_seed(a.seed);
    cfx::Dataset data = cfx::load_dataset(a.data, resolve_format(a.format, a.data));
    std::optional<cfx::NormStats> norm;
    if (a.znormalize) {
        norm = cfx::compute_norm_stats(data);
        data = cfx::apply_normalization(data, *norm);
    }
    const auto sections = optional_config(a.config);
    if (a.model == "autoencoder") {
        const cfx::Params p = cfx::section_params(sections, "generator.latentcf");
        cfx::validate_generator_params("latentcf", p);
        const cfx::Autoencoder ae =
            cfx::train_autoencoder(data, cfx::autoencoder_latent_dim(p, data.shape()), cfx::autoencoder_spec(p, seed));
        cfx::save_autoencoder(a.out, ae, norm);
        std::cout << "reconstruction_mse=" << float_text(ae.reconstruction_mse()) << "\n";
        return 0;
    }
    cfx::Params p = cfx::section_params(sections, "classifier");
    p.set("model", a.model);
    const cfx::ClassifierSpec spec = cfx::classifier_spec_from(p);
    double acc = 0.0;
    if (spec.kind == "knn") {
        const cfx::KnnClassifier knn = cfx::train_knn(data, spec.k, spec.metric);
        cfx::save_classifier(a.out, knn, norm);
        acc = cfx::accuracy(knn, data);
    } else {
        cfx::MLPSpec mlp = spec.mlp;
        mlp.seed = seed;
        const cfx::MlpClassifier model = cfx::train_mlp(data, mlp);
        cfx::save_classifier(a.out, model, norm);
        acc = model.train_accuracy();
    }
    std::cout << "instances=" << data.size() << " classes=" << data.num_classes() << "\n";
    std::cout << "accuracy=" << float_text(acc) << "\n";
    return 0;
}

struct Loaded {
    cfx::LoadedClassifier model;
    cfx::Dataset data;
};

Loaded load_model_and_data(const std::string& model_path, const std::string& data_path, const std::string& format) {
    cfx::LoadedClassifier model = cfx::load_classifier(model_path);
    cfx::Dataset data = cfx::load_dataset(data_path, resolve_format(format, data_path));
    if (model.norm_stats) data = cfx::apply_normalization(data, *model.norm_stats);
    if (data.shape() != model.model->input_shape()) {
        throw cfx::ShapeError("model expects " + cfx::to_string(model.model->input_shape()) + " but the data is " +
                              cfx::to_string(data.shape()));
    }
    return {std::move(model), std::move(data)};
}

std::size_t check_index(std::size_t index, const cfx::Dataset& data) {
    if (index >= data.size()) {
        throw cfx::ConfigError("index " + std::to_string(index) + " out of range (dataset has " +
                               std::to_string(data.size()) + " instances)");
    }
    return index;
}

struct GenerateArgs {
    std::string model, data, format = "auto", target = "auto", method, out, config, autoencoder, svg;
    std::size_t index = 0;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
    cfx::require_generator_id(a.method);
    const std::uint64_t seed = resolve_seed(a.seed);
    const auto sections = optional_config(a.config);
    const cfx::Params params = cfx::section_params(sections, "generator." + a.method);
    cfx::validate_generator_params(a.method, params);

    auto [loaded, data] = load_model_and_data(a.model, a.data, a.format);
    const cfx::Classifier& model = *loaded.model;
    const cfx::TimeSeries& x = data[check_index(a.index, data)].series;

    cfx::ClassLabel target = 0;
    if (a.target == "auto") {
        target = model.predict_proba(x).runner_up();
    } else if (const auto idx = data.class_index(a.target)) {
        target = *idx;
    } else {
        throw cfx::ConfigError("unknown target class '" + a.target + "'");
    }

    std::optional<cfx::Autoencoder> ae;
    if (cfx::generator_needs_autoencoder(a.method)) {
        ae = a.autoencoder.empty()
                 ? cfx::train_autoencoder(data, cfx::autoencoder_latent_dim(params, data.shape()),
                                          cfx::autoencoder_spec(params, seed))
                 : cfx::load_autoencoder(a.autoencoder);
    }
    const cfx::GeneratorContext ctx{model, data, ae ? &*ae : nullptr};
    const auto t0 = std::chrono::steady_clock::now();
    const cfx::CounterfactualSet set = cfx::run_generator(a.method, params, ctx, x, target, seed);
    const auto t1 = std::chrono::steady_clock::now();
    const cfx::CounterfactualResult& r = set.best();

    cfx::MetricReport metrics = cfx::evaluate_one(model, data, x, r);
    metrics.generation_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const cfx::ChangeMask mask = cfx::changed_segments(x, r.counterfactual, 1e-6);

    json out{{"generator", r.generator_id},
             {"seed", seed},
             {"index", a.index},
             {"target", target},
             {"target_name", data.class_names()[target]},
             {"achieved", metrics.achieved},
             {"achieved_name", data.class_names()[metrics.achieved]},
             {"valid", metrics.validity},
             {"margin_met", r.margin_met},
             {"iterations", r.iterations},
             {"model_calls", r.model_calls},
             {"set_size", set.members.size()},
             {"changed_segments", segments_json(mask)},
             {"metrics", cfx::to_json(metrics)},
             {"metadata", r.metadata},
             {"original", x.to_nested()},
             {"counterfactual", r.counterfactual.to_nested()}};
    cfx::write_text_file(a.out, out.dump(2) + "\n");
    if (!a.svg.empty()) {
        cfx::SvgOptions opts;
        opts.title = a.method + " (target " + data.class_names()[target] + ")";
        cfx::write_text_file(a.svg, cfx::render_svg(x, r.counterfactual, mask, opts));
    }
    std::cout << "valid=" << (metrics.validity ? "true" : "false") << " target=" << data.class_names()[target]
              << " l2=" << float_text(metrics.l2) << " changed_fraction="
              << float_text(metrics.changed_fraction) << " segments=" << mask.segments.size() << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string model, data, format = "auto", cf, out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    auto [loaded, data] = load_model_and_data(a.model, a.data, a.format);
    const json record = json::parse(cfx::read_text_file(a.cf));
    const std::size_t index = check_index(record.at("index").get<std::size_t>(), data);
    const cfx::TimeSeries& x = data[index].series;
    cfx::CounterfactualResult r{x, series_from_json(record.at("counterfactual"))};
    r.target = record.at("target").get<cfx::ClassLabel>();
    r.model_calls = record.value("model_calls", std::size_t{0});
    if (r.target >= data.num_classes()) throw cfx::ConfigError("target out of range");
    const cfx::MetricReport metrics = cfx::evaluate_one(*loaded.model, data, x, r);
    const std::string text = cfx::to_json(metrics, false).dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        cfx::write_text_file(a.out, text);
    }
    return 0;
}

struct BenchmarkArgs {
    std::string config, out;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    bool resume = false;
};

int cmd_benchmark(const BenchmarkArgs& a) {
    cfx::BenchmarkConfig cfg = cfx::load_run_config(a.config);
    if (a.seed) {
        cfg.evaluation.seed = *a.seed;
    } else if (std::getenv("CFX_SEED") != nullptr) {
        cfg.evaluation.seed = resolve_seed(std::nullopt);
    }
    if (!a.out.empty()) cfg.output.dir = a.out;
    if (cfg.output.dir.empty()) throw cfx::ConfigError("no output directory: pass --out or set [output] dir");
    cfg.output.resume = cfg.output.resume || a.resume;
    cfg.jobs = a.jobs;
    const cfx::BenchmarkReport report = cfx::run_benchmark(cfg);
    cfx::write_report(report, cfg.output.dir);
    std::cout << cfx::summary_table(report);
    return 0;
}

struct PlotArgs {
    std::string cf, out, title;
    double tolerance = 1e-6;
};

int cmd_plot(const PlotArgs& a) {
    const json record = json::parse(cfx::read_text_file(a.cf));
    const cfx::TimeSeries x = series_from_json(record.at("original"));
    const cfx::TimeSeries cf = series_from_json(record.at("counterfactual"));
    cfx::SvgOptions opts;
    opts.title = a.title.empty() ? record.value("generator", std::string("counterfactual")) : a.title;
    cfx::write_text_file(a.out, cfx::render_svg(x, cf, cfx::changed_segments(x, cf, a.tolerance), opts));
    return 0;
}

int cmd_methods(const std::string& category, bool as_json) {
    std::optional<cfx::MethodCategory> filter;
    if (!category.empty()) filter = cfx::parse_category(category);
    const auto entries = cfx::list_methods(filter);
    if (as_json) {
        json out = json::array();
        for (const auto& e : entries) out.push_back(cfx::to_json(e));
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    for (const auto& e : entries) {
        char line[256];
        std::snprintf(line, sizeof line, "%-14s %4d  %-3s  %-18s  %-13s  %s\n", e.name.c_str(), e.year,
                      std::string(cfx::data_kind_name(e.data)).c_str(), std::string(cfx::category_name(e.category)).c_str(),
                      e.implemented() ? e.implemented_by.c_str() : "-", e.core_idea.c_str());
        std::cout << line;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual explanations for time series classifiers"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train a classifier or autoencoder and write its parameter file");
    t->add_option("--data", train.data, "Training data file")->required()->check(CLI::ExistingFile);
    t->add_option("--format", train.format, "ucr_tsv, ts or auto")->check(CLI::IsMember({"ucr_tsv", "ts", "auto"}));
    t->add_option("--model", train.model, "knn, mlp or autoencoder")->check(CLI::IsMember({"knn", "mlp", "autoencoder"}));
    t->add_option("--out", train.out, "Output parameter file")->required();
    t->add_option("--config", train.config, "Config file ([classifier] / [generator.latentcf])")->check(CLI::ExistingFile);
    t->add_option("--seed", train.seed, "Seed (falls back to CFX_SEED, then 0)");
    t->add_flag("--znormalize", train.znormalize, "Z-normalize per channel and store the statistics");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a counterfactual for one instance");
    g->add_option("--model", gen.model, "Classifier parameter file")->required()->check(CLI::ExistingFile);
    g->add_option("--data", gen.data, "Reference data (NUN donors, instance source)")->required()->check(CLI::ExistingFile);
    g->add_option("--format", gen.format, "ucr_tsv, ts or auto")->check(CLI::IsMember({"ucr_tsv", "ts", "auto"}));
    g->add_option("--index", gen.index, "Instance index in --data")->required();
    g->add_option("--target", gen.target, "Target class name or auto (runner-up class)");
    g->add_option("--method", gen.method, "Generator id")->required();
    g->add_option("--out", gen.out, "Output JSON record")->required();
    g->add_option("--seed", gen.seed, "Seed (falls back to CFX_SEED, then 0)");
    g->add_option("--config", gen.config, "Config file with a [generator.<id>] section")->check(CLI::ExistingFile);
    g->add_option("--autoencoder", gen.autoencoder, "Autoencoder file for latentcf")->check(CLI::ExistingFile);
    g->add_option("--svg", gen.svg, "Also write an SVG overlay");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Recompute the metric report of a generated record");
    e->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
    e->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
    e->add_option("--format", ev.format)->check(CLI::IsMember({"ucr_tsv", "ts", "auto"}));
    e->add_option("--cf", ev.cf, "Record written by generate")->required()->check(CLI::ExistingFile);
    e->add_option("--out", ev.out, "Write the report here instead of stdout");

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Run every generator on sampled instances and write report.json/csv");
    b->add_option("--config", bench.config, "Run config")->required()->check(CLI::ExistingFile);
    b->add_option("--out", bench.out, "Output directory (overrides [output] dir)");
    b->add_option("--jobs", bench.jobs, "Worker threads")->check(CLI::PositiveNumber);
    b->add_option("--seed", bench.seed, "Overrides [evaluation] seed");
    b->add_flag("--resume", bench.resume, "Reuse finished cells from a previous run");

    PlotArgs plot;
    auto* p = app.add_subcommand("plot", "Render an SVG overlay of a generated record");
    p->add_option("--cf", plot.cf, "Record written by generate")->required()->check(CLI::ExistingFile);
    p->add_option("--out", plot.out, "SVG path")->required();
    p->add_option("--title", plot.title);
    p->add_option("--tolerance", plot.tolerance, "Change tolerance for highlighted segments");

    std::string category;
    bool methods_json = false;
    auto* m = app.add_subcommand("methods", "List the catalogued counterfactual methods");
    m->add_option("--category", category, "Filter by category");
    m->add_flag("--json", methods_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        if (*t) return cmd_train(train);
        if (*g) return cmd_generate(gen);
        if (*e) return cmd_evaluate(ev);
        if (*b) return cmd_benchmark(bench);
        if (*p) return cmd_plot(plot);
        if (*m) return cmd_methods(category, methods_json);
    } catch (const cfx::TrainError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const cfx::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const json::exception& err) {
        std::cerr << "error: malformed JSON input: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << "\n";
        return 1;
    }
    return 1;
}
