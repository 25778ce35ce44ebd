#include "cfx/run_config.hpp"

#include <algorithm>
#include <set>

#include "cfx/errors.hpp"
#include "cfx/generators.hpp"

namespace cfx {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

const std::vector<std::string> kDatasetKeys{"name",  "path",        "test_path", "format", "znormalize", "synthetic",
                                            "size",  "length",      "channels",  "bump_start", "bump_length",
                                            "bump_height", "noise", "signal_channel", "seed"};
const std::vector<std::string> kEvaluationKeys{"instances",       "seed",     "target",          "stability_trials",
                                               "stability_sigma", "max_lag",  "change_tolerance", "dtw_band",
                                               "ood_metric"};
const std::vector<std::string> kOutputKeys{"dir", "resume"};

std::filesystem::path existing(const std::filesystem::path& base, const std::string& raw, const std::string& key) {
    std::filesystem::path p(raw);
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw ConfigError(key + ": file not found: " + p.string());
    return p;
}

DatasetSpec dataset_from(const ConfigSection& s, const std::filesystem::path& base) {
    const Params& p = s.params;
    p.require_known(kDatasetKeys, "[" + s.name + "]");
    DatasetSpec d;
    const auto dot = s.name.find('.');
    d.name = p.get_string("name", dot == std::string::npos ? "dataset" : s.name.substr(dot + 1));
    if (p.has("synthetic")) {
        const std::string kind = p.get_string("synthetic", "");
        if (kind != "planted_pattern") throw ConfigError("synthetic must be planted_pattern, got '" + kind + "'");
        if (p.has("path")) throw ConfigError("[" + s.name + "] sets both path and synthetic");
        PlantedPatternSpec spec;
        spec.instances = p.get_size("size", spec.instances);
        spec.length = p.get_size("length", spec.length);
        spec.channels = p.get_size("channels", spec.channels);
        spec.bump_start = p.get_size("bump_start", spec.bump_start);
        spec.bump_length = p.get_size("bump_length", spec.bump_length);
        spec.bump_height = p.get_double("bump_height", spec.bump_height);
        spec.noise = p.get_double("noise", spec.noise);
        spec.signal_channel = p.get_size("signal_channel", spec.signal_channel);
        spec.seed = p.get_u64("seed", spec.seed);
        d.synthetic = spec;
        if (d.name == "dataset") d.name = "planted_pattern";
        return d;
    }
    for (const char* key : {"size", "length", "channels", "bump_start", "bump_length", "bump_height", "noise",
                            "signal_channel", "seed"}) {
        if (p.has(key)) throw ConfigError(std::string(key) + " only applies to synthetic datasets");
    }
    if (!p.has("path")) throw ConfigError("[" + s.name + "] needs path or synthetic");
    d.path = existing(base, p.get_string("path", ""), "path");
    if (p.has("test_path")) d.test_path = existing(base, p.get_string("test_path", ""), "test_path");
    const std::string fmt = p.get_string("format", "auto");
    d.format = fmt == "auto" ? guess_format(*d.path) : parse_format(fmt);
    d.znormalize = p.get_bool("znormalize", false);
    return d;
}

}  // namespace

std::vector<ConfigSection> parse_config_sections(std::string_view text) {
    std::vector<ConfigSection> sections;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const std::string line = trim(raw.substr(0, comment));
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError(where + ": empty section name");
            if (std::any_of(sections.begin(), sections.end(), [&](const ConfigSection& s) { return s.name == name; })) {
                throw ConfigError(where + ": duplicate section [" + name + "]");
            }
            sections.push_back({name, Params{}, line_no});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (sections.empty()) throw ConfigError(where + ": key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (sections.back().params.has(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        sections.back().params.set(key, value);
    }
    return sections;
}

const std::vector<std::string>& classifier_keys() {
    static const std::vector<std::string> keys{"model", "hidden",   "activation", "epochs", "learning_rate",
                                               "batch_size", "momentum", "k",     "metric", "dtw_band"};
    return keys;
}

ClassifierSpec classifier_spec_from(const Params& p) {
    p.require_known(classifier_keys(), "[classifier]");
    ClassifierSpec c;
    c.kind = p.get_string("model", c.kind);
    if (c.kind != "mlp" && c.kind != "knn") throw ConfigError("model must be mlp or knn, got '" + c.kind + "'");
    c.mlp.hidden_sizes = p.get_size_list("hidden", c.mlp.hidden_sizes);
    if (p.has("activation")) c.mlp.activation = parse_activation(p.get_string("activation", ""));
    c.mlp.epochs = p.get_size("epochs", c.mlp.epochs);
    c.mlp.learning_rate = p.get_double("learning_rate", c.mlp.learning_rate);
    c.mlp.batch_size = p.get_size("batch_size", c.mlp.batch_size);
    c.mlp.momentum = p.get_double("momentum", c.mlp.momentum);
    c.k = p.get_size("k", c.k);
    c.metric.metric = parse_metric(p.get_string("metric", "l2"));
    c.metric.dtw_band = p.get_optional_size("dtw_band");
    return c;
}

Params section_params(const std::vector<ConfigSection>& sections, std::string_view name) {
    for (const auto& s : sections) {
        if (s.name == name) return s.params;
    }
    return {};
}

BenchmarkConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    BenchmarkConfig cfg;
    for (const auto& s : parse_config_sections(text)) {
        if (s.name == "dataset" || s.name.rfind("dataset.", 0) == 0) {
            cfg.datasets.push_back(dataset_from(s, base_dir));
        } else if (s.name == "classifier") {
            cfg.classifier = classifier_spec_from(s.params);
        } else if (s.name.rfind("generator.", 0) == 0) {
            const std::string id = s.name.substr(10);
            require_generator_id(id);
            validate_generator_params(id, s.params);
            cfg.generators.push_back({id, s.params});
        } else if (s.name == "evaluation") {
            const Params& p = s.params;
            p.require_known(kEvaluationKeys, "[evaluation]");
            auto& e = cfg.evaluation;
            e.instances = p.get_size("instances", e.instances);
            e.seed = p.get_u64("seed", e.seed);
            e.target = p.get_string("target", e.target);
            e.stability_trials = p.get_size("stability_trials", e.stability_trials);
            e.stability_sigma = p.get_double("stability_sigma", e.stability_sigma);
            e.metrics.max_lag = p.get_optional_size("max_lag");
            e.metrics.change_tolerance = p.get_double("change_tolerance", e.metrics.change_tolerance);
            e.metrics.dtw_band = p.get_optional_size("dtw_band");
            e.metrics.metric.metric = parse_metric(p.get_string("ood_metric", "l2"));
        } else if (s.name == "output") {
            const Params& p = s.params;
            p.require_known(kOutputKeys, "[output]");
            if (p.has("dir")) {
                std::filesystem::path dir(p.get_string("dir", ""));
                cfg.output.dir = dir.is_relative() ? base_dir / dir : dir;
            }
            cfg.output.resume = p.get_bool("resume", false);
        } else {
            throw ConfigError("unknown section [" + s.name +
                              "] (expected dataset, classifier, generator.<id>, evaluation, output)");
        }
    }
    std::set<std::string> dataset_names;
    for (const auto& d : cfg.datasets) {
        if (!dataset_names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
    }
    if (cfg.datasets.empty()) throw ConfigError("config has no [dataset] section");
    if (cfg.generators.empty()) throw ConfigError("config has no [generator.<id>] section");
    return cfg;
}

BenchmarkConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace cfx
