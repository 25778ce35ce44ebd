#include "cfx/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_any(std::string_view s, std::string_view separators) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && separators.find(s[i]) != std::string_view::npos) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && separators.find(s[j]) == std::string_view::npos) ++j;
        out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_exact(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t end = s.find(sep, start);
        if (end == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

double parse_value(std::string_view token, std::size_t line) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
        if (token == "?" || lower(token) == "nan") {
            throw ParseError(line, "missing values are not supported");
        }
        throw ParseError(line, "non-numeric value '" + std::string(token) + "'");
    }
    if (!std::isfinite(value)) throw ParseError(line, "non-finite value '" + std::string(token) + "'");
    return value;
}

bool parse_bool(std::string_view token, std::size_t line) {
    const std::string t = lower(trim(token));
    if (t == "true") return true;
    if (t == "false") return false;
    throw ParseError(line, "expected true or false, got '" + std::string(token) + "'");
}

}  // namespace

DatasetFormat parse_format(std::string_view name) {
    const std::string n = lower(name);
    if (n == "ucr_tsv" || n == "tsv" || n == "ucr") return DatasetFormat::ucr_tsv;
    if (n == "ts") return DatasetFormat::ts;
    throw ConfigError("unknown dataset format '" + std::string(name) + "' (expected ucr_tsv or ts)");
}

std::string_view format_name(DatasetFormat format) {
    return format == DatasetFormat::ts ? "ts" : "ucr_tsv";
}

Dataset parse_ucr_tsv(std::string_view text) {
    std::vector<LabeledInstance> instances;
    std::vector<std::string> class_names;
    std::map<std::string, ClassLabel, std::less<>> label_index;
    std::size_t expected_length = 0;
    std::size_t first_data_line = 0;

    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto tokens = split_any(lines[i], "\t, ");
        if (tokens.empty()) continue;
        if (tokens.size() < 2) throw ParseError(line_no, "a row needs a label and at least one value");

        std::vector<double> values;
        values.reserve(tokens.size() - 1);
        for (std::size_t k = 1; k < tokens.size(); ++k) values.push_back(parse_value(tokens[k], line_no));

        if (instances.empty()) {
            expected_length = values.size();
            first_data_line = line_no;
        } else if (values.size() != expected_length) {
            throw ParseError(line_no, "ragged row: " + std::to_string(values.size()) + " values, line " +
                                          std::to_string(first_data_line) + " has " +
                                          std::to_string(expected_length));
        }

        auto [it, inserted] = label_index.try_emplace(std::string(tokens[0]), class_names.size());
        if (inserted) class_names.emplace_back(tokens[0]);
        instances.push_back({TimeSeries::univariate(std::move(values)), it->second});
    }
    if (instances.empty()) throw ParseError("empty dataset");
    return Dataset(std::move(instances), std::move(class_names));
}

Dataset parse_ts(std::string_view text) {
    std::vector<std::string> declared_labels;
    bool have_class_directive = false;
    std::optional<bool> univariate;
    std::string problem_name = "dataset";
    bool in_data = false;

    std::vector<std::vector<std::vector<double>>> rows;
    std::vector<std::string> row_labels;
    std::vector<std::size_t> row_lines;
    std::size_t channels = 0;
    std::size_t length = 0;

    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;

        if (!in_data) {
            if (line.front() != '@') throw ParseError(line_no, "expected a directive before @data");
            const auto parts = split_any(line, " \t");
            const std::string directive = lower(parts[0]);
            const auto arg = [&](std::size_t k) -> std::string_view {
                if (parts.size() <= k) throw ParseError(line_no, directive + " needs an argument");
                return parts[k];
            };
            if (directive == "@problemname") {
                problem_name = std::string(trim(line.substr(parts[0].size())));
            } else if (directive == "@univariate") {
                univariate = parse_bool(arg(1), line_no);
            } else if (directive == "@classlabel") {
                if (!parse_bool(arg(1), line_no)) throw ParseError(line_no, "regression datasets are not supported");
                have_class_directive = true;
                declared_labels.assign(parts.begin() + 2, parts.end());
                std::vector<std::string> sorted = declared_labels;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                    throw ParseError(line_no, "duplicate class label in @classLabel");
                }
            } else if (directive == "@timestamps") {
                if (parse_bool(arg(1), line_no)) throw ParseError(line_no, "timestamped series are not supported");
            } else if (directive == "@missing") {
                if (parse_bool(arg(1), line_no)) throw ParseError(line_no, "missing values are not supported");
            } else if (directive == "@equallength") {
                if (!parse_bool(arg(1), line_no)) throw ParseError(line_no, "variable-length series are not supported");
            } else if (directive == "@serieslength" || directive == "@dimension" || directive == "@dimensions") {
                // informational; shapes are validated against the data itself
            } else if (directive == "@data") {
                in_data = true;
            } else {
                throw ParseError(line_no, "unsupported directive " + std::string(parts[0]));
            }
            continue;
        }

        const auto fields = split_exact(line, ':');
        if (fields.size() < 2) throw ParseError(line_no, "a data line needs at least one channel and a label");
        const std::size_t row_channels = fields.size() - 1;
        std::vector<std::vector<double>> row;
        row.reserve(row_channels);
        for (std::size_t c = 0; c < row_channels; ++c) {
            std::vector<double> values;
            for (auto tok : split_exact(fields[c], ',')) values.push_back(parse_value(tok, line_no));
            row.push_back(std::move(values));
        }
        if (rows.empty()) {
            channels = row_channels;
            length = row.front().size();
        }
        if (row_channels != channels) {
            throw ParseError(line_no, "channel count mismatch: " + std::to_string(row_channels) + " vs " +
                                          std::to_string(channels));
        }
        for (const auto& ch : row) {
            if (ch.size() != length) throw ParseError(line_no, "variable-length series are not supported");
        }
        rows.push_back(std::move(row));
        row_labels.emplace_back(trim(fields.back()));
        row_lines.push_back(line_no);
    }

    if (!in_data) throw ParseError("missing @data section");
    if (rows.empty()) throw ParseError("no data lines after @data");
    if (univariate && *univariate && channels != 1) {
        throw ParseError(row_lines.front(), "@univariate true but " + std::to_string(channels) + " channels found");
    }

    std::vector<std::string> class_names = declared_labels;
    std::vector<LabeledInstance> instances;
    instances.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto it = std::find(class_names.begin(), class_names.end(), row_labels[r]);
        if (it == class_names.end()) {
            if (have_class_directive) throw ParseError(row_lines[r], "unknown class label '" + row_labels[r] + "'");
            class_names.push_back(row_labels[r]);
            it = class_names.end() - 1;
        }
        instances.push_back({TimeSeries::from_channels(rows[r]), static_cast<ClassLabel>(it - class_names.begin())});
    }
    Dataset out(std::move(instances), std::move(class_names));
    out.set_problem_name(problem_name);
    return out;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string serialize_dataset(const Dataset& dataset, DatasetFormat format) {
    std::string out;
    if (format == DatasetFormat::ucr_tsv) {
        if (dataset.channels() > 1) throw FormatError("ucr_tsv holds univariate data only; use the ts format");
        for (const auto& inst : dataset.instances()) {
            out += dataset.class_names()[inst.label];
            for (double v : inst.series.values()) {
                out += '\t';
                out += format_double(v);
            }
            out += '\n';
        }
        return out;
    }

    out += "@problemName " + dataset.problem_name() + "\n";
    out += std::string("@univariate ") + (dataset.channels() == 1 ? "true" : "false") + "\n";
    out += "@classLabel true";
    for (const auto& name : dataset.class_names()) out += " " + name;
    out += "\n@data\n";
    for (const auto& inst : dataset.instances()) {
        for (std::size_t c = 0; c < inst.series.channels(); ++c) {
            const auto ch = inst.series.channel(c);
            for (std::size_t t = 0; t < ch.size(); ++t) {
                if (t > 0) out += ',';
                out += format_double(ch[t]);
            }
            out += ':';
        }
        out += dataset.class_names()[inst.label];
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("failed writing " + path.string());
}

DatasetFormat guess_format(const std::filesystem::path& path) {
    return lower(path.extension().string()) == ".ts" ? DatasetFormat::ts : DatasetFormat::ucr_tsv;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    const std::string text = read_text_file(path);
    Dataset d = format == DatasetFormat::ts ? parse_ts(text) : parse_ucr_tsv(text);
    if (format == DatasetFormat::ucr_tsv) d.set_problem_name(path.stem().string());
    return d;
}

}  // namespace cfx
