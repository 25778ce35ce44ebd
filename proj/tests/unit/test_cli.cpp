#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <string>

#include <json.hpp>

#include "cfx/catalog.hpp"
#include "cfx/dataset_io.hpp"
#include "cfx/errors.hpp"
#include "cfx/generators.hpp"
#include "cfx/params.hpp"
#include "cfx/run_config.hpp"
#include "cfx/svg.hpp"
#include "cfx/synthetic.hpp"
#include "test_support.hpp"

using namespace cfx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

/// Scratch directory removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("cfx_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

RunResult run(const TempDir& dir, const std::string& args) {
    const std::string out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("env -u CFX_SEED '") + CFX_BIN_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(out);
    r.err = read_text_file(err);
    return r;
}

std::string fixture(const std::string& name) { return std::string(CFX_FIXTURE_DIR) + "/" + name; }

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::vector<std::string> polylines(const std::string& svg) {
    std::vector<std::string> out;
    const std::regex re("<polyline[^>]*points=\"([^\"]*)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back((*it)[1]);
    }
    return out;
}

/// Writes a planted-pattern TSV and trains an MLP on it through the CLI.
void planted_model(const TempDir& dir) {
    write_text_file(dir / "planted.tsv",
                    serialize_dataset(make_planted_pattern(testing_support::small_planted(48)), DatasetFormat::ucr_tsv));
    const auto r = run(dir, "train --data '" + (dir / "planted.tsv") + "' --model mlp --out '" + (dir / "model.txt") +
                                "' --seed 3");
    REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("cli train") {
    const TempDir dir("train");
    const auto r = run(dir, "train --data '" + fixture("two_line.tsv") + "' --format ucr_tsv --model knn --out '" +
                                (dir / "knn.txt") + "'");
    CHECK(r.code == 0);
    CHECK(r.out.find("\naccuracy=1.0\n") != std::string::npos);
    CHECK(r.out.substr(r.out.rfind("accuracy=")) == "accuracy=1.0\n");
    CHECK(fs::exists(dir / "knn.txt"));

    const auto bad = run(dir, "train --data '" + fixture("two_line.tsv") + "' --format csv --model knn --out '" +
                                  (dir / "x.txt") + "'");
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());

    const auto a = run(dir, "train --data '" + fixture("two_line.tsv") + "' --model mlp --seed 4 --out '" +
                                (dir / "a.txt") + "'");
    const auto b = run(dir, "train --data '" + fixture("two_line.tsv") + "' --model mlp --seed 4 --out '" +
                                (dir / "b.txt") + "'");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(read_text_file(dir / "a.txt") == read_text_file(dir / "b.txt"));

    // A malformed data file is a usage error, not a crash.
    write_text_file(dir / "broken.tsv", "1\t0.5\n2\tabc\n");
    CHECK(run(dir, "train --data '" + (dir / "broken.tsv") + "' --model knn --out '" + (dir / "y.txt") + "'").code == 2);
}

TEST_CASE("cli generate") {
    const TempDir dir("generate");
    planted_model(dir);
    const std::string base = "generate --model '" + (dir / "model.txt") + "' --data '" + (dir / "planted.tsv") + "' ";

    const auto r = run(dir, base + "--index 0 --method native_guide --out '" + (dir / "ng.json") + "' --svg '" +
                                (dir / "ng.svg") + "'");
    REQUIRE(r.code == 0);
    const json rec = json::parse(read_text_file(dir / "ng.json"));
    CHECK(rec["valid"] == true);
    CHECK(rec["changed_segments"].size() == 1);
    CHECK(rec["generator"] == "native_guide");
    for (const char* key : {"original", "counterfactual", "target", "achieved", "seed", "metrics"}) {
        CHECK(rec.contains(key));
    }
    CHECK(fs::exists(dir / "ng.svg"));

    // evaluate recomputes the same report (timing aside).
    const auto ev = run(dir, "evaluate --model '" + (dir / "model.txt") + "' --data '" + (dir / "planted.tsv") +
                                 "' --cf '" + (dir / "ng.json") + "'");
    REQUIRE(ev.code == 0);
    json expected = rec["metrics"];
    expected.erase("generation_time_ms");
    CHECK(json::parse(ev.out) == expected);

    // Instance 0 is class "0" by construction; asking for it is the degenerate case.
    const auto same = run(dir, base + "--index 0 --target 0 --method wachter --out '" + (dir / "same.json") + "'");
    REQUIRE(same.code == 0);
    const json s = json::parse(read_text_file(dir / "same.json"));
    CHECK(s["metrics"]["l2"] == 0.0);
    CHECK(s["original"] == s["counterfactual"]);

    const auto unknown = run(dir, base + "--index 0 --method bogus --out '" + (dir / "u.json") + "'");
    CHECK(unknown.code == 2);
    for (const auto& id : generator_ids()) CHECK(unknown.err.find(id) != std::string::npos);

    CHECK(run(dir, base + "--index 4800 --method wachter --out '" + (dir / "i.json") + "'").code == 2);
    CHECK(run(dir, base + "--index 0 --target nope --method wachter --out '" + (dir / "t.json") + "'").code == 2);

    // A knn model cannot drive a gradient method: config error, exit 2.
    REQUIRE(run(dir, "train --data '" + (dir / "planted.tsv") + "' --model knn --out '" + (dir / "knn.txt") + "'").code == 0);
    CHECK(run(dir, "generate --model '" + (dir / "knn.txt") + "' --data '" + (dir / "planted.tsv") +
                       "' --index 0 --method wachter --out '" + (dir / "k.json") + "'")
              .code == 2);

    // Same seed, same record apart from timing.
    const auto once = run(dir, base + "--index 1 --method evo --seed 2 --out '" + (dir / "e1.json") + "'");
    const auto twice = run(dir, base + "--index 1 --method evo --seed 2 --out '" + (dir / "e2.json") + "'");
    REQUIRE(once.code == 0);
    REQUIRE(twice.code == 0);
    json e1 = json::parse(read_text_file(dir / "e1.json"));
    json e2 = json::parse(read_text_file(dir / "e2.json"));
    e1["metrics"].erase("generation_time_ms");
    e2["metrics"].erase("generation_time_ms");
    CHECK(e1 == e2);
}

TEST_CASE("cli benchmark") {
    const TempDir dir("benchmark");
    write_text_file(dir / "run.cfg",
                    "[dataset]\nsynthetic = planted_pattern\nsize = 40\nlength = 48\nbump_start = 19\n\n"
                    "[classifier]\nmodel = knn\n\n"
                    "[generator.native_guide]\n[generator.comte]\n\n"
                    "[evaluation]\ninstances = 2\nseed = 11\n");
    const auto a = run(dir, "benchmark --config '" + (dir / "run.cfg") + "' --out '" + (dir / "a") + "'");
    REQUIRE(a.code == 0);
    const json report = json::parse(read_text_file(dir / "a/report.json"));
    CHECK(report["rows"].size() == 4);
    CHECK(fs::exists(dir / "a/report.csv"));
    CHECK(a.out.find("native_guide") != std::string::npos);
    CHECK(a.out.find("comte") != std::string::npos);
    // Header line plus one line per generator.
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 3);

    const auto b = run(dir, "benchmark --config '" + (dir / "run.cfg") + "' --out '" + (dir / "b") + "'");
    REQUIRE(b.code == 0);
    json rows_a = report["rows"], rows_b = json::parse(read_text_file(dir / "b/report.json"))["rows"];
    for (auto* rows : {&rows_a, &rows_b}) {
        for (auto& row : *rows) {
            row.erase("time_ms");
            if (row["metrics"].is_object()) row["metrics"].erase("generation_time_ms");
        }
    }
    CHECK(rows_a == rows_b);

    write_text_file(dir / "bad.cfg", "[dataset]\nsynthetic = planted_pattern\n[generator.magic]\n");
    CHECK(run(dir, "benchmark --config '" + (dir / "bad.cfg") + "' --out '" + (dir / "c") + "'").code == 2);
}

TEST_CASE("svg overlays") {
    const TimeSeries x = TimeSeries::univariate({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const std::string same = render_svg(x, x, changed_segments(x, x, 1e-6));
    CHECK(count(same, "class=\"changed\"") == 0);
    const auto lines = polylines(same);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == lines[1]);
    CHECK(count(lines[0], ",") == 10);
    CHECK(same.rfind("<?xml", 0) == 0);
    CHECK(count(same, "<g ") == count(same, "</g>"));

    TimeSeries cf = x;
    for (std::size_t t = 3; t <= 5; ++t) cf(0, t) += 2.0;
    const ChangeMask mask = changed_segments(x, cf, 1e-6);
    REQUIRE(mask.segments.size() == 1);
    SvgOptions opts;
    opts.width = 780.0;  // 700 px of plot over 10 columns
    const std::string one = render_svg(x, cf, mask, opts);
    REQUIRE(count(one, "class=\"changed\"") == 1);
    const std::regex rect("class=\"changed\" x=\"([0-9.]+)\" y=\"[0-9.]+\" width=\"([0-9.]+)\"");
    std::smatch m;
    REQUIRE(std::regex_search(one, m, rect));
    CHECK(std::stod(m[1]) == doctest::Approx(60.0 + 3 * 70.0));
    CHECK(std::stod(m[2]) == doctest::Approx(3 * 70.0));

    const TimeSeries three(3, 7, 1.0);
    TimeSeries three_cf = three;
    three_cf(2, 6) = 0.0;
    const std::string panels = render_svg(three, three_cf, changed_segments(three, three_cf, 1e-6));
    CHECK(count(panels, "class=\"panel\"") == 3);
    for (const auto& pts : polylines(panels)) CHECK(count(pts, ",") == 7);
    CHECK(count(panels, "class=\"changed\"") == 1);
    CHECK_THROWS_AS(render_svg(three, x, changed_segments(x, x, 1e-6)), ShapeError);
}

TEST_CASE("cli plot") {
    const TempDir dir("plot");
    const json rec{{"generator", "demo"}, {"original", {{0, 0, 0, 0}}}, {"counterfactual", {{0, 1, 1, 0}}}};
    write_text_file(dir / "cf.json", rec.dump());
    REQUIRE(run(dir, "plot --cf '" + (dir / "cf.json") + "' --out '" + (dir / "cf.svg") + "'").code == 0);
    const std::string svg = read_text_file(dir / "cf.svg");
    CHECK(count(svg, "class=\"changed\"") == 1);
    CHECK(svg.find("demo") != std::string::npos);
    CHECK(run(dir, "plot --cf '" + (dir / "cf.json") + "' --out '" + (dir / "missing/dir/cf.svg") + "'").code == 2);
}

TEST_CASE("method catalog") {
    const auto& all = method_catalog();
    CHECK(all.size() == 26);
    std::set<std::string> ids;
    for (const auto& e : all) ids.insert(e.id);
    CHECK(ids.size() == all.size());

    const auto evo = list_methods(MethodCategory::evolutionary);
    std::map<std::string, int> years;
    for (const auto& e : evo) {
        CHECK(e.category == MethodCategory::evolutionary);
        years[e.name] = e.year;
    }
    CHECK(years.at("MOC") == 2020);
    CHECK(years.at("TSEvo") == 2022);
    CHECK(years.at("Sub-SpaCE") == 2023);
    CHECK(years.at("Multi-SpaCE") == 2024);

    // Filtering keeps table order.
    std::size_t last = 0;
    for (const auto& e : evo) {
        const auto pos = static_cast<std::size_t>(
            std::find_if(all.begin(), all.end(), [&](const MethodEntry& a) { return a.id == e.id; }) - all.begin());
        CHECK(pos >= last);
        last = pos;
    }

    for (const auto& e : all) {
        if (e.implemented()) CHECK(is_generator_id(e.implemented_by));
    }
    std::set<std::string> covered;
    for (const auto& e : all) covered.insert(e.implemented_by);
    for (const auto& id : generator_ids()) CHECK(covered.count(id) == 1);

    const auto fixture_rows = parse_method_table(read_text_file(fixture("methods_table.tsv")));
    REQUIRE(fixture_rows.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(to_json(fixture_rows[i]) == to_json(all[i]));

    CHECK(parse_category("latent") == MethodCategory::latent);
    CHECK(parse_category("Instance-based") == MethodCategory::instance);
    CHECK_THROWS_AS(parse_category("astrology"), ConfigError);
}

TEST_CASE("cli methods") {
    const TempDir dir("methods");
    const auto all = run(dir, "methods --json");
    REQUIRE(all.code == 0);
    CHECK(json::parse(all.out).size() == 26);
    const auto evo = run(dir, "methods --category evolutionary");
    REQUIRE(evo.code == 0);
    CHECK(evo.out.find("TSEvo") != std::string::npos);
    CHECK(evo.out.find("Wachter") == std::string::npos);
    CHECK(run(dir, "methods --category nonsense").code == 2);
    CHECK(run(dir, "frobnicate").code == 2);
}

TEST_CASE("config sections") {
    const auto s = parse_config_sections("# top\n[a]\nx = 1 ; trailing\ny=two words\n\n[b]\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].params.get_size("x", 0) == 1);
    CHECK(s[0].params.get_string("y", "") == "two words");
    CHECK(s[1].params.values().empty());
    CHECK(section_params(s, "missing").values().empty());
    CHECK_THROWS_AS(parse_config_sections("x = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_sections("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_sections("[a]\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_sections("[a\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_sections("[a]\njunk\n"), ConfigError);
}

TEST_CASE("run config validation") {
    const std::string ok = "[dataset]\nsynthetic = planted_pattern\nsize = 30\n[generator.wachter]\n";
    const BenchmarkConfig cfg = parse_run_config(ok);
    REQUIRE(cfg.datasets.size() == 1);
    REQUIRE(cfg.datasets[0].synthetic);
    CHECK(cfg.datasets[0].synthetic->instances == 30);
    REQUIRE(cfg.generators.size() == 1);
    CHECK(cfg.generators[0].id == "wachter");

    CHECK_THROWS_AS(parse_run_config(ok + "[generator.nope]\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(ok + "[evaluation]\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(ok + "[mystery]\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dataset]\npath = /no/such/file.tsv\n[generator.wachter]\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dataset]\nsynthetic = planted_pattern\n[generator.wachter]\nlambda = x\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dataset]\nsynthetic = planted_pattern\n[generator.wachter]\nbogus = 1\n"),
                    ConfigError);

    const auto spec = classifier_spec_from(Params(std::map<std::string, std::string>{{"model", "mlp"}, {"hidden", "8,4"}, {"epochs", "7"}}));
    CHECK(spec.mlp.hidden_sizes == std::vector<std::size_t>{8, 4});
    CHECK(spec.mlp.epochs == 7);
    CHECK_THROWS_AS(classifier_spec_from(Params(std::map<std::string, std::string>{{"model", "svm"}})), ConfigError);
}

TEST_CASE("params") {
    const Params p({{"a", "2.5"}, {"n", "12"}, {"b", "true"}, {"list", "1, 2,3"}, {"neg", "-3"}});
    CHECK(p.get_double("a", 0) == 2.5);
    CHECK(p.get_size("n", 0) == 12);
    CHECK(p.get_bool("b", false));
    CHECK(p.get_size_list("list", {}) == std::vector<std::size_t>{1, 2, 3});
    CHECK(p.get_double("missing", 7.0) == 7.0);
    CHECK_FALSE(p.get_optional_size("missing"));
    CHECK_THROWS_AS(p.get_size("a", 0), ConfigError);
    CHECK_THROWS_AS(p.get_size("neg", 0), ConfigError);
    CHECK_THROWS_AS(p.get_bool("n", false), ConfigError);
    CHECK_THROWS_AS(p.require_known({"a"}, "[x]"), ConfigError);
    CHECK_NOTHROW(p.require_known({"a", "n", "b", "list", "neg"}, "[x]"));
    CHECK(parse_u64("18446744073709551615", "s") == 18446744073709551615ull);
    CHECK_THROWS_AS(parse_u64("18446744073709551616", "s"), ConfigError);
    CHECK_THROWS_AS(parse_double("1.5x", "d"), ConfigError);
}
