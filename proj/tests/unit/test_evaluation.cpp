#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cfx/benchmark.hpp"
#include "cfx/errors.hpp"
#include "cfx/metrics.hpp"
#include "cfx/optimization.hpp"
#include "cfx/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cfx;

namespace {

TimeSeries random_series(Rng& rng, std::size_t C, std::size_t T) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(C * T);
    for (double& x : v) x = d(rng);
    return TimeSeries(C, T, v);
}

TimeSeries cosine(std::size_t T, double bin) {
    std::vector<double> v(T);
    for (std::size_t t = 0; t < T; ++t) v[t] = std::cos(2.0 * std::acos(-1.0) * bin * double(t) / double(T));
    return TimeSeries::univariate(v);
}

BenchmarkConfig tiny_config(std::size_t generators) {
    BenchmarkConfig cfg;
    DatasetSpec ds;
    ds.name = "planted";
    PlantedPatternSpec p = testing_support::small_planted(40);
    ds.synthetic = p;
    cfg.datasets.push_back(ds);
    cfg.classifier.kind = "mlp";
    cfg.generators.push_back({"native_guide", {}});
    if (generators > 1) cfg.generators.push_back({"greedy_window", {}});
    cfg.evaluation.instances = 2;
    cfg.evaluation.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("autocorrelation distance") {
    Rng rng = make_rng(1);
    const auto a = random_series(rng, 2, 30);
    CHECK(autocorr_distance(a, a) == 0.0);
    CHECK(autocorr_distance(random_series(rng, 1, 64), cosine(64, 4)) > 0.1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_series(rng, 2, 25);
        const auto y = random_series(rng, 2, 25);
        double sq = 0.0;
        for (std::size_t c = 0; c < 2; ++c) {
            const auto rx = oracle::autocorrelation(x.channel(c), 5);
            const auto ry = oracle::autocorrelation(y.channel(c), 5);
            for (std::size_t k = 0; k < 5; ++k) sq += (rx[k] - ry[k]) * (rx[k] - ry[k]);
        }
        CHECK(std::abs(autocorr_distance(x, y, 5) - std::sqrt(sq)) < 1e-10);
    }
    // Constant channels have a zero autocorrelation vector.
    CHECK(autocorr_distance(TimeSeries(1, 10, 3.0), TimeSeries(1, 10, -1.0)) == 0.0);
    CHECK(default_max_lag(100) == 20);
    CHECK(default_max_lag(10) == 5);
    CHECK_THROWS_AS(autocorr_distance(a, a, 30), ConfigError);
}

TEST_CASE("periodogram and spectral distance") {
    const auto p3 = periodogram(cosine(16, 3).channel(0));
    CHECK(p3.size() == 9);
    CHECK(p3[3] == doctest::Approx(1.0));
    CHECK(spectral_distance(cosine(16, 3), cosine(16, 5)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(periodogram(TimeSeries(1, 8).channel(0)) == std::vector<double>(5, 0.2));

    Rng rng = make_rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_series(rng, 1, 21);
        const auto got = periodogram(x.channel(0));
        const auto want = oracle::periodogram(x.channel(0));
        for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-10);
        const auto y = random_series(rng, 1, 21);
        CHECK(spectral_distance(x, y) == spectral_distance(y, x));
        CHECK(spectral_distance(x, x) == 0.0);
    }
}

TEST_CASE("ood score") {
    const Dataset d({{TimeSeries::univariate({0, 0}), 1},
                     {TimeSeries::univariate({3, 0}), 1},
                     {TimeSeries::univariate({0, 4}), 1},
                     {TimeSeries::univariate({9, 9}), 0}},
                    {"a", "b"});
    CHECK(ood_score(d, d[1].series, 1) == 0.0);
    // Leave-one-out nearest distances inside class 1: 3, 3, 4 -> mean 10/3.
    CHECK(ood_score(d, TimeSeries::univariate({0, -1}), 1) == doctest::Approx(1.0 / (10.0 / 3.0)));
    CHECK_THROWS_AS(ood_score(d, d[0].series, 0), MetricUnavailable);
    Rng rng = make_rng(4);
    for (int trial = 0; trial < 10; ++trial) CHECK(ood_score(d, random_series(rng, 1, 2), 1) >= 0.0);
}

TEST_CASE("diversity") {
    const TimeSeries x = TimeSeries::univariate({0, 0});
    CounterfactualSet one;
    one.members.emplace_back(x, x);
    CHECK(diversity(one) == 0.0);
    CounterfactualSet two = one;
    two.members.emplace_back(x, TimeSeries::univariate({4, 0}));
    CHECK(diversity(two) == 4.0);
    CounterfactualSet same = one;
    same.members.push_back(one.members[0]);
    same.members.push_back(one.members[0]);
    CHECK(diversity(same) == 0.0);
}

TEST_CASE("evaluate_one") {
    const Dataset d = make_planted_pattern(testing_support::small_planted(20));
    const MlpClassifier m = train_mlp(d, {});
    const TimeSeries& x = d[0].series;
    CounterfactualResult same{x, x};
    same.target = 1 - m.predict(x);
    const MetricReport r = evaluate_one(m, d, x, same);
    CHECK_FALSE(r.validity);
    for (const char* f : {"l1", "l2", "linf", "dtw", "frechet", "l0_count", "changed_fraction", "segment_count",
                          "autocorr_distance", "spectral_distance"}) {
        CHECK(*metric_value(r, f) == 0.0);
    }

    TimeSeries bumped = x;
    bumped(0, 7) += 1.0;
    CounterfactualResult one{x, bumped};
    const MetricReport b = evaluate_one(m, d, x, one);
    CHECK(b.l0_count == 1.0);
    CHECK(b.segment_count == 1.0);
    CHECK(b.l1 == doctest::Approx(1.0));
    CHECK(b.l2 == doctest::Approx(1.0));
    CHECK(b.linf == doctest::Approx(1.0));
    CHECK(b.mean_segment_length == 1.0);

    // A generator claiming validity is re-checked, not trusted.
    CounterfactualResult liar{x, x};
    liar.target = 1 - m.predict(x);
    liar.valid = true;
    CHECK_FALSE(evaluate_one(m, d, x, liar).validity);

    const auto wr = wachter_generate(m, x, 1 - m.predict(x));
    CHECK(evaluate_one(m, d, x, wr).validity == wr.valid);
}

TEST_CASE("metric report json") {
    MetricReport r;
    r.validity = true;
    r.l2 = 1.5;
    r.generation_time_ms = 3.0;
    const auto j = to_json(r);
    CHECK(j["ood_score"].is_null());
    CHECK_FALSE(to_json(r, false).contains("generation_time_ms"));
    const MetricReport back = metric_report_from_json(j);
    CHECK(back.l2 == 1.5);
    CHECK_FALSE(back.ood_score);
}

TEST_CASE("stability") {
    const MlpClassifier m = testing_support::linear_toy();
    const TimeSeries x = TimeSeries::univariate({0.0});
    OptConfig zero;
    zero.target_margin = 0.0;
    const GeneratorFn gen = [&](const TimeSeries& s, std::uint64_t) { return wachter_generate(m, s, 1, zero); };
    const auto still = stability(gen, m, x, 1, 0.0, 3, 1);
    CHECK(still.cf_distance_mean == 0.0);
    CHECK(still.validity_retention == 1.0);
    CHECK(stability(gen, m, x, 1, 0.0, 1, 1).validity_retention == 1.0);

    const auto noisy = stability(gen, m, x, 1, 0.5, 50, 1);
    CHECK(noisy.validity_retention < 1.0);
    CHECK(noisy.cf_distance_mean > 0.0);

    const GeneratorFn broken = [](const TimeSeries&, std::uint64_t) -> CounterfactualResult {
        throw NoNeighborError("none");
    };
    const auto failed = stability(broken, m, x, 1, 0.1, 4, 1);
    CHECK(failed.failed_trials == 4);
    CHECK(failed.validity_retention == 0.0);
    CHECK_THROWS_AS(stability(gen, m, x, 1, -1.0, 2, 1), ConfigError);
}

TEST_CASE("summaries") {
    const auto s = summarize({1.0, 2.0, 6.0});
    CHECK(s.n == 3);
    CHECK(s.mean == 3.0);
    CHECK(s.median == 2.0);
    CHECK(s.stddev == doctest::Approx(std::sqrt(7.0)));
    CHECK(summarize({1.0, 3.0}).median == 2.0);
    CHECK(summarize({}).n == 0);
}

TEST_CASE("benchmark structure, aggregates and determinism") {
    const BenchmarkConfig cfg = tiny_config(1);
    const BenchmarkReport a = run_benchmark(cfg);
    CHECK(a.rows.size() == 2);
    REQUIRE(a.aggregates.size() == 1);
    const auto& agg = a.aggregates[0];
    double l2 = 0.0;
    std::size_t valid = 0;
    for (const auto& row : a.rows) {
        REQUIRE(row.metrics);
        l2 += row.metrics->l2;
        valid += row.metrics->validity ? 1 : 0;
    }
    CHECK(agg.stats.at("l2").mean == doctest::Approx(l2 / 2.0));
    CHECK(agg.validity_rate == double(valid) / 2.0);

    const BenchmarkReport b = run_benchmark(cfg);
    CHECK(report_to_json(a, false).dump() == report_to_json(b, false).dump());

    BenchmarkConfig threaded = tiny_config(2);
    const BenchmarkReport serial = run_benchmark(threaded);
    threaded.jobs = 3;
    const BenchmarkReport parallel = run_benchmark(threaded);
    auto js = report_to_json(serial, false);
    auto jp = report_to_json(parallel, false);
    // The job count is run metadata, not part of the results.
    CHECK(js["rows"] == jp["rows"]);
    CHECK(js["aggregates"] == jp["aggregates"]);
    CHECK(serial.rows.size() == 4);
    CHECK(summary_table(serial).find("greedy_window") != std::string::npos);
}

TEST_CASE("benchmark resume reuses finished cells") {
    const auto dir = std::filesystem::temp_directory_path() / "cfx_resume_test";
    std::filesystem::remove_all(dir);
    BenchmarkConfig cfg = tiny_config(1);
    cfg.output.dir = dir;
    const BenchmarkReport first = run_benchmark(cfg);
    CHECK(std::filesystem::exists(dir / "cells"));
    cfg.output.resume = true;
    const BenchmarkReport again = run_benchmark(cfg);
    CHECK(report_to_json(first, false)["rows"] == report_to_json(again, false)["rows"]);
    write_report(again, dir);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "report.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("benchmark records generator failures per cell") {
    BenchmarkConfig cfg = tiny_config(1);
    cfg.generators = {{"latentcf", {}}};
    cfg.classifier.kind = "knn";
    const BenchmarkReport r = run_benchmark(cfg);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        CHECK(row.error);
        CHECK_FALSE(row.metrics);
    }
    CHECK(r.aggregates[0].failures == 2);
    CHECK(r.aggregates[0].validity_rate == 0.0);
}

TEST_CASE("benchmark row json round trip") {
    const BenchmarkReport r = run_benchmark(tiny_config(1));
    for (const auto& row : r.rows) {
        const auto j = to_json(row);
        CHECK(to_json(benchmark_row_from_json(j)) == j);
    }
    const std::string csv = report_to_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
