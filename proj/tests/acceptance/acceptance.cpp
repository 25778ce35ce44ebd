// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cfx/autoencoder.hpp"
#include "cfx/benchmark.hpp"
#include "cfx/classifier.hpp"
#include "cfx/dataset_io.hpp"
#include "cfx/distances.hpp"
#include "cfx/errors.hpp"
#include "cfx/evolutionary.hpp"
#include "cfx/generators.hpp"
#include "cfx/instance.hpp"
#include "cfx/latent.hpp"
#include "cfx/matrix_profile.hpp"
#include "cfx/metrics.hpp"
#include "cfx/optimization.hpp"
#include "cfx/pareto.hpp"
#include "cfx/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cfx;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

TimeSeries random_series(Rng& rng, std::size_t C, std::size_t T) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(C * T);
    for (double& x : v) x = d(rng);
    return TimeSeries(C, T, v);
}

/// Everything observable about a generator run except wall-clock time.
json set_json(const CounterfactualSet& set) {
    json members = json::array();
    for (const auto& m : set.members) {
        json trace = json::array();
        for (const auto& e : m.trace) {
            trace.push_back({e.iteration, e.lambda, e.loss, e.validity, e.proximity, e.smoothness, e.sparsity, e.p_target,
                             e.margin_met});
        }
        members.push_back({{"counterfactual", m.counterfactual.to_nested()},
                           {"target", m.target},
                           {"achieved", m.achieved},
                           {"valid", m.valid},
                           {"margin_met", m.margin_met},
                           {"iterations", m.iterations},
                           {"model_calls", m.model_calls},
                           {"seed", m.seed},
                           {"metadata", m.metadata},
                           {"trace", trace}});
    }
    return {{"members", members},
            {"budget_exhausted", set.budget_exhausted},
            {"generations", set.generations},
            {"model_calls", set.model_calls}};
}

/// The planted-pattern benchmark setting: T=100, N=200, MLP, all generators.
BenchmarkConfig planted_benchmark() {
    BenchmarkConfig cfg;
    DatasetSpec ds;
    ds.name = "planted_pattern";
    ds.synthetic = PlantedPatternSpec{};
    cfg.datasets.push_back(ds);
    cfg.classifier.kind = "mlp";
    for (const auto& id : generator_ids()) cfg.generators.push_back({id, {}});
    cfg.evaluation.instances = 25;
    cfg.evaluation.seed = 7;
    return cfg;
}

struct PlantedSetting {
    Dataset train = make_planted_pattern(PlantedPatternSpec{});
    Dataset test = [] {
        PlantedPatternSpec s;
        s.seed = 1;
        return make_planted_pattern(s);
    }();
    MlpClassifier model = train_mlp(train, {});
    Autoencoder ae = train_autoencoder(train, autoencoder_latent_dim({}, train.shape()), autoencoder_spec({}, 0));
};

const PlantedSetting& planted() {
    static const PlantedSetting s;
    return s;
}

std::optional<BenchmarkReport>& benchmark_report() {
    static std::optional<BenchmarkReport> report;
    return report;
}

Outcome validity_contract() {
    const PlantedSetting& s = planted();
    const GeneratorContext ctx{s.model, s.train, &s.ae};
    std::size_t flagged = 0, confirmed = 0, cells = 0, errors = 0;
    for (const auto& id : generator_ids()) {
        for (std::size_t i = 0; i < 25; ++i) {
            const TimeSeries& x = s.test[i].series;
            const ClassLabel target = s.model.predict_proba(x).runner_up();
            ++cells;
            try {
                const auto set = run_generator(id, {}, ctx, x, target, i);
                for (const auto& m : set.members) {
                    if (!m.valid) continue;
                    ++flagged;
                    const ProbVector p = s.model.predict_proba(m.counterfactual);
                    if (p.argmax() == target && m.target == target) ++confirmed;
                }
            } catch (const Error&) {
                ++errors;
            }
        }
    }

    const auto t0 = Clock::now();
    benchmark_report() = run_benchmark(planted_benchmark());
    const double secs = seconds_since(t0);
    std::size_t bench_valid = 0, bench_errors = 0;
    for (const auto& row : benchmark_report()->rows) {
        if (row.error) ++bench_errors;
        if (row.metrics && row.metrics->validity) ++bench_valid;
    }
    std::ostringstream d;
    d << cells << " cells, " << flagged << " members flagged valid, " << confirmed << " re-verified, " << errors
      << " generator errors; benchmark " << benchmark_report()->rows.size() << " rows (" << bench_valid << " valid, "
      << bench_errors << " errors) in " << fmt(secs) << " s single-threaded";
    return {flagged > 0 && confirmed == flagged && errors == 0 && bench_errors == 0 && secs < 600.0, d.str()};
}

Outcome sparsity_contrast() {
    if (!benchmark_report()) benchmark_report() = run_benchmark(planted_benchmark());
    double evo = -1.0, wachter = -1.0;
    for (const auto& agg : benchmark_report()->aggregates) {
        if (agg.generator == "evo") evo = agg.stats.at("changed_fraction").median;
        if (agg.generator == "wachter") wachter = agg.stats.at("changed_fraction").median;
    }
    return {evo >= 0.0 && evo <= 0.30 && wachter >= 0.50 && evo < wachter,
            "median changed_fraction evo=" + fmt(evo) + " wachter=" + fmt(wachter)};
}

Outcome distance_oracles() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(31);
    std::uniform_int_distribution<std::size_t> len(1, 8), chan(1, 2);
    std::size_t dtw_ok = 0, frechet_ok = 0;
    for (int pair = 0; pair < 200; ++pair) {
        const std::size_t C = chan(rng);
        const TimeSeries a = random_series(rng, C, len(rng));
        const TimeSeries b = random_series(rng, C, len(rng));
        if (dtw(a, b) == oracle::dtw_by_paths(a, b)) ++dtw_ok;
        if (frechet(a, b) == oracle::frechet_recursive(a, b)) ++frechet_ok;
    }
    const double secs = seconds_since(t0);
    return {dtw_ok == 200 && frechet_ok == 200 && secs < 30.0,
            "dtw " + std::to_string(dtw_ok) + "/200, frechet " + std::to_string(frechet_ok) + "/200 exact in " +
                fmt(secs) + " s"};
}

Outcome gradient_check() {
    Rng rng = make_rng(41);
    MLPSpec spec;
    spec.hidden_sizes = {16, 8};
    spec.activation = Activation::tanh;
    spec.epochs = 20;
    const Dataset data = make_planted_pattern(testing_support::small_planted(24));
    const MlpClassifier mlp = train_mlp(data, spec);
    double mlp_worst = 0.0;
    for (std::size_t probe = 0; probe < 10; ++probe) {
        const TimeSeries x = random_series(rng, 1, 24);
        const std::size_t k = probe % 2;
        std::vector<double> w(2, 0.0);
        w[k] = 1.0;
        const auto got = mlp.logit_vjp(x, w);
        const auto f = [&](const std::vector<double>& v) { return mlp.logits(TimeSeries(1, 24, v)); };
        const auto xv = x.values();
        mlp_worst = std::max(mlp_worst, oracle::max_relative_error(got, oracle::fd_logit_gradient(f, {xv.begin(), xv.end()}, k)));
    }

    const PlantedSetting& s = planted();
    double dec_worst = 0.0;
    std::normal_distribution<double> n(0.0, 0.3);
    for (std::size_t probe = 0; probe < 10; ++probe) {
        std::vector<double> z = s.ae.encode(s.train[probe].series);
        for (double& v : z) v += n(rng);
        const std::size_t k = probe % 2;
        std::vector<double> w(2, 0.0);
        w[k] = 1.0;
        const auto got = latent_logit_vjp(s.model, s.ae, z, w);
        const auto f = [&](const std::vector<double>& zz) { return s.model.logits(s.ae.decode(zz)); };
        dec_worst = std::max(dec_worst, oracle::max_relative_error(got, oracle::fd_logit_gradient(f, z, k)));
    }
    return {mlp_worst < 1e-4 && dec_worst < 1e-4,
            "max relative error mlp=" + fmt(mlp_worst) + " decoder-composed=" + fmt(dec_worst)};
}

/// C-channel data where the channels in `informative` carry the class.
Dataset channel_toy(std::uint64_t seed, std::size_t C, const std::vector<std::size_t>& informative) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<LabeledInstance> out;
    for (std::size_t i = 0; i < 30; ++i) {
        const std::size_t label = i % 2;
        std::vector<std::vector<double>> ch(C, std::vector<double>(10));
        for (std::size_t c = 0; c < C; ++c) {
            const bool signal = std::find(informative.begin(), informative.end(), c) != informative.end();
            for (double& v : ch[c]) v = noise(rng) + (signal ? 2.5 * static_cast<double>(label) : 0.0);
        }
        out.push_back({TimeSeries::from_channels(ch), label});
    }
    return Dataset(std::move(out), {"low", "high"});
}

Outcome minimality_oracles() {
    std::size_t ng_ok = 0, ng_total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t T = 32 + 16 * (seed % 3);
        const Dataset d = make_planted_pattern(testing_support::small_planted(T, seed));
        const KnnClassifier knn = train_knn(d, 1, {});
        const Dataset queries = make_planted_pattern(testing_support::small_planted(T, seed + 100));
        for (std::size_t i = 0; i < 2; ++i) {
            ++ng_total;
            const TimeSeries& x = queries[i].series;
            const ClassLabel target = 1 - knn.predict(x);
            const auto r = native_guide_generate(knn, d, x, target);
            const auto nun = nearest_unlike_neighbor(d, x, target);
            const auto hits = oracle::minimal_windows(knn, x, nun.instance->series, target);
            const std::pair<std::size_t, std::size_t> got{r.metadata["window_start"], r.metadata["window_end"]};
            if (r.valid && std::find(hits.begin(), hits.end(), got) != hits.end()) ++ng_ok;
        }
    }

    std::size_t comte_ok = 0, comte_total = 0;
    Rng rng = make_rng(53);
    for (std::size_t C = 2; C <= 6; ++C) {
        for (std::uint64_t rep = 0; rep < 4; ++rep) {
            std::vector<std::size_t> informative{std::uniform_int_distribution<std::size_t>(0, C - 1)(rng)};
            if (rep % 2 == 1) {
                const std::size_t other = std::uniform_int_distribution<std::size_t>(0, C - 1)(rng);
                if (other != informative[0]) informative.push_back(other);
            }
            const Dataset d = channel_toy(100 * C + rep, C, informative);
            const KnnClassifier knn = train_knn(d, 1, {});
            const Dataset queries = channel_toy(900 + 100 * C + rep, C, informative);
            const TimeSeries& x = queries[rep % 2].series;
            const ClassLabel target = 1 - knn.predict(x);
            ++comte_total;
            const auto r = comte_generate(knn, d, x, target);
            const auto nun = nearest_unlike_neighbor(d, x, target);
            const auto expected = oracle::minimal_subset(knn, x, nun.instance->series, target);
            if (expected && r.valid && r.metadata["channels"].get<std::vector<std::size_t>>() == *expected) ++comte_ok;
        }
    }
    return {ng_ok == ng_total && comte_ok == comte_total,
            "native_guide " + std::to_string(ng_ok) + "/" + std::to_string(ng_total) + " minimal windows, comte " +
                std::to_string(comte_ok) + "/" + std::to_string(comte_total) + " minimal subsets (C=2..6)"};
}

Outcome nsga_correctness() {
    Rng rng = make_rng(61);
    std::uniform_int_distribution<std::size_t> size(1, 80);
    std::uniform_int_distribution<int> grid(0, 5);
    std::size_t sort_ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ObjectiveVector> objs(size(rng));
        for (auto& o : objs) o = {double(grid(rng)), double(grid(rng)), double(grid(rng)), double(grid(rng))};
        if (nondominated_sort(objs) == oracle::peel_fronts(objs)) ++sort_ok;
    }

    const Dataset d = make_planted_pattern(testing_support::small_planted(50));
    const MlpClassifier m = train_mlp(d, {});
    std::size_t fronts_ok = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const TimeSeries& x = d[i].series;
        EvoConfig cfg;
        cfg.population_size = 30;
        cfg.generations = 30;
        cfg.seed = i;
        const auto set = evolve_generate(m, d, x, m.predict_proba(x).runner_up(), cfg);
        std::vector<ObjectiveVector> objs;
        for (const auto& r : set.members) {
            const auto& o = r.metadata.at("objectives");
            objs.push_back({o.at("validity_gap"), o.at("proximity"), o.at("sparsity"), o.at("segments")});
        }
        bool ok = !objs.empty();
        for (const auto& a : objs) {
            for (const auto& b : objs) ok = ok && !oracle::dominates(a, b);
        }
        if (ok) ++fronts_ok;
    }
    return {sort_ok == 100 && fronts_ok == 5, "sort " + std::to_string(sort_ok) + "/100 exact, " +
                                                  std::to_string(fronts_ok) + "/5 returned fronts mutually non-dominated"};
}

Outcome matrix_profile_checks() {
    Rng rng = make_rng(71);
    std::uniform_int_distribution<std::size_t> len(16, 256), win(2, 16);
    std::normal_distribution<double> step(0.0, 1.0);
    std::size_t exact = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(len(rng));
        double level = 0.0;
        for (double& x : v) x = level += step(rng);
        const std::size_t m = std::min(win(rng), v.size() / 4);
        const auto got = matrix_profile(std::span<const double>(v), m);
        const auto want = oracle::matrix_profile(v, m);
        if (got.distances == want.distances && got.indices == want.indices) ++exact;
    }

    // Sine background with one window damped to 30% amplitude.
    const std::size_t m = 16;
    const double pi = std::acos(-1.0);
    std::size_t recovered = 0;
    std::normal_distribution<double> noise(0.0, 0.02);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t T = std::uniform_int_distribution<std::size_t>(128, 256)(rng);
        const std::size_t at = std::uniform_int_distribution<std::size_t>(m, T - 2 * m)(rng);
        std::vector<double> v(T);
        for (std::size_t t = 0; t < T; ++t) {
            const double base = std::sin(2.0 * pi * double(t) / double(m));
            v[t] = (t >= at && t < at + m ? 0.3 * base : base) + noise(rng);
        }
        const auto p = matrix_profile(std::span<const double>(v), m);
        const std::size_t top = top_discords(p, 1).front();
        const std::size_t tol = (m + 1) / 2;
        if ((top > at ? top - at : at - top) <= tol) ++recovered;
    }
    return {exact == 50 && recovered == 20, "profile exact " + std::to_string(exact) + "/50, planted discord " +
                                                std::to_string(recovered) + "/20 within ceil(m/2)"};
}

Outcome metric_sanity() {
    const PlantedSetting& s = planted();
    std::size_t zero_fail = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        const TimeSeries& x = s.test[i].series;
        CounterfactualResult same{x, x};
        same.target = s.model.predict(x);
        const MetricReport r = evaluate_one(s.model, s.train, x, same);
        for (const char* f : {"l1", "l2", "linf", "dtw", "frechet", "l0_count", "changed_fraction", "segment_count",
                              "mean_segment_length", "autocorr_distance", "spectral_distance"}) {
            if (*metric_value(r, f) != 0.0) ++zero_fail;
        }
    }
    CounterfactualSet single;
    single.members.emplace_back(s.test[0].series, s.test[1].series);
    const double div = diversity(single);

    std::size_t stable = 0, checked = 0;
    const GeneratorContext ctx{s.model, s.train, &s.ae};
    for (const auto& id : generator_ids()) {
        const TimeSeries& x = s.test[2].series;
        const ClassLabel target = s.model.predict_proba(x).runner_up();
        const GeneratorFn gen = [&](const TimeSeries& in, std::uint64_t seed) {
            return run_generator(id, {}, ctx, in, target, seed).best();
        };
        if (!gen(x, 3).valid) continue;
        ++checked;
        const auto st = stability(gen, s.model, x, target, 0.0, 2, 3);
        if (st.cf_distance_mean == 0.0 && st.validity_retention == 1.0 && st.failed_trials == 0) ++stable;
    }
    return {zero_fail == 0 && div == 0.0 && checked > 0 && stable == checked,
            std::to_string(zero_fail) + " nonzero metrics for cf == x, singleton diversity " + fmt(div) +
                ", sigma=0 stability (0, 1) for " + std::to_string(stable) + "/" + std::to_string(checked) +
                " valid generators"};
}

Outcome determinism() {
    const PlantedSetting& s = planted();
    const GeneratorContext ctx{s.model, s.train, &s.ae};
    std::size_t same = 0;
    for (const auto& id : generator_ids()) {
        const TimeSeries& x = s.test[5].series;
        const ClassLabel target = s.model.predict_proba(x).runner_up();
        const auto a = set_json(run_generator(id, {}, ctx, x, target, 17)).dump();
        const auto b = set_json(run_generator(id, {}, ctx, x, target, 17)).dump();
        if (a == b) ++same;
    }
    if (!benchmark_report()) benchmark_report() = run_benchmark(planted_benchmark());
    const std::string first = report_to_json(*benchmark_report(), false).dump();
    const std::string second = report_to_json(run_benchmark(planted_benchmark()), false).dump();
    return {same == generator_ids().size() && first == second,
            std::to_string(same) + "/" + std::to_string(generator_ids().size()) +
                " generators byte-identical; benchmark JSON " + (first == second ? "identical" : "differs")};
}

Outcome round_trips() {
    std::size_t tsv_ok = 0, ts_ok = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Dataset u = testing_support::random_dataset(seed, false);
        if (parse_ucr_tsv(serialize_dataset(u, DatasetFormat::ucr_tsv)).instances() == u.instances()) ++tsv_ok;
        const Dataset m = testing_support::random_dataset(1000 + seed, true);
        const Dataset back = parse_ts(serialize_dataset(m, DatasetFormat::ts));
        if (back == m) ++ts_ok;
    }
    const Dataset two_line = load_dataset(CFX_FIXTURE_DIR "/two_line.tsv", DatasetFormat::ucr_tsv);
    const Dataset two_channel = load_dataset(CFX_FIXTURE_DIR "/two_channel.ts", DatasetFormat::ts);
    const bool fixtures = two_line.size() == 2 && two_line.shape() == Shape{1, 3} && two_channel.size() == 1 &&
                          two_channel.shape() == Shape{2, 2};

    // A file of FordA's training-split shape: 3601 series of length 500.
    const auto t0 = Clock::now();
    Rng rng = make_rng(81);
    std::normal_distribution<double> v(0.0, 1.0);
    std::vector<LabeledInstance> rows;
    for (std::size_t i = 0; i < 3601; ++i) {
        std::vector<double> s(500);
        for (double& x : s) x = v(rng);
        rows.push_back({TimeSeries::univariate(s), i % 2});
    }
    const Dataset big(std::move(rows), {"-1", "1"});
    const Dataset big_back = parse_ucr_tsv(serialize_dataset(big, DatasetFormat::ucr_tsv));
    const bool big_ok = big_back.instances() == big.instances();
    const double secs = seconds_since(t0);
    return {tsv_ok == 50 && ts_ok == 50 && fixtures && big_ok,
            "ucr_tsv " + std::to_string(tsv_ok) + "/50, ts " + std::to_string(ts_ok) + "/50, fixtures " +
                (fixtures ? "ok" : "wrong shape") + ", 3601x500 tsv " + (big_ok ? "ok" : "differs") + " in " +
                fmt(secs) + " s"};
}

Outcome stability_protocol() {
    const MlpClassifier m = testing_support::linear_toy();
    const TimeSeries x = TimeSeries::univariate({0.0});
    const auto retention = [&](double margin) {
        OptConfig cfg;
        cfg.target_margin = margin;
        const GeneratorFn gen = [&](const TimeSeries& s, std::uint64_t) { return wachter_generate(m, s, 1, cfg); };
        return stability(gen, m, x, 1, 0.1, 100, 5).validity_retention;
    };
    const double loose = retention(0.0);
    const double firm = retention(0.2);
    return {loose < 1.0 && firm >= 0.9, "retention margin 0: " + fmt(loose) + ", margin 0.2: " + fmt(firm)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"validity contract", validity_contract},
        {"sparsity contrast", sparsity_contrast},
        {"distance kernel oracles", distance_oracles},
        {"gradient correctness", gradient_check},
        {"minimality oracles", minimality_oracles},
        {"nsga-ii correctness", nsga_correctness},
        {"matrix profile", matrix_profile_checks},
        {"metric sanity", metric_sanity},
        {"determinism", determinism},
        {"format round trips", round_trips},
        {"stability protocol", stability_protocol},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %-24s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
