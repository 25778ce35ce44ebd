#include <doctest.h>

#include "cfx/distances.hpp"
#include "cfx/errors.hpp"
#include "cfx/instance.hpp"
#include "cfx/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cfx;

namespace {

/// Always predicts class 0 with certainty.
class ConstantModel final : public Classifier {
public:
    explicit ConstantModel(Shape s) : shape_(s) {}
    std::size_t num_classes() const override { return 2; }
    Shape input_shape() const override { return shape_; }
    ProbVector predict_proba(const TimeSeries&) const override { return {{1.0, 0.0}}; }

private:
    Shape shape_;
};

/// 3-channel data where only channel 2 separates the classes.
Dataset channel_two_toy() {
    Rng rng = make_rng(5);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<LabeledInstance> out;
    for (std::size_t i = 0; i < 30; ++i) {
        const std::size_t label = i % 2;
        std::vector<std::vector<double>> ch(3, std::vector<double>(12));
        for (std::size_t c = 0; c < 3; ++c) {
            for (double& v : ch[c]) v = noise(rng) + (c == 2 ? 3.0 * static_cast<double>(label) : 0.0);
        }
        out.push_back({TimeSeries::from_channels(ch), label});
    }
    return Dataset(std::move(out), {"low", "high"});
}

}  // namespace

TEST_CASE("nearest unlike neighbour") {
    const Dataset d({{TimeSeries::univariate({0, 0}), 0},
                     {TimeSeries::univariate({2, 0}), 1},
                     {TimeSeries::univariate({1, 0}), 1}},
                    {"a", "b"});
    const auto n = nearest_unlike_neighbor(d, TimeSeries::univariate({0, 0}), 1);
    CHECK(n.index == 2);
    CHECK(n.distance == 1.0);
    CHECK(n.instance->label == 1);
    const auto self = nearest_unlike_neighbor(d, d[0].series, 0);
    CHECK(self.index == 0);
    CHECK(self.distance == 0.0);
    const Dataset lonely({{TimeSeries::univariate({0}), 0}, {TimeSeries::univariate({1}), 0}}, {"a", "b"});
    CHECK_THROWS_AS(nearest_unlike_neighbor(lonely, TimeSeries::univariate({0}), 1), NoNeighborError);
}

TEST_CASE("nun matches a full scan") {
    const Dataset d = make_planted_pattern(testing_support::small_planted(16, 3));
    Rng rng = make_rng(1);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int q = 0; q < 20; ++q) {
        std::vector<double> v(16);
        for (double& x : v) x = noise(rng);
        const TimeSeries x = TimeSeries::univariate(v);
        for (ClassLabel t : {0u, 1u}) {
            CHECK(nearest_unlike_neighbor(d, x, t).index == oracle::argmin_l2(d, x, t));
        }
    }
}

TEST_CASE("occlusion saliency") {
    const TimeSeries x = TimeSeries::univariate({1, 2, 3, 4, 5, 6});
    const auto flat = occlusion_saliency(ConstantModel({1, 6}), x, 2, OcclusionBaseline::zero);
    CHECK(flat.all_zero());
    CHECK(flat.shape == x.shape());

    // Logit of class 1 reads t = 0 only.
    const DenseLayer layer{6, 2, Activation::identity, {0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0}, {0, 0}};
    const MlpClassifier m(DenseNet({layer}), {1, 6});
    const auto s = occlusion_saliency(m, x, 2, OcclusionBaseline::zero);
    CHECK(s.at(0, 0) == 1.0);
    for (std::size_t t = 2; t < 6; ++t) CHECK(s.at(0, t) == 0.0);
    for (double v : s.scores) CHECK((v >= 0.0 && v <= 1.0));
    CHECK_THROWS_AS(occlusion_saliency(m, x, 7, OcclusionBaseline::zero), ConfigError);
    CHECK_THROWS_AS(occlusion_saliency(m, x, 2, OcclusionBaseline::nun), ConfigError);
}

TEST_CASE("native guide on the planted toy matches the minimal window") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset d = make_planted_pattern(testing_support::small_planted(64, seed));
        const KnnClassifier knn = train_knn(d, 1, {});
        // An instance from another draw; its bump decides the class.
        const Dataset queries = make_planted_pattern(testing_support::small_planted(64, seed + 100));
        for (std::size_t i = 0; i < 2; ++i) {
            const TimeSeries& x = queries[i].series;
            const ClassLabel target = 1 - knn.predict(x);
            const auto r = native_guide_generate(knn, d, x, target);
            CHECK(r.valid);
            const auto nun = nearest_unlike_neighbor(d, x, target);
            const auto oracle_windows = oracle::minimal_windows(knn, x, nun.instance->series, target);
            REQUIRE_FALSE(oracle_windows.empty());
            const std::pair<std::size_t, std::size_t> got{r.metadata["window_start"], r.metadata["window_end"]};
            CHECK(got.second - got.first == oracle_windows.front().second - oracle_windows.front().first);
            CHECK(std::find(oracle_windows.begin(), oracle_windows.end(), got) != oracle_windows.end());
            // The transplant overlaps the planted bump.
            CHECK(got.first <= 25 + 10);
            CHECK(got.second >= 25);
        }
    }
}

TEST_CASE("native guide edge cases") {
    const Dataset d = make_planted_pattern(testing_support::small_planted(32));
    const KnnClassifier knn = train_knn(d, 1, {});
    const TimeSeries& x = d[0].series;
    const auto same = native_guide_generate(knn, d, x, d[0].label);
    CHECK(same.valid);
    CHECK(same.counterfactual == x);

    // The model never predicts class 1, so every window fails and the widest is the NUN.
    const auto stuck = native_guide_generate(ConstantModel(d.shape()), d, x, 1);
    CHECK_FALSE(stuck.valid);
    CHECK(stuck.counterfactual == nearest_unlike_neighbor(d, x, 1).instance->series);
    CHECK(transplant_window(x, d[1].series, 0, 31) == d[1].series);
}

TEST_CASE("native guide changes exactly the transplanted window") {
    const Dataset d = make_planted_pattern(testing_support::small_planted(48));
    const MlpClassifier m = train_mlp(d, {});
    const TimeSeries& x = d[2].series;
    const auto r = native_guide_generate(m, d, x, 1 - m.predict(x));
    const auto mask = changed_segments(x, r.counterfactual, 0.0);
    REQUIRE(mask.segments.size() == 1);
    CHECK(mask.segments[0].start == r.metadata["window_start"].get<std::size_t>());
    CHECK(mask.segments[0].end == r.metadata["window_end"].get<std::size_t>());
}

TEST_CASE("comte picks the informative channel") {
    const Dataset d = channel_two_toy();
    const KnnClassifier knn = train_knn(d, 1, {});
    for (std::size_t i = 0; i < 6; ++i) {
        const TimeSeries& x = d[i].series;
        const ClassLabel target = 1 - d[i].label;
        const auto r = comte_generate(knn, d, x, target);
        CHECK(r.valid);
        const auto nun = nearest_unlike_neighbor(d, x, target);
        const auto expected = oracle::minimal_subset(knn, x, nun.instance->series, target);
        REQUIRE(expected);
        CHECK(r.metadata["channels"].get<std::vector<std::size_t>>() == *expected);
        CHECK(*expected == std::vector<std::size_t>{2});
    }
}

TEST_CASE("comte single channel and full substitution") {
    const Dataset d = make_planted_pattern(testing_support::small_planted(32));
    const KnnClassifier knn = train_knn(d, 1, {});
    const TimeSeries& x = d[0].series;
    const auto r = comte_generate(knn, d, x, 1);
    CHECK(r.counterfactual == nearest_unlike_neighbor(d, x, 1).instance->series);
    const Dataset three = channel_two_toy();
    CHECK(substitute_channels(three[0].series, three[1].series, {0, 1, 2}) == three[1].series);
}

TEST_CASE("comte greedy search above the exhaustive limit") {
    const Dataset d = channel_two_toy();
    const KnnClassifier knn = train_knn(d, 1, {});
    ComteConfig cfg;
    cfg.exact_below = 2;
    const auto r = comte_generate(knn, d, d[0].series, 1, cfg);
    CHECK(r.valid);
    CHECK(r.metadata["search"] == "greedy");
    CHECK(r.metadata["channels"].get<std::vector<std::size_t>>() == std::vector<std::size_t>{2});
}
