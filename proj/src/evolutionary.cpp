#include "cfx/evolutionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/errors.hpp"
#include "cfx/instance.hpp"
#include "cfx/rng.hpp"

namespace cfx {

namespace {

struct Individual {
    TimeSeries series;
    ObjectiveVector objectives;
    ProbVector probs;
    std::size_t rank = 0;
    double crowding = 0.0;
};

void validate(const EvoConfig& cfg) {
    if (cfg.population_size < 4) throw ConfigError("population_size must be at least 4");
    const auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(cfg.gaussian_point_prob, "gaussian_point_prob");
    prob(cfg.segment_swap_prob, "segment_swap_prob");
    prob(cfg.segment_revert_prob, "segment_revert_prob");
    prob(cfg.crossover_prob, "crossover_prob");
    if (cfg.gaussian_sigma < 0.0) throw ConfigError("gaussian_sigma must be >= 0");
    if (!(cfg.segment_min_fraction > 0.0 && cfg.segment_min_fraction <= cfg.segment_max_fraction &&
          cfg.segment_max_fraction <= 1.0)) {
        throw ConfigError("segment fractions must satisfy 0 < min <= max <= 1");
    }
    if (cfg.target_margin < 0.0 || cfg.target_margin >= 0.5) throw ConfigError("target_margin must lie in [0, 0.5)");
}

// Copies a random contiguous window of `donor` into one random channel.
void segment_swap(TimeSeries& child, const TimeSeries& donor, const EvoConfig& cfg, Rng& rng) {
    const std::size_t T = child.length();
    const auto lo = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cfg.segment_min_fraction * T)), 1, T);
    const auto hi = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cfg.segment_max_fraction * T)), lo, T);
    const std::size_t channel = std::uniform_int_distribution<std::size_t>(0, child.channels() - 1)(rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, T - len)(rng);
    for (std::size_t t = start; t < start + len; ++t) child(channel, t) = donor(channel, t);
}

bool better(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.crowding != b.crowding) return a.crowding > b.crowding;
    return ia < ib;
}

// Recomputes front ranks and crowding distances in place.
void assign_rank_and_crowding(std::vector<Individual>& pop) {
    std::vector<ObjectiveVector> objs;
    objs.reserve(pop.size());
    for (const auto& ind : pop) objs.push_back(ind.objectives);
    const auto fronts = nondominated_sort(objs);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        std::vector<ObjectiveVector> front_objs;
        for (auto i : fronts[f]) front_objs.push_back(objs[i]);
        const auto crowd = crowding_distance(front_objs);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            pop[fronts[f][k]].rank = f;
            pop[fronts[f][k]].crowding = crowd[k];
        }
    }
}

double best_gap(const std::vector<Individual>& pop) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ind : pop) best = std::min(best, ind.objectives.validity_gap);
    return best;
}

}  // namespace

ObjectiveVector evaluate_objectives(const TimeSeries& x, const TimeSeries& candidate, const ProbVector& probs,
                                    ClassLabel target, double target_margin, double tolerance) {
    ObjectiveVector o;
    o.validity_gap = std::max(0.0, 0.5 + target_margin - probs[target]);
    o.proximity = minkowski(x, candidate, Norm::l2) / std::sqrt(static_cast<double>(x.size()));
    const ChangeMask mask = changed_segments(x, candidate, tolerance);
    o.sparsity = static_cast<double>(mask.changed_count()) / static_cast<double>(x.size());
    o.segments = static_cast<double>(mask.segments.size());
    return o;
}

CounterfactualSet evolve_generate(const Classifier& model, const Dataset& dataset, const TimeSeries& x,
                                  ClassLabel target, const EvoConfig& cfg) {
    validate(cfg);
    check_target(model, target);
    ModelProbe probe(model);
    const ProbVector initial = probe.predict(x);
    if (initial.argmax() == target) {
        CounterfactualSet set;
        set.members.push_back(unchanged_result(x, target, initial, "evo", cfg.seed, cfg.target_margin));
        set.model_calls = 1;
        return set;
    }

    const NUNResult nun = nearest_unlike_neighbor(dataset, x, target, cfg.metric);
    const TimeSeries& donor = nun.instance->series;
    const double tol = cfg.metric.change_tolerance;
    const std::size_t N = cfg.population_size;
    const std::size_t T = x.length();

    CounterfactualSet set;
    const auto make = [&](TimeSeries s) {
        ProbVector p = probe.predict(s);
        ObjectiveVector o = evaluate_objectives(x, s, p, target, cfg.target_margin, tol);
        return Individual{std::move(s), o, std::move(p)};
    };

    std::vector<Individual> pop;
    pop.reserve(2 * N);
    pop.push_back(make(x));
    for (std::size_t i = 1; i < N; ++i) {
        Rng rng = make_rng(cfg.seed, {0, i});
        TimeSeries s = x;
        segment_swap(s, donor, cfg, rng);
        pop.push_back(make(std::move(s)));
    }
    assign_rank_and_crowding(pop);

    std::vector<double> gap_history{best_gap(pop)};
    std::size_t generation = 0;
    while (generation < cfg.generations) {
        if (probe.calls() + N > cfg.max_model_calls) {
            set.budget_exhausted = true;
            break;
        }
        ++generation;
        std::vector<Individual> offspring;
        offspring.reserve(N);
        for (std::size_t i = 0; i < N; ++i) {
            Rng rng = make_rng(cfg.seed, {generation, i});
            std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
            const auto tournament = [&]() {
                const std::size_t a = pick(rng);
                const std::size_t b = pick(rng);
                return better(pop[a], a, pop[b], b) ? a : b;
            };
            const std::size_t p1 = tournament();
            const std::size_t p2 = tournament();

            TimeSeries child = pop[p1].series;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            if (T > 1 && unit(rng) < cfg.crossover_prob) {
                const std::size_t cut = std::uniform_int_distribution<std::size_t>(1, T - 1)(rng);
                for (std::size_t c = 0; c < child.channels(); ++c) {
                    for (std::size_t t = cut; t < T; ++t) child(c, t) = pop[p2].series(c, t);
                }
            }
            // Point noise only refines steps that already differ from x, so it never opens new segments.
            if (cfg.gaussian_point_prob > 0.0 && cfg.gaussian_sigma > 0.0) {
                std::normal_distribution<double> noise(0.0, cfg.gaussian_sigma);
                auto v = child.values();
                const auto orig = x.values();
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (std::abs(v[k] - orig[k]) > tol && unit(rng) < cfg.gaussian_point_prob) v[k] += noise(rng);
                }
            }
            if (unit(rng) < cfg.segment_swap_prob) segment_swap(child, donor, cfg, rng);
            if (unit(rng) < cfg.segment_revert_prob) segment_swap(child, x, cfg, rng);
            offspring.push_back(make(std::move(child)));
        }

        for (auto& child : offspring) pop.push_back(std::move(child));
        std::vector<ObjectiveVector> objs;
        objs.reserve(pop.size());
        for (const auto& ind : pop) objs.push_back(ind.objectives);
        const auto fronts = nondominated_sort(objs);

        std::vector<std::size_t> survivors;
        for (const auto& front : fronts) {
            if (survivors.size() + front.size() <= N) {
                survivors.insert(survivors.end(), front.begin(), front.end());
                continue;
            }
            std::vector<ObjectiveVector> front_objs;
            for (auto i : front) front_objs.push_back(objs[i]);
            const auto crowd = crowding_distance(front_objs);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            // Ties in crowding keep the smaller validity gap so the best gap never regresses.
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
                if (front_objs[a].validity_gap != front_objs[b].validity_gap) {
                    return front_objs[a].validity_gap < front_objs[b].validity_gap;
                }
                return front[a] < front[b];
            });
            for (std::size_t k = 0; survivors.size() < N; ++k) survivors.push_back(front[order[k]]);
            break;
        }
        std::sort(survivors.begin(), survivors.end());
        std::vector<Individual> next;
        next.reserve(2 * N);
        for (auto i : survivors) next.push_back(std::move(pop[i]));
        pop = std::move(next);
        assign_rank_and_crowding(pop);
        gap_history.push_back(best_gap(pop));
    }

    // Valid, distinct members of the first front, closest first.
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].rank != 0 || !meets_target(pop[i].probs, target, cfg.target_margin)) continue;
        const bool duplicate = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t j) { return pop[j].series == pop[i].series; });
        if (!duplicate) chosen.push_back(i);
    }
    std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        const auto oa = pop[a].objectives.as_array();
        const auto ob = pop[b].objectives.as_array();
        return std::make_tuple(oa[1], oa[2], oa[3]) < std::make_tuple(ob[1], ob[2], ob[3]);
    });
    if (chosen.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pop.size(); ++i) {
            const auto& a = pop[i].objectives;
            const auto& b = pop[best].objectives;
            if (std::make_pair(a.validity_gap, a.proximity) < std::make_pair(b.validity_gap, b.proximity)) best = i;
        }
        chosen.push_back(best);
    }

    set.generations = generation;
    set.model_calls = probe.calls();
    for (auto i : chosen) {
        CounterfactualResult r{x, pop[i].series};
        r.target = target;
        r.generator_id = "evo";
        r.iterations = generation;
        r.seed = cfg.seed;
        r.model_calls = probe.calls();
        const auto& o = pop[i].objectives;
        r.metadata["objectives"] = {{"validity_gap", o.validity_gap},
                                    {"proximity", o.proximity},
                                    {"sparsity", o.sparsity},
                                    {"segments", o.segments}};
        r.metadata["nun_index"] = nun.index;
        r.metadata["budget_exhausted"] = set.budget_exhausted;
        r.metadata["best_gap_history"] = gap_history;
        settle_validity(r, pop[i].probs, cfg.target_margin);
        set.members.push_back(std::move(r));
    }
    return set;
}

}  // namespace cfx
