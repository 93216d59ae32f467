#pragma once

// NSGA-II over binary feature masks.
//
// Generation loop: binary tournament on (rank, crowding) -> uniform crossover
// -> bit-flip mutation -> evaluate offspring -> merge parents and offspring ->
// non-dominated sort -> refill the population front by front, breaking the
// last front by crowding distance -> push the new first front into the
// archive. Fitness must be a pure function of the mask; evaluations within a
// generation may run on several threads and are memoized by mask.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/core/random.hpp"
#include "vitalsel/nsga2/mask.hpp"
#include "vitalsel/nsga2/pareto.hpp"

namespace vitalsel {

struct Individual {
    FeatureMask mask;
    Objectives objectives;
    int rank = 0; // 1 = first front
    double crowding = 0.0;
};

enum class ObjectiveMode { SuppressIdentity, SuppressActivity };

inline std::string_view to_string(ObjectiveMode m)
{
    return m == ObjectiveMode::SuppressIdentity ? "suppress-identity" : "suppress-activity";
}

inline ObjectiveMode parse_objective_mode(std::string_view s)
{
    if (s == "suppress-identity" || s == "suppress_identity") {
        return ObjectiveMode::SuppressIdentity;
    }
    if (s == "suppress-activity" || s == "suppress_activity") {
        return ObjectiveMode::SuppressActivity;
    }
    throw InvalidArgument("unknown objective mode '" + std::string(s) + "'");
}

struct GaConfig {
    int population_size = 50;
    int max_generations = 50;
    double crossover_rate = 0.9;     // probability a parent pair is recombined
    double crossover_mix_rate = 0.5; // per-bit exchange probability inside a recombined pair
    double mutation_rate = -1.0;     // per-bit flip probability; negative means 1/N
    std::uint64_t seed = 0;
    ObjectiveMode objective_mode = ObjectiveMode::SuppressIdentity;
    bool normalized_crowding = false;
    unsigned threads = 1;
    Objectives penalty{0.0, 0.0, -1.0};

    void validate() const
    {
        require(population_size >= 2, "GaConfig: population_size must be >= 2");
        require(max_generations >= 0, "GaConfig: max_generations must be >= 0");
        require(crossover_rate >= 0.0 && crossover_rate <= 1.0, "GaConfig: crossover_rate must be in [0, 1]");
        require(crossover_mix_rate >= 0.0 && crossover_mix_rate <= 1.0, "GaConfig: crossover_mix_rate must be in [0, 1]");
        require(mutation_rate <= 1.0, "GaConfig: mutation_rate must be <= 1");
    }
};

// Non-dominated individuals collected across generations, unique by mask.
class ParetoArchive {
public:
    // Returns true when the candidate entered the archive.
    bool offer(const Individual& candidate)
    {
        for (const auto& m : members_) {
            if (m.mask == candidate.mask) {
                return false; // first evaluation of a mask wins
            }
        }
        for (const auto& m : members_) {
            if (dominates(m.objectives, candidate.objectives)) {
                return false;
            }
        }
        std::erase_if(members_, [&](const Individual& m) { return dominates(candidate.objectives, m.objectives); });
        members_.push_back(candidate);
        return true;
    }

    void update(std::span<const Individual> candidates)
    {
        for (const auto& c : candidates) {
            offer(c);
        }
    }

    [[nodiscard]] const std::vector<Individual>& members() const { return members_; }
    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }

    // No member dominates another.
    [[nodiscard]] bool is_pure() const
    {
        for (const auto& a : members_) {
            for (const auto& b : members_) {
                if (&a != &b && dominates(a.objectives, b.objectives)) {
                    return false;
                }
            }
        }
        return true;
    }

    // Highest value reached on each objective.
    [[nodiscard]] Objectives best() const
    {
        if (members_.empty()) {
            return {};
        }
        Objectives b = members_.front().objectives;
        for (const auto& m : members_) {
            for (std::size_t k = 0; k < b.size(); ++k) {
                b[k] = std::max(b[k], m.objectives[k]);
            }
        }
        return b;
    }

private:
    std::vector<Individual> members_;
};

// Tournament of two: lower rank wins, then larger crowding, then a coin flip.
inline std::size_t binary_tournament(std::span<const Individual> pop, Rng& rng)
{
    require(!pop.empty(), "binary_tournament: empty population");
    if (pop.size() == 1) {
        return 0;
    }
    const std::size_t a = uniform_index(rng, pop.size());
    std::size_t b = uniform_index(rng, pop.size() - 1);
    if (b >= a) {
        ++b;
    }
    if (pop[a].rank != pop[b].rank) {
        return pop[a].rank < pop[b].rank ? a : b;
    }
    if (pop[a].crowding != pop[b].crowding) {
        return pop[a].crowding > pop[b].crowding ? a : b;
    }
    return uniform01(rng) < 0.5 ? a : b;
}

// With probability `rate` the pair is recombined by exchanging each bit with
// probability `mix_rate`; otherwise the children are copies of the parents.
inline std::pair<FeatureMask, FeatureMask> crossover(const FeatureMask& p1, const FeatureMask& p2, Rng& rng, double rate = 0.9,
                                                     double mix_rate = 0.5)
{
    require(p1.size() == p2.size(), "crossover: parent lengths differ");
    FeatureMask c1 = p1;
    FeatureMask c2 = p2;
    if (uniform01(rng) < rate) {
        for (std::size_t i = 0; i < p1.size(); ++i) {
            if (uniform01(rng) < mix_rate) {
                c1.set(i, p2[i]);
                c2.set(i, p1[i]);
            }
        }
    }
    return {std::move(c1), std::move(c2)};
}

// Independent bit flips with probability `rate`.
inline FeatureMask mutate(FeatureMask mask, Rng& rng, double rate)
{
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (uniform01(rng) < rate) {
            mask.flip(i);
        }
    }
    return mask;
}

struct GenerationStats {
    int generation = 0; // 0 = initial population
    Objectives best;    // per-objective maximum over the archive
    std::size_t archive_size = 0;
    std::size_t evaluations = 0; // fitness calls made this generation (cache misses)
    double wall_seconds = 0.0;
};

using FitnessFunction = std::function<Objectives(const FeatureMask&)>;
using GenerationObserver = std::function<void(const GenerationStats&, const ParetoArchive&)>;

namespace detail {

    class Evaluator {
    public:
        Evaluator(const FitnessFunction& fitness, const GaConfig& cfg) : fitness_(fitness), cfg_(cfg) {}

        // Fills objectives for every individual; returns the number of fitness calls.
        std::size_t evaluate(std::vector<Individual>& pop)
        {
            std::vector<const FeatureMask*> pending;
            for (const auto& ind : pop) {
                if (!ind.mask.none() && !cache_.contains(ind.mask) &&
                    std::none_of(pending.begin(), pending.end(), [&](const FeatureMask* m) { return *m == ind.mask; })) {
                    pending.push_back(&ind.mask);
                }
            }
            std::vector<Objectives> results(pending.size());
            parallel_for(pending.size(), cfg_.threads, [&](std::size_t i) {
                try {
                    results[i] = fitness_(*pending[i]);
                    if (results[i].size() != cfg_.penalty.size() ||
                        std::any_of(results[i].begin(), results[i].end(), [](double v) { return !std::isfinite(v); })) {
                        results[i] = cfg_.penalty;
                    }
                } catch (const std::exception&) {
                    results[i] = cfg_.penalty;
                }
            });
            for (std::size_t i = 0; i < pending.size(); ++i) {
                cache_.emplace(*pending[i], std::move(results[i]));
            }
            for (auto& ind : pop) {
                ind.objectives = ind.mask.none() ? cfg_.penalty : cache_.at(ind.mask);
            }
            return pending.size();
        }

    private:
        const FitnessFunction& fitness_;
        const GaConfig& cfg_;
        std::map<FeatureMask, Objectives> cache_;
    };

    // Assigns rank and crowding to every member of pop; returns the fronts.
    inline std::vector<std::vector<std::size_t>> rank_population(std::vector<Individual>& pop, bool normalized)
    {
        std::vector<Objectives> objs;
        objs.reserve(pop.size());
        for (const auto& ind : pop) {
            objs.push_back(ind.objectives);
        }
        auto fronts = fast_nondominated_sort(objs);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            std::vector<Objectives> front_objs;
            for (auto i : fronts[f]) {
                front_objs.push_back(objs[i]);
            }
            const auto cd = crowding_distance(front_objs, normalized);
            for (std::size_t k = 0; k < fronts[f].size(); ++k) {
                pop[fronts[f][k]].rank = static_cast<int>(f) + 1;
                pop[fronts[f][k]].crowding = cd[k];
            }
        }
        return fronts;
    }

    inline std::vector<Individual> first_front(const std::vector<Individual>& pop)
    {
        std::vector<Individual> out;
        for (const auto& ind : pop) {
            if (ind.rank == 1) {
                out.push_back(ind);
            }
        }
        return out;
    }

} // namespace detail

inline ParetoArchive evolve(const GaConfig& cfg, std::size_t n_features, const FitnessFunction& fitness,
                            const GenerationObserver& observer = nullptr)
{
    cfg.validate();
    require(n_features >= 1, "evolve: need at least one feature");
    const double mutation_rate = cfg.mutation_rate < 0.0 ? 1.0 / static_cast<double>(n_features) : cfg.mutation_rate;
    const auto pop_size = static_cast<std::size_t>(cfg.population_size);
    using clock = std::chrono::steady_clock;

    detail::Evaluator evaluator(fitness, cfg);
    ParetoArchive archive;
    auto started = clock::now();

    std::vector<Individual> pop(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) {
        auto rng = make_rng(cfg.seed, {0, i});
        pop[i].mask = FeatureMask(n_features);
        for (std::size_t b = 0; b < n_features; ++b) {
            pop[i].mask.set(b, uniform01(rng) < 0.5);
        }
    }
    std::size_t calls = evaluator.evaluate(pop);
    detail::rank_population(pop, cfg.normalized_crowding);
    archive.update(detail::first_front(pop));
    auto report = [&](int gen) {
        if (observer) {
            const double wall = std::chrono::duration<double>(clock::now() - started).count();
            observer(GenerationStats{gen, archive.best(), archive.size(), calls, wall}, archive);
        }
    };
    report(0);

    for (int gen = 1; gen <= cfg.max_generations; ++gen) {
        started = clock::now();
        auto select_rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(gen), 0xfffffffULL});
        std::vector<std::size_t> parents(pop_size + (pop_size % 2));
        for (auto& p : parents) {
            p = binary_tournament(pop, select_rng);
        }
        std::vector<Individual> offspring;
        offspring.reserve(parents.size());
        for (std::size_t k = 0; k < parents.size(); k += 2) {
            auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(gen), k / 2});
            auto [c1, c2] = crossover(pop[parents[k]].mask, pop[parents[k + 1]].mask, rng, cfg.crossover_rate, cfg.crossover_mix_rate);
            offspring.push_back(Individual{mutate(std::move(c1), rng, mutation_rate), {}, 0, 0.0});
            offspring.push_back(Individual{mutate(std::move(c2), rng, mutation_rate), {}, 0, 0.0});
        }
        offspring.resize(pop_size);
        calls = evaluator.evaluate(offspring);

        std::vector<Individual> merged = pop;
        merged.insert(merged.end(), offspring.begin(), offspring.end());
        const auto fronts = detail::rank_population(merged, cfg.normalized_crowding);

        std::vector<Individual> next;
        next.reserve(pop_size);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= pop_size) {
                for (auto i : front) {
                    next.push_back(merged[i]);
                }
                continue;
            }
            std::vector<std::size_t> order(front.begin(), front.end());
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
            for (std::size_t k = 0; next.size() < pop_size; ++k) {
                next.push_back(merged[order[k]]);
            }
            break;
        }
        pop = std::move(next);
        archive.update(detail::first_front(pop));
        report(gen);
    }
    return archive;
}

} // namespace vitalsel
