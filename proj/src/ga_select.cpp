#include "alloyopt/ga_select.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"
#include "alloyopt/parallel.hpp"
#include "alloyopt/random.hpp"

namespace alloyopt {
namespace {

using Chromosome = std::vector<std::size_t>;

struct Scored {
    Chromosome genes;
    double fitness;
};

// Higher fitness first; lexicographically smaller chromosome breaks ties.
bool fitter(const Scored& a, const Scored& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.genes < b.genes;
}

Chromosome random_chromosome(std::size_t pool, std::size_t k, Rng& rng) {
    std::vector<std::size_t> all(pool);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + uniform_index(rng, pool - i)]);
    Chromosome c(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(c.begin(), c.end());
    return c;
}

/// Each index in the parents' union is kept with probability 1/2 (always, if both
/// parents carry it); the result is then trimmed or topped up to exactly k.
Chromosome crossover(const Chromosome& a, const Chromosome& b, std::size_t k, Rng& rng) {
    Chromosome both, either;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(either));
    Chromosome child = both, left_out;
    for (auto g : either) (uniform01(rng) < 0.5 ? child : left_out).push_back(g);
    while (child.size() > k) child.erase(child.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, child.size())));
    while (child.size() < k) {
        const auto pick = uniform_index(rng, left_out.size());
        child.push_back(left_out[pick]);
        left_out.erase(left_out.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(child.begin(), child.end());
    return child;
}

void mutate(Chromosome& c, std::size_t pool, double rate, Rng& rng) {
    if (c.size() == pool) return;
    for (auto& gene : c) {
        if (uniform01(rng) >= rate) continue;
        std::size_t candidate;
        do {
            candidate = uniform_index(rng, pool);
        } while (std::find(c.begin(), c.end(), candidate) != c.end());
        gene = candidate;
    }
    std::sort(c.begin(), c.end());
}

}  // namespace

void validate(const GaConfig& c, std::size_t pool_size) {
    if (c.population_size < 2) throw InvalidArgument("GA: population_size must be at least 2");
    if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0)) throw InvalidArgument("GA: crossover_rate must be in [0, 1]");
    if (!(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) throw InvalidArgument("GA: mutation_rate must be in [0, 1]");
    if (c.subset_size < 1) throw InvalidArgument("GA: subset size k must be at least 1");
    if (c.subset_size > pool_size)
        throw InvalidArgument("GA: subset size k=" + std::to_string(c.subset_size) + " exceeds the pool of " +
                              std::to_string(pool_size) + " descriptors");
    if (c.tournament_size < 1) throw InvalidArgument("GA: tournament_size must be at least 1");
    if (c.elitism_count > c.population_size) throw InvalidArgument("GA: elitism_count exceeds population_size");
    if (c.fitness_rounds < 1) throw InvalidArgument("GA: fitness_rounds must be at least 1");
    if (c.cv_folds < 2) throw InvalidArgument("GA: cv_folds must be at least 2");
}

nlohmann::json to_json(const GaReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& g : r.curve) curve.push_back({{"gen", g.generation}, {"best", g.best}, {"mean", g.mean}});
    return {{"best", {{"columns", r.best.columns()}, {"fitness", r.best_fitness}}},
            {"curve", curve},
            {"evaluations", r.evaluations},
            {"seed", r.seed},
            {"source_label", r.best.source_label()}};
}

// ---------------------------------------------------------------------------------------

SubsetFitness::SubsetFitness(const Dataset& ds, const EmbeddingTable& table, const std::string& target,
                             const GaConfig& config, std::uint64_t seed)
    : features_(featurize_dataset(ds, table).values),
      classification_(target == kClassTarget && !ds.property_index(target)),
      config_(config),
      seed_(seed) {
    if (classification_)
        targets_ = class_targets(ds);
    else
        targets_ = property_targets(ds, target);
}

std::optional<double> SubsetFitness::cached(const FeatureSubset& subset) const {
    std::lock_guard lock(mutex_);
    const auto it = memo_.find(subset.columns());
    if (it == memo_.end()) return std::nullopt;
    return it->second;
}

std::size_t SubsetFitness::evaluations() const {
    std::lock_guard lock(mutex_);
    return evaluations_;
}

double SubsetFitness::operator()(const FeatureSubset& subset) {
    if (auto hit = cached(subset)) return *hit;
    const double value = evaluate(subset);
    std::lock_guard lock(mutex_);
    if (memo_.emplace(subset.columns(), value).second) ++evaluations_;
    return value;
}

double SubsetFitness::evaluate(const FeatureSubset& subset) const {
    const auto& cols = subset.columns();
    if (cols.empty() || cols.back() >= pool_size()) throw InvalidArgument("fitness: subset does not fit the table");
    Eigen::MatrixXd X(features_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = features_.col(static_cast<Eigen::Index>(cols[j]));

    ModelSpec model;
    model.forest = config_.forest;
    model.forest.jobs = 1;
    CvOptions cv;
    cv.folds = config_.cv_folds;
    cv.repeats = config_.fitness_rounds;
    cv.metric = classification_ ? Metric::f1_weighted : Metric::mae;
    cv.seed = derive_seed(seed_, std::span<const std::size_t>(cols));
    const auto result = kfold_cv(X, targets_, model, cv);
    return classification_ ? result.mean : -result.mean;
}

double fitness(const FeatureSubset& subset, const Dataset& ds, const EmbeddingTable& table, const std::string& target,
               const GaConfig& config, std::uint64_t seed) {
    SubsetFitness f(ds, table, target, config, seed);
    return f(subset);
}

// ---------------------------------------------------------------------------------------

GaReport ga_select(const Dataset& ds, const EmbeddingTable& table, const std::string& target, const GaConfig& config,
                   std::uint64_t seed) {
    validate(config, table.dim());
    SubsetFitness f(ds, table, target, config, seed);
    auto report = ga_select(f, config, seed);
    report.best = FeatureSubset(report.best.columns(), table.dim(), table.source_label());
    return report;
}

GaReport ga_select(SubsetFitness& fitness, const GaConfig& config, std::uint64_t seed) {
    const std::size_t pool = fitness.pool_size();
    const std::size_t k = config.subset_size;
    validate(config, pool);
    Rng rng(derive_seed(seed, {0x6A5E1ECULL}));
    const std::size_t evaluations_before = fitness.evaluations();

    auto score_all = [&](const std::vector<Chromosome>& population) {
        std::vector<Chromosome> pending;
        for (const auto& c : population)
            if (!fitness.cached(FeatureSubset(c, pool))) pending.push_back(c);
        std::sort(pending.begin(), pending.end());
        pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
        parallel_for(pending.size(), config.jobs, [&](std::size_t i) { fitness(FeatureSubset(pending[i], pool)); });
        std::vector<Scored> scored;
        scored.reserve(population.size());
        for (const auto& c : population) scored.push_back({c, *fitness.cached(FeatureSubset(c, pool))});
        std::sort(scored.begin(), scored.end(), fitter);
        return scored;
    };
    auto record = [](std::size_t gen, const std::vector<Scored>& scored) {
        double sum = 0.0;
        for (const auto& s : scored) sum += s.fitness;
        return GaGeneration{gen, scored.front().fitness, sum / static_cast<double>(scored.size())};
    };

    GaReport report;
    report.seed = seed;

    std::vector<Chromosome> population;
    if (k == pool) {
        Chromosome all(pool);
        std::iota(all.begin(), all.end(), std::size_t{0});
        population.assign(1, all);
    } else {
        for (std::size_t i = 0; i < config.population_size; ++i) population.push_back(random_chromosome(pool, k, rng));
    }
    auto scored = score_all(population);
    report.curve.push_back(record(0, scored));
    Scored best = scored.front();

    std::size_t stagnant = 0;
    for (std::size_t gen = 1; k < pool && gen <= config.max_generations; ++gen) {
        auto tournament = [&]() -> const Scored& {
            const Scored* winner = &scored[uniform_index(rng, scored.size())];
            for (std::size_t t = 1; t < config.tournament_size; ++t) {
                const Scored* c = &scored[uniform_index(rng, scored.size())];
                if (fitter(*c, *winner)) winner = c;
            }
            return *winner;
        };

        std::vector<Chromosome> next;
        next.reserve(config.population_size);
        for (std::size_t e = 0; e < std::min(config.elitism_count, scored.size()); ++e) next.push_back(scored[e].genes);
        while (next.size() < config.population_size) {
            const Scored& a = tournament();
            const Scored& b = tournament();
            Chromosome child = uniform01(rng) < config.crossover_rate ? crossover(a.genes, b.genes, k, rng) : a.genes;
            mutate(child, pool, config.mutation_rate, rng);
            next.push_back(std::move(child));
        }
        population = std::move(next);
        scored = score_all(population);

        const bool improved = scored.front().fitness > best.fitness;
        if (improved) best = scored.front();
        auto entry = record(gen, scored);
        entry.best = best.fitness;
        report.curve.push_back(entry);
        stagnant = improved ? 0 : stagnant + 1;
        if (stagnant >= config.stagnation_limit) break;
    }

    report.best = FeatureSubset(best.genes, pool);
    report.best_fitness = best.fitness;
    report.evaluations = fitness.evaluations() - evaluations_before;
    return report;
}

}  // namespace alloyopt
