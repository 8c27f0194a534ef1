#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "alloyopt/cross_validation.hpp"
#include "alloyopt/element_data.hpp"
#include "alloyopt/featurize.hpp"
#include "alloyopt/random_forest.hpp"

namespace alloyopt {

struct GaConfig {
    std::size_t population_size = 192;
    double crossover_rate = 0.8;
    double mutation_rate = 0.1;
    std::size_t max_generations = 100;
    std::size_t subset_size = 4;
    std::size_t fitness_rounds = 4;
    std::size_t cv_folds = 10;
    std::size_t tournament_size = 3;
    std::size_t elitism_count = 2;
    std::size_t stagnation_limit = 20;
    ForestConfig forest;
    int jobs = 1;
};

void validate(const GaConfig& config, std::size_t pool_size);

struct GaGeneration {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
};

struct GaReport {
    FeatureSubset best;
    double best_fitness = 0.0;
    std::vector<GaGeneration> curve;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const GaReport& report);

/// Name that selects the class column as the fitness target.
inline constexpr const char* kClassTarget = "class";

/// Q(S) for every subset of one (dataset, table, target): the negated mean MAE of a
/// random forest over `fitness_rounds` repeats of `cv_folds`-fold CV on the mole-averaged
/// features restricted to S. With the class target it is the mean weighted F1 instead.
///
/// Each subset is scored with seed derive_seed(seed, S), so values do not depend on
/// evaluation order. Thread-safe; results are memoized.
class SubsetFitness {
public:
    SubsetFitness(const Dataset& ds, const EmbeddingTable& table, const std::string& target, const GaConfig& config,
                  std::uint64_t seed);

    double operator()(const FeatureSubset& subset);
    std::optional<double> cached(const FeatureSubset& subset) const;
    std::size_t evaluations() const;
    std::size_t pool_size() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    double evaluate(const FeatureSubset& subset) const;

    Eigen::MatrixXd features_;  // all descriptor columns
    CvTargets targets_;
    bool classification_;
    GaConfig config_;
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    std::map<std::vector<std::size_t>, double> memo_;
    std::size_t evaluations_ = 0;
};

double fitness(const FeatureSubset& subset, const Dataset& ds, const EmbeddingTable& table, const std::string& target,
               const GaConfig& config, std::uint64_t seed);

/// Fixed-cardinality genetic search for argmax_S Q(S). Chromosomes are sorted index
/// lists of size k; crossover draws from the parents' union and repairs to size k.
GaReport ga_select(const Dataset& ds, const EmbeddingTable& table, const std::string& target, const GaConfig& config,
                   std::uint64_t seed);

/// Same search against a caller-owned fitness cache (shares memoized values).
GaReport ga_select(SubsetFitness& fitness, const GaConfig& config, std::uint64_t seed);

}  // namespace alloyopt
