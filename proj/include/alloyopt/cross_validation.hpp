#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "alloyopt/gpr.hpp"
#include "alloyopt/random_forest.hpp"

namespace alloyopt {

enum class ModelKind { random_forest, gpr };
enum class Metric { mae, f1_weighted };

struct ModelSpec {
    ModelKind kind = ModelKind::random_forest;
    ForestConfig forest;
    KernelConfig kernel;
    bool gpr_auto = false;
    HyperparameterSearch gpr_search;
};

using CvTargets = std::variant<Eigen::VectorXd, std::vector<std::string>>;

struct CvOptions {
    std::size_t folds = 10;
    std::size_t repeats = 1;
    Metric metric = Metric::mae;
    std::uint64_t seed = 0;
    bool stratify = false;
    int jobs = 1;
};

struct CvResult {
    std::size_t folds = 0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    std::vector<double> scores;  // repeat-major, fold order within a repeat
    double mean = 0.0;
    double std = 0.0;  // population
};

/// Test-fold row indices for one repeat. Fold sizes differ by at most one, larger folds first.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n_rows, std::size_t folds, std::uint64_t seed,
                                                 const std::vector<std::string>* strata = nullptr);

/// Repeat r shuffles with seed + r; every fold is fit on the other k-1 folds and scored
/// on itself.
CvResult kfold_cv(const Eigen::MatrixXd& X, const CvTargets& targets, const ModelSpec& model,
                  const CvOptions& options);

nlohmann::json to_json(const CvResult& result);

}  // namespace alloyopt
