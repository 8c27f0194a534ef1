#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alloyopt/composition.hpp"
#include "alloyopt/environment.hpp"
#include "alloyopt/featurize.hpp"
#include "alloyopt/fom.hpp"
#include "alloyopt/ga_select.hpp"
#include "alloyopt/gpr.hpp"

namespace alloyopt {

/// Below this standard deviation EI is the deterministic improvement max(mu - f*, 0).
inline constexpr double kEiSigmaFloor = 1e-12;

double normal_pdf(double z);
double normal_cdf(double z);

/// (mu - f*) Phi(z) + sigma phi(z), z = (mu - f*) / sigma. Never negative.
double expected_improvement(double mu, double sigma, double f_best);

/// log(1e-3)
inline constexpr double kBoMaxLogNoise = -6.907755278982137;

struct BoConfig {
    std::size_t n_initial = 40;
    std::size_t n_iterations = 60;
    std::size_t n_trajectories = 16;
    std::size_t candidate_pool = 4096;
    std::size_t refine_top = 8;
    std::size_t refine_steps = 100;
    /// Refit GPR hyperparameters every iteration; otherwise only after the initial design.
    bool refit_every_iteration = true;
    /// The simulators are deterministic, so the noise variance (standardized units) is capped at 1e-3.
    HyperparameterSearch gpr_search{.starts = 5, .max_evaluations = 200, .max_log_noise = kBoMaxLogNoise};
    /// Keep the GA fitness protocol exactly as configured even for small initial designs.
    /// When false and n_initial < 50, fitness uses 2 rounds of 5-fold CV.
    bool full_ga_protocol = false;
    /// Skip the GA phase and use this subset for every iteration.
    std::optional<FeatureSubset> fixed_subset;
    int jobs = 1;
};

void validate(const BoConfig& config);

struct AcquisitionResult {
    std::vector<double> fractions;
    double ei = 0.0;
};

/// argmax EI over the space: a seeded pool of candidates, then projected gradient
/// ascent from the best few. Proposals within 1e-6 (L1) of an already evaluated point
/// are skipped in favor of the next-best distinct candidate.
AcquisitionResult maximize_acquisition(const GprModel& model, const CompositionSpace& space,
                                       const CompositionFeaturizer& featurizer, double f_best, const BoConfig& config,
                                       std::uint64_t seed, std::span<const std::vector<double>> already_evaluated);

Composition maximize_acquisition(const GprModel& model, const CompositionSpace& space, const EmbeddingTable& table,
                                 const FeatureSubset& subset, double f_best, const BoConfig& config,
                                 std::uint64_t seed, std::span<const Composition> already_evaluated);

/// EI at each row of `fractions` (rows are compositions over the featurizer's elements).
Eigen::VectorXd acquisition_values(const GprModel& model, const CompositionFeaturizer& featurizer,
                                   const Eigen::MatrixXd& fractions, double f_best);

enum class Phase { initial, bo };

struct BoRecord {
    std::size_t iteration = 0;
    Phase phase = Phase::initial;
    std::vector<double> fractions;
    PropertyMap properties;
    double fom = 0.0;
    double best_so_far = 0.0;
};

struct BoTrajectory {
    std::vector<std::string> elements;
    std::vector<BoRecord> records;
    FeatureSubset subset;
    std::uint64_t seed = 0;

    std::vector<double> best_curve() const;
    double final_best() const { return records.empty() ? 0.0 : records.back().best_so_far; }
};

/// Initial random design, GA subset selection on its FOM values, then EI-driven
/// iterations with a GPR refit on every step.
BoTrajectory run_bo(const SyntheticEnvironment& env, const EmbeddingTable& table, const FomConfig& fom_config,
                    const BoConfig& bo_config, const GaConfig& ga_config, std::uint64_t seed);

struct BoSummary {
    std::vector<BoTrajectory> trajectories;
    std::vector<double> mean_best;  // per iteration
    std::vector<double> std_best;   // population std per iteration
    std::vector<double> final_fom;
    std::vector<std::uint64_t> seeds;
};

/// Trajectory i uses seed base_seed + i. Trajectories run on `bo_config.jobs` threads.
BoSummary run_parallel_bo(const SyntheticEnvironment& env, const EmbeddingTable& table, const FomConfig& fom_config,
                          const BoConfig& bo_config, const GaConfig& ga_config, std::uint64_t base_seed);

/// Best-so-far FOM curve of pure random sampling with `evaluations` draws.
std::vector<double> random_search_curve(const SyntheticEnvironment& env, const FomConfig& fom_config,
                                        std::size_t evaluations, std::uint64_t seed);

std::string trajectories_csv(const BoSummary& summary);
std::string summary_csv(const BoSummary& summary);
nlohmann::json summary_json(const BoSummary& summary, const std::string& label);

}  // namespace alloyopt
