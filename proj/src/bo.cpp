#include "alloyopt/bo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"
#include "alloyopt/metrics.hpp"
#include "alloyopt/parallel.hpp"
#include "alloyopt/text_io.hpp"

namespace alloyopt {
namespace {

constexpr double kDuplicateL1 = 1e-6;
constexpr double kGradientStep = 1e-6;
constexpr double kInitialAscentStep = 0.05;
constexpr double kMinAscentStep = 1e-9;

/// phi(z) + z Phi(z), so that EI = sigma * h(z). Below z = -6 the direct form cancels
/// badly; there it is phi(z) * R * T with the Mills ratio R = Phi(z)/phi(z) and
/// T = 1/R - |z|, both from the same continued fraction.
double improvement_factor(double z) {
    if (z >= -6.0) return normal_pdf(z) + z * normal_cdf(z);
    const double x = -z;
    // 1/R(x) = x + 1/(x + 2/(x + 3/(x + ...)))
    double tail = x;
    for (int k = 60; k >= 2; --k) tail = x + k / tail;
    const double t = 1.0 / tail;  // 1/R - x
    const double inv_r = x + t;
    return normal_pdf(z) * t / inv_r;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t width) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

struct Candidate {
    std::vector<double> x;
    double ei;
};

/// Projected gradient ascent on EI with central-difference gradients and step halving.
Candidate refine(const GprModel& model, const CompositionSpace& space, const CompositionFeaturizer& featurizer,
                 double f_best, Candidate start, std::size_t steps) {
    const std::size_t n = start.x.size();
    Candidate cur = std::move(start);
    double step = kInitialAscentStep;
    Eigen::MatrixXd probes(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < steps && step >= kMinAscentStep; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < n; ++c) {
                probes(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(c)) = cur.x[c];
                probes(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(c)) = cur.x[c];
            }
            probes(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(i)) += kGradientStep;
            probes(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(i)) -= kGradientStep;
        }
        const auto pred = model.predict(featurizer.transform(probes));
        std::vector<double> grad(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = static_cast<Eigen::Index>(2 * i), b = static_cast<Eigen::Index>(2 * i + 1);
            grad[i] = (expected_improvement(pred.mean(a), pred.stddev(a), f_best) -
                       expected_improvement(pred.mean(b), pred.stddev(b), f_best)) /
                      (2.0 * kGradientStep);
        }
        const double mean_grad = std::accumulate(grad.begin(), grad.end(), 0.0) / static_cast<double>(n);
        double norm = 0.0;
        for (double& g : grad) {
            g -= mean_grad;
            norm += g * g;
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) break;

        bool moved = false;
        while (step >= kMinAscentStep) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = cur.x[i] + step * grad[i] / norm;
            trial = space.project(trial);
            Eigen::MatrixXd row = rows_to_matrix({trial}, n);
            const double ei = acquisition_values(model, featurizer, row, f_best)(0);
            if (ei > cur.ei) {
                cur = {std::move(trial), ei};
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return cur;
}

BoRecord make_record(const SyntheticEnvironment& env, const FomConfig& fom_config, std::vector<double> fractions,
                     std::size_t iteration, Phase phase, double previous_best) {
    BoRecord rec;
    rec.iteration = iteration;
    rec.phase = phase;
    const auto values = ground_truth_values(env, fractions);
    for (std::size_t i = 0; i < values.size(); ++i) rec.properties.emplace(env.properties[i].name, values[i]);
    rec.fractions = std::move(fractions);
    rec.fom = fom(fom_config, rec.properties);
    rec.best_so_far = iteration == 0 ? rec.fom : std::max(previous_best, rec.fom);
    return rec;
}

}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mu, double sigma, double f_best) {
    const double diff = mu - f_best;
    const double floor = std::max(diff, 0.0);
    if (!(sigma > kEiSigmaFloor)) return floor;
    return std::max(sigma * improvement_factor(diff / sigma), floor);
}

void validate(const BoConfig& c) {
    if (c.n_initial < 2) throw InvalidArgument("BO: n_initial must be at least 2");
    if (c.n_trajectories < 1) throw InvalidArgument("BO: n_trajectories must be at least 1");
    if (c.candidate_pool < 1) throw InvalidArgument("BO: candidate_pool must be at least 1");
    if (!(c.gpr_search.max_log_noise >= c.gpr_search.min_log_noise))
        throw InvalidArgument("BO: noise-variance ceiling is below the search floor");
}

Eigen::VectorXd acquisition_values(const GprModel& model, const CompositionFeaturizer& featurizer,
                                   const Eigen::MatrixXd& fractions, double f_best) {
    const auto pred = model.predict(featurizer.transform(fractions));
    Eigen::VectorXd ei(pred.mean.size());
    for (Eigen::Index i = 0; i < ei.size(); ++i) ei(i) = expected_improvement(pred.mean(i), pred.stddev(i), f_best);
    return ei;
}

AcquisitionResult maximize_acquisition(const GprModel& model, const CompositionSpace& space,
                                       const CompositionFeaturizer& featurizer, double f_best, const BoConfig& config,
                                       std::uint64_t seed, std::span<const std::vector<double>> already_evaluated) {
    if (featurizer.n_elements() != space.size())
        throw InvalidArgument("maximize_acquisition: featurizer and space use different element lists");
    const std::size_t n = space.size();
    Rng rng(seed);
    std::vector<std::vector<double>> pool(config.candidate_pool);
    for (auto& x : pool) x = space.sample(rng);
    const Eigen::VectorXd pool_ei = acquisition_values(model, featurizer, rows_to_matrix(pool, n), f_best);

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool_ei(static_cast<Eigen::Index>(a)) > pool_ei(static_cast<Eigen::Index>(b));
    });

    std::vector<Candidate> ranked;
    for (std::size_t r = 0; r < std::min(config.refine_top, order.size()); ++r) {
        const auto i = order[r];
        ranked.push_back(refine(model, space, featurizer, f_best, {pool[i], pool_ei(static_cast<Eigen::Index>(i))},
                                config.refine_steps));
    }
    for (auto i : order) ranked.push_back({pool[i], pool_ei(static_cast<Eigen::Index>(i))});
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) { return a.ei > b.ei; });

    for (auto& c : ranked) {
        const bool fresh = std::all_of(already_evaluated.begin(), already_evaluated.end(), [&](const auto& seen) {
            return l1_distance(c.x, seen) >= kDuplicateL1;
        });
        if (fresh) return {std::move(c.x), c.ei};
    }
    // Every candidate collides with history; fall back to a fresh draw.
    for (;;) {
        auto x = space.sample(rng);
        const bool fresh = std::all_of(already_evaluated.begin(), already_evaluated.end(),
                                       [&](const auto& seen) { return l1_distance(x, seen) >= kDuplicateL1; });
        if (fresh) {
            const double ei = acquisition_values(model, featurizer, rows_to_matrix({x}, n), f_best)(0);
            return {std::move(x), ei};
        }
    }
}

Composition maximize_acquisition(const GprModel& model, const CompositionSpace& space, const EmbeddingTable& table,
                                 const FeatureSubset& subset, double f_best, const BoConfig& config,
                                 std::uint64_t seed, std::span<const Composition> already_evaluated) {
    CompositionFeaturizer featurizer(space.elements(), table, subset);
    std::vector<std::vector<double>> seen;
    for (const auto& c : already_evaluated) seen.push_back(c.fractions());
    auto result = maximize_acquisition(model, space, featurizer, f_best, config, seed, seen);
    return Composition(space.elements(), std::move(result.fractions));
}

std::vector<double> BoTrajectory::best_curve() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.best_so_far);
    return out;
}

BoTrajectory run_bo(const SyntheticEnvironment& env, const EmbeddingTable& table, const FomConfig& fom_config,
                    const BoConfig& bo_config, const GaConfig& ga_config, std::uint64_t seed) {
    validate(bo_config);
    validate(fom_config);
    if (fom_config.kind != env.kind) throw InvalidArgument("run_bo: FOM config is for a different alloy family");

    BoTrajectory traj;
    traj.elements = env.space.elements();
    traj.seed = seed;

    Rng init_rng(derive_seed(seed, {1}));
    for (std::size_t i = 0; i < bo_config.n_initial; ++i) {
        const double prev = traj.records.empty() ? 0.0 : traj.records.back().best_so_far;
        traj.records.push_back(make_record(env, fom_config, env.space.sample(init_rng), i, Phase::initial, prev));
    }

    if (bo_config.fixed_subset) {
        traj.subset = *bo_config.fixed_subset;
    } else {
        std::vector<DatasetRow> rows;
        for (const auto& r : traj.records) rows.push_back({r.fractions, {r.fom}, std::nullopt});
        const Dataset initial(traj.elements, {"fom"}, std::move(rows));
        GaConfig ga = ga_config;
        if (!bo_config.full_ga_protocol && bo_config.n_initial < 50) {
            ga.fitness_rounds = std::min<std::size_t>(ga.fitness_rounds, 2);
            ga.cv_folds = std::min<std::size_t>(ga.cv_folds, 5);
        }
        ga.cv_folds = std::min(ga.cv_folds, bo_config.n_initial);
        traj.subset = ga_select(initial, table, "fom", ga, derive_seed(seed, {2})).best;
    }
    const CompositionFeaturizer featurizer(traj.elements, table, traj.subset);

    std::vector<std::vector<double>> evaluated;
    for (const auto& r : traj.records) evaluated.push_back(r.fractions);
    Eigen::MatrixXd X = featurizer.transform(rows_to_matrix(evaluated, traj.elements.size()));
    Eigen::VectorXd y(X.rows());
    for (std::size_t i = 0; i < traj.records.size(); ++i) y(static_cast<Eigen::Index>(i)) = traj.records[i].fom;

    const KernelConfig initial_kernel{1.0, 1.0, 1e-3};
    KernelConfig kernel = initial_kernel;
    for (std::size_t it = 0; it < bo_config.n_iterations; ++it) {
        GprModel model = [&] {
            if (bo_config.refit_every_iteration || it == 0) {
                auto search = bo_config.gpr_search;
                search.seed = derive_seed(seed, {3, it});
                return GprModel::fit_auto(X, y, search, initial_kernel);
            }
            return GprModel::fit(X, y, kernel);
        }();
        kernel = model.kernel();

        const double f_best = traj.records.back().best_so_far;
        auto proposal =
            maximize_acquisition(model, env.space, featurizer, f_best, bo_config, derive_seed(seed, {4, it}), evaluated);
        auto rec = make_record(env, fom_config, std::move(proposal.fractions), bo_config.n_initial + it, Phase::bo, f_best);

        evaluated.push_back(rec.fractions);
        X.conservativeResize(X.rows() + 1, Eigen::NoChange);
        X.row(X.rows() - 1) = featurizer(rec.fractions).transpose();
        y.conservativeResize(y.size() + 1);
        y(y.size() - 1) = rec.fom;
        traj.records.push_back(std::move(rec));
    }
    return traj;
}

BoSummary run_parallel_bo(const SyntheticEnvironment& env, const EmbeddingTable& table, const FomConfig& fom_config,
                          const BoConfig& bo_config, const GaConfig& ga_config, std::uint64_t base_seed) {
    validate(bo_config);
    BoSummary summary;
    summary.trajectories.resize(bo_config.n_trajectories);
    BoConfig inner = bo_config;
    GaConfig ga_inner = ga_config;
    if (bo_config.jobs > 1) {
        inner.jobs = 1;
        ga_inner.jobs = 1;
    }
    parallel_for(summary.trajectories.size(), bo_config.jobs, [&](std::size_t i) {
        summary.trajectories[i] = run_bo(env, table, fom_config, inner, ga_inner, base_seed + i);
    });

    const std::size_t length = summary.trajectories.front().records.size();
    std::vector<double> column(summary.trajectories.size());
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t i = 0; i < summary.trajectories.size(); ++i)
            column[i] = summary.trajectories[i].records[t].best_so_far;
        summary.mean_best.push_back(mean_of(column));
        summary.std_best.push_back(stddev_of(column));
    }
    for (const auto& tr : summary.trajectories) {
        summary.final_fom.push_back(tr.final_best());
        summary.seeds.push_back(tr.seed);
    }
    return summary;
}

std::vector<double> random_search_curve(const SyntheticEnvironment& env, const FomConfig& fom_config,
                                        std::size_t evaluations, std::uint64_t seed) {
    std::vector<double> curve;
    curve.reserve(evaluations);
    for (const auto& c : sample_random_compositions(env.space, evaluations, seed)) {
        PropertyMap props = ground_truth(env, c);
        const double f = fom(fom_config, props);
        curve.push_back(curve.empty() ? f : std::max(curve.back(), f));
    }
    return curve;
}

std::string trajectories_csv(const BoSummary& summary) {
    std::string out = "trajectory,iteration,phase,fom,best_so_far";
    if (!summary.trajectories.empty())
        for (const auto& e : summary.trajectories.front().elements) out += "," + e;
    out += '\n';
    for (std::size_t t = 0; t < summary.trajectories.size(); ++t) {
        for (const auto& r : summary.trajectories[t].records) {
            out += std::to_string(t) + ',' + std::to_string(r.iteration) + ',' +
                   (r.phase == Phase::initial ? "init" : "bo") + ',' + io::format_double(r.fom) + ',' +
                   io::format_double(r.best_so_far);
            for (double f : r.fractions) out += ',' + io::format_double(f);
            out += '\n';
        }
    }
    return out;
}

std::string summary_csv(const BoSummary& summary) {
    std::string out = "iteration,mean_best,std_best\n";
    for (std::size_t t = 0; t < summary.mean_best.size(); ++t)
        out += std::to_string(t) + ',' + io::format_double(summary.mean_best[t]) + ',' +
               io::format_double(summary.std_best[t]) + '\n';
    return out;
}

nlohmann::json summary_json(const BoSummary& summary, const std::string& label) {
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& t : summary.trajectories) subsets.push_back(t.subset.columns());
    return {{"label", label},
            {"n", summary.final_fom.size()},
            {"final_fom", summary.final_fom},
            {"seeds", summary.seeds},
            {"mean", mean_of(summary.final_fom)},
            {"std", stddev_of(summary.final_fom)},
            {"subsets", subsets}};
}

}  // namespace alloyopt
