#include "alloyopt/cross_validation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"
#include "alloyopt/metrics.hpp"
#include "alloyopt/parallel.hpp"
#include "alloyopt/random.hpp"

namespace alloyopt {
namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

double score_fold(const Eigen::MatrixXd& X, const CvTargets& targets, const ModelSpec& model, Metric metric,
                  const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, std::uint64_t seed) {
    const Eigen::MatrixXd Xtr = take_rows(X, train), Xte = take_rows(X, test);
    if (const auto* y = std::get_if<Eigen::VectorXd>(&targets)) {
        if (metric != Metric::mae) throw InvalidArgument("kfold_cv: regression targets need the mae metric");
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(train.size())), yte(static_cast<Eigen::Index>(test.size()));
        for (std::size_t i = 0; i < train.size(); ++i) ytr(static_cast<Eigen::Index>(i)) = (*y)(static_cast<Eigen::Index>(train[i]));
        for (std::size_t i = 0; i < test.size(); ++i) yte(static_cast<Eigen::Index>(i)) = (*y)(static_cast<Eigen::Index>(test[i]));
        Eigen::VectorXd pred;
        if (model.kind == ModelKind::random_forest) {
            pred = RandomForest::fit_regression(Xtr, ytr, model.forest, seed).predict(Xte);
        } else {
            auto search = model.gpr_search;
            search.seed = seed;
            const auto gp = model.gpr_auto ? GprModel::fit_auto(Xtr, ytr, search, model.kernel)
                                           : GprModel::fit(Xtr, ytr, model.kernel);
            pred = gp.predict(Xte).mean;
        }
        return mae(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                   std::span<const double>(yte.data(), static_cast<std::size_t>(yte.size())));
    }
    const auto& labels = std::get<std::vector<std::string>>(targets);
    if (metric != Metric::f1_weighted) throw InvalidArgument("kfold_cv: class targets need the f1_weighted metric");
    if (model.kind != ModelKind::random_forest) throw InvalidArgument("kfold_cv: classification requires the random forest");
    std::vector<std::string> ltr, lte;
    for (auto i : train) ltr.push_back(labels[i]);
    for (auto i : test) lte.push_back(labels[i]);
    const auto pred = RandomForest::fit_classification(Xtr, ltr, model.forest, seed).predict_labels(Xte);
    return f1_weighted(pred, lte);
}

}  // namespace

std::vector<std::vector<std::size_t>> make_folds(std::size_t n_rows, std::size_t folds, std::uint64_t seed,
                                                 const std::vector<std::string>* strata) {
    if (folds < 2) throw InvalidArgument("kfold_cv: at least two folds required");
    if (n_rows < folds)
        throw InvalidArgument("kfold_cv: " + std::to_string(n_rows) + " rows cannot fill " + std::to_string(folds) +
                              " folds");
    std::vector<std::size_t> perm(n_rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n_rows; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);

    std::vector<std::vector<std::size_t>> out(folds);
    if (strata) {
        // Deal each class round-robin over the folds, continuing where the last class stopped.
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return (*strata)[a] < (*strata)[b]; });
        for (std::size_t i = 0; i < n_rows; ++i) out[i % folds].push_back(perm[i]);
        for (auto& f : out) std::sort(f.begin(), f.end());
        return out;
    }
    const std::size_t base = n_rows / folds, extra = n_rows % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return out;
}

CvResult kfold_cv(const Eigen::MatrixXd& X, const CvTargets& targets, const ModelSpec& model,
                  const CvOptions& options) {
    const auto n = static_cast<std::size_t>(X.rows());
    const std::size_t n_targets = std::visit([](const auto& t) { return static_cast<std::size_t>(t.size()); }, targets);
    if (n_targets != n) throw InvalidArgument("kfold_cv: features and targets have different lengths");
    if (options.repeats < 1) throw InvalidArgument("kfold_cv: at least one repeat required");
    if (options.folds < 2) throw InvalidArgument("kfold_cv: at least two folds required");
    if (n < options.folds) throw InvalidArgument("kfold_cv: fewer rows than folds");

    const auto* labels = std::get_if<std::vector<std::string>>(&targets);
    const std::vector<std::string>* strata = options.stratify && labels ? labels : nullptr;

    struct FoldJob {
        std::size_t repeat, fold;
        const std::vector<std::vector<std::size_t>>* folds;
    };
    std::vector<std::vector<std::vector<std::size_t>>> partitions(options.repeats);
    std::vector<FoldJob> tasks;
    for (std::size_t r = 0; r < options.repeats; ++r) {
        partitions[r] = make_folds(n, options.folds, options.seed + r, strata);
        for (std::size_t f = 0; f < options.folds; ++f) tasks.push_back({r, f, &partitions[r]});
    }

    CvResult result{options.folds, options.repeats, options.seed, std::vector<double>(tasks.size()), 0.0, 0.0};
    parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
        const auto& task = tasks[t];
        const auto& test = (*task.folds)[task.fold];
        std::vector<std::size_t> train;
        train.reserve(n - test.size());
        for (std::size_t f = 0; f < task.folds->size(); ++f)
            if (f != task.fold) train.insert(train.end(), (*task.folds)[f].begin(), (*task.folds)[f].end());
        std::sort(train.begin(), train.end());
        const auto seed = derive_seed(options.seed, {task.repeat, task.fold});
        result.scores[t] = score_fold(X, targets, model, options.metric, train, test, seed);
    });
    result.mean = mean_of(result.scores);
    result.std = stddev_of(result.scores);
    return result;
}

nlohmann::json to_json(const CvResult& r) {
    return {{"folds", r.folds}, {"repeats", r.repeats}, {"seed", r.seed},
            {"scores", r.scores}, {"mean", r.mean},       {"std", r.std}};
}

}  // namespace alloyopt
