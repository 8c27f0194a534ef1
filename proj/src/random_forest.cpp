#include "alloyopt/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "alloyopt/error.hpp"
#include "alloyopt/parallel.hpp"
#include "alloyopt/random.hpp"

namespace alloyopt {
namespace {

/// Mean computed around the first value, so identical inputs give that value exactly.
/// The result is clamped to the input range.
double shifted_mean(const std::vector<double>& values) {
    const double first = values[0];
    double lo = first, hi = first, acc = 0.0;
    for (double v : values) {
        acc += v - first;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(first + acc / static_cast<double>(values.size()), lo, hi);
}

/// Grows one tree over a bootstrap sample. Every feature keeps the sample positions
/// sorted by its value; a node owns the same contiguous range in each of those lists,
/// and splitting stably partitions the range so children stay sorted.
struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const std::vector<double>& y;  // regression target or class index
    Task task;
    std::size_t n_classes;
    const ForestConfig& config;
    std::size_t max_features;
    Rng rng;
    DecisionTree tree;
    std::vector<std::size_t> feature_order;
    std::vector<double> xs;                        // feature-major values by sample position
    std::vector<double> ys;
    std::vector<std::vector<std::uint32_t>> sorted;  // per feature: positions ordered by value
    std::vector<std::uint32_t> members;            // positions in sampling order
    std::vector<char> goes_left;
    std::vector<std::uint32_t> buffer;
    std::vector<double> class_left, class_right;

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity();
    };

    double x_at(std::uint32_t pos, std::size_t feature) const { return xs[feature * members.size() + pos]; }
    double y_at(std::uint32_t pos) const { return ys[pos]; }

    /// `row_order[f]` lists dataset rows sorted by feature f, shared by all trees.
    void prepare(const std::vector<std::size_t>& sample_rows, const std::vector<std::vector<std::uint32_t>>& row_order) {
        const std::size_t m = sample_rows.size(), p = static_cast<std::size_t>(X.cols());
        const auto n_rows = static_cast<std::size_t>(X.rows());
        members.resize(m);
        std::iota(members.begin(), members.end(), std::uint32_t{0});
        ys.resize(m);
        xs.resize(m * p);
        for (std::size_t pos = 0; pos < m; ++pos) {
            ys[pos] = y[sample_rows[pos]];
            for (std::size_t f = 0; f < p; ++f)
                xs[f * m + pos] = X(static_cast<Eigen::Index>(sample_rows[pos]), static_cast<Eigen::Index>(f));
        }
        // Positions grouped by dataset row, then emitted in each feature's row order.
        std::vector<std::uint32_t> first(n_rows + 1, 0), by_row(m);
        for (auto r : sample_rows) ++first[r + 1];
        for (std::size_t r = 0; r < n_rows; ++r) first[r + 1] += first[r];
        std::vector<std::uint32_t> fill(first.begin(), first.end() - 1);
        for (std::size_t pos = 0; pos < m; ++pos) by_row[fill[sample_rows[pos]]++] = static_cast<std::uint32_t>(pos);
        sorted.resize(p);
        for (std::size_t f = 0; f < p; ++f) {
            sorted[f].clear();
            for (auto r : row_order[f])
                for (auto k = first[r]; k < first[r + 1]; ++k) sorted[f].push_back(by_row[k]);
        }
        goes_left.resize(m);
        buffer.resize(m);
        feature_order.resize(p);
        std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
        class_left.resize(n_classes);
        class_right.resize(n_classes);
    }

    double leaf_value(std::size_t begin, std::size_t end) const {
        if (task == Task::regression) {
            const double first = y_at(members[begin]);
            double lo = first, hi = first, acc = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const double v = y_at(members[k]);
                acc += v - first;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return std::clamp(first + acc / static_cast<double>(end - begin), lo, hi);
        }
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t k = begin; k < end; ++k) ++counts[static_cast<std::size_t>(y_at(members[k]))];
        return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    bool is_pure(std::size_t begin, std::size_t end) const {
        const double first = y_at(members[begin]);
        for (std::size_t k = begin + 1; k < end; ++k)
            if (y_at(members[k]) != first) return false;
        return true;
    }

    static double midpoint(double a, double b) {
        const double mid = a + (b - a) / 2.0;
        return mid < b ? mid : a;
    }

    // Larger is better: sum of squared child sums over child sizes (regression),
    // or sum of squared class counts over child sizes (Gini).
    void best_split_on(std::size_t feature, std::size_t begin, std::size_t end, Split& best) {
        const auto& order = sorted[feature];
        const std::size_t n = end - begin;
        if (x_at(order[begin], feature) == x_at(order[end - 1], feature)) return;

        const std::size_t leaf = static_cast<std::size_t>(std::max(config.min_samples_leaf, 1));
        if (task == Task::regression) {
            double total = 0.0;
            for (std::size_t k = begin; k < end; ++k) total += y_at(order[k]);
            double left = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left += y_at(order[begin + i]);
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < leaf || nr < leaf) continue;
                const double xa = x_at(order[begin + i], feature), xb = x_at(order[begin + i + 1], feature);
                if (xa == xb) continue;
                const double right = total - left;
                const double score = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr);
                if (score > best.score) best = {static_cast<int>(feature), midpoint(xa, xb), score};
            }
        } else {
            std::fill(class_left.begin(), class_left.end(), 0.0);
            std::fill(class_right.begin(), class_right.end(), 0.0);
            for (std::size_t k = begin; k < end; ++k) class_right[static_cast<std::size_t>(y_at(order[k]))] += 1.0;
            double lsq = 0.0, rsq = 0.0;
            for (double c : class_right) rsq += c * c;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(y_at(order[begin + i]));
                lsq += 2.0 * class_left[c] + 1.0;
                rsq -= 2.0 * class_right[c] - 1.0;
                class_left[c] += 1.0;
                class_right[c] -= 1.0;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < leaf || nr < leaf) continue;
                const double xa = x_at(order[begin + i], feature), xb = x_at(order[begin + i + 1], feature);
                if (xa == xb) continue;
                const double score = lsq / static_cast<double>(nl) + rsq / static_cast<double>(nr);
                if (score > best.score) best = {static_cast<int>(feature), midpoint(xa, xb), score};
            }
        }
    }

    void stable_split(std::vector<std::uint32_t>& list, std::size_t begin, std::size_t end) {
        std::size_t l = begin, r = 0;
        for (std::size_t k = begin; k < end; ++k) {
            if (goes_left[list[k]])
                list[l++] = list[k];
            else
                buffer[r++] = list[k];
        }
        std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(r),
                  list.begin() + static_cast<std::ptrdiff_t>(l));
    }

    int build(std::size_t begin, std::size_t end, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        auto make_leaf = [&] {
            tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(begin, end);
            return id;
        };

        const std::size_t leaf = static_cast<std::size_t>(std::max(config.min_samples_leaf, 1));
        if (end - begin < 2 * leaf || (config.max_depth > 0 && depth >= config.max_depth) || is_pure(begin, end))
            return make_leaf();

        // Visit features in random order; keep going past max_features only while no
        // feature seen so far admits a split.
        for (std::size_t i = feature_order.size(); i > 1; --i)
            std::swap(feature_order[i - 1], feature_order[uniform_index(rng, i)]);
        Split best;
        for (std::size_t k = 0; k < feature_order.size(); ++k) {
            if (k >= max_features && best.feature >= 0) break;
            best_split_on(feature_order[k], begin, end, best);
        }
        if (best.feature < 0) return make_leaf();

        const auto f = static_cast<std::size_t>(best.feature);
        std::size_t n_left = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const bool left = x_at(members[k], f) <= best.threshold;
            goes_left[members[k]] = left;
            n_left += left;
        }
        stable_split(members, begin, end);
        for (auto& list : sorted) stable_split(list, begin, end);

        const int left = build(begin, begin + n_left, depth + 1);
        const int right = build(begin + n_left, end, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }
};

std::size_t resolve_max_features(const ForestConfig& config, Task task, std::size_t p) {
    if (config.max_features > 0) return std::min<std::size_t>(static_cast<std::size_t>(config.max_features), p);
    const double pd = static_cast<double>(p);
    const double m = task == Task::regression ? std::ceil(pd / 3.0) : std::ceil(std::sqrt(pd));
    return std::max<std::size_t>(1, static_cast<std::size_t>(m));
}

void check_config(const ForestConfig& config) {
    if (config.n_trees < 1) throw InvalidArgument("random forest: n_trees must be at least 1");
    if (config.max_depth < 0) throw InvalidArgument("random forest: max_depth must be non-negative");
    if (config.min_samples_leaf < 1) throw InvalidArgument("random forest: min_samples_leaf must be at least 1");
}

std::vector<DecisionTree> grow_forest(const Eigen::MatrixXd& X, const std::vector<double>& y, Task task,
                                      std::size_t n_classes, const ForestConfig& config, std::uint64_t seed) {
    check_config(config);
    if (X.rows() < 1) throw InvalidArgument("random forest: empty training set");
    if (X.cols() < 1) throw InvalidArgument("random forest: no feature columns");
    if (!X.allFinite()) throw InvalidArgument("random forest: non-finite feature value");
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = static_cast<std::size_t>(X.cols());
    const std::size_t max_features = resolve_max_features(config, task, p);

    std::vector<std::vector<std::uint32_t>> row_order(p, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < p; ++f) {
        std::iota(row_order[f].begin(), row_order[f].end(), std::uint32_t{0});
        std::stable_sort(row_order[f].begin(), row_order[f].end(), [&](std::uint32_t a, std::uint32_t b) {
            return X(a, static_cast<Eigen::Index>(f)) < X(b, static_cast<Eigen::Index>(f));
        });
    }

    std::vector<DecisionTree> trees(static_cast<std::size_t>(config.n_trees));
    parallel_for(trees.size(), config.jobs, [&](std::size_t t) {
        TreeBuilder b{X, y, task, n_classes, config, max_features, Rng(derive_seed(seed, {t})), {}, {}, {}, {}, {},
                      {}, {}, {}, {}, {}};
        std::vector<std::size_t> idx(n);
        if (config.bootstrap) {
            for (auto& i : idx) i = uniform_index(b.rng, n);
        } else {
            std::iota(idx.begin(), idx.end(), std::size_t{0});
        }
        b.prepare(idx, row_order);
        b.build(0, n, 0);
        trees[t] = std::move(b.tree);
    });
    return trees;
}

}  // namespace

double DecisionTree::predict(const double* x, Eigen::Index stride) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& nd = nodes[node];
        node = static_cast<std::size_t>(x[nd.feature * stride] <= nd.threshold ? nd.left : nd.right);
    }
    return nodes[node].value;
}

int DecisionTree::depth() const {
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        const auto [node, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        if (nd.feature >= 0) {
            stack.emplace_back(nd.left, d + 1);
            stack.emplace_back(nd.right, d + 1);
        }
    }
    return deepest;
}

RandomForest RandomForest::fit_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          const ForestConfig& config, std::uint64_t seed) {
    if (X.rows() != y.size()) throw InvalidArgument("random forest: X and y have different lengths");
    if (!y.allFinite()) throw InvalidArgument("random forest: non-finite target");
    RandomForest rf;
    rf.task_ = Task::regression;
    rf.n_features_ = X.cols();
    rf.trees_ = grow_forest(X, std::vector<double>(y.data(), y.data() + y.size()), Task::regression, 0, config, seed);
    return rf;
}

RandomForest RandomForest::fit_classification(const Eigen::MatrixXd& X, const std::vector<std::string>& labels,
                                              const ForestConfig& config, std::uint64_t seed) {
    if (static_cast<std::size_t>(X.rows()) != labels.size())
        throw InvalidArgument("random forest: X and labels have different lengths");
    RandomForest rf;
    rf.task_ = Task::classification;
    rf.n_features_ = X.cols();
    rf.classes_ = labels;
    std::sort(rf.classes_.begin(), rf.classes_.end());
    rf.classes_.erase(std::unique(rf.classes_.begin(), rf.classes_.end()), rf.classes_.end());
    std::vector<double> codes(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        codes[i] = static_cast<double>(std::lower_bound(rf.classes_.begin(), rf.classes_.end(), labels[i]) -
                                       rf.classes_.begin());
    rf.trees_ = grow_forest(X, codes, Task::classification, rf.classes_.size(), config, seed);
    return rf;
}

void RandomForest::check_columns(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != n_features_)
        throw InvalidArgument("random forest: query has " + std::to_string(Xq.cols()) + " columns, model expects " +
                              std::to_string(n_features_));
}

Eigen::VectorXd RandomForest::predict(const Eigen::MatrixXd& Xq) const {
    check_columns(Xq);
    if (task_ != Task::regression) throw InvalidArgument("random forest: predict() needs a regression model");
    Eigen::VectorXd out(Xq.rows());
    std::vector<double> per_tree(trees_.size());
    for (Eigen::Index r = 0; r < Xq.rows(); ++r) {
        for (std::size_t t = 0; t < trees_.size(); ++t) per_tree[t] = trees_[t].predict(&Xq(r, 0), Xq.outerStride());
        out(r) = shifted_mean(per_tree);
    }
    return out;
}

std::vector<std::string> RandomForest::predict_labels(const Eigen::MatrixXd& Xq) const {
    check_columns(Xq);
    if (task_ != Task::classification)
        throw InvalidArgument("random forest: predict_labels() needs a classification model");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(Xq.rows()));
    std::vector<std::size_t> votes(classes_.size());
    for (Eigen::Index r = 0; r < Xq.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(&Xq(r, 0), Xq.outerStride()))];
        out.push_back(classes_[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())]);
    }
    return out;
}

}  // namespace alloyopt
