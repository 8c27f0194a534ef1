#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace alloyopt {

enum class Task { regression, classification };

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_samples_leaf = 1;
    /// Features tried per split; 0 selects ceil(p/3) for regression, ceil(sqrt(p)) for classification.
    int max_features = 0;
    bool bootstrap = true;
    int jobs = 1;
};

/// One axis-aligned binary tree stored as a flat node array; node 0 is the root.
struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  // regression mean or winning class index
    };
    std::vector<Node> nodes;

    double predict(const double* x, Eigen::Index stride) const;
    int depth() const;
};

/// Bagged decision trees. Each tree gets a seed derived from (seed, tree index), so the
/// model does not depend on how many threads trained it.
class RandomForest {
public:
    static RandomForest fit_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& config,
                                       std::uint64_t seed);
    static RandomForest fit_classification(const Eigen::MatrixXd& X, const std::vector<std::string>& labels,
                                           const ForestConfig& config, std::uint64_t seed);

    Task task() const noexcept { return task_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    /// Sorted distinct training labels (classification only).
    const std::vector<std::string>& classes() const noexcept { return classes_; }
    Eigen::Index n_features() const noexcept { return n_features_; }

    /// Mean of per-tree leaf values.
    Eigen::VectorXd predict(const Eigen::MatrixXd& Xq) const;
    /// Majority vote of per-tree classes; ties go to the lowest label in sort order.
    std::vector<std::string> predict_labels(const Eigen::MatrixXd& Xq) const;

private:
    RandomForest() = default;
    void check_columns(const Eigen::MatrixXd& Xq) const;

    Task task_ = Task::regression;
    Eigen::Index n_features_ = 0;
    std::vector<DecisionTree> trees_;
    std::vector<std::string> classes_;
};

}  // namespace alloyopt
