#include <gtest/gtest.h>

#include "alloyopt/error.hpp"
#include "alloyopt/random.hpp"
#include "alloyopt/random_forest.hpp"

using namespace alloyopt;

namespace {
Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform01(rng);
    return m;
}
}  // namespace

TEST(RandomForest, ConstantTargetExact) {
    Rng rng(1);
    const auto X = random_matrix(rng, 30, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 0.1 + 0.2);
    const auto rf = RandomForest::fit_regression(X, y, {}, 4);
    const auto p = rf.predict(random_matrix(rng, 20, 3) * 10.0);
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_EQ(p(i), 0.1 + 0.2);
}

TEST(RandomForest, SingleRow) {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.7;
    const auto rf = RandomForest::fit_regression(X, Eigen::VectorXd::Constant(1, -4.25), {}, 0);
    EXPECT_EQ(rf.predict(Eigen::MatrixXd::Random(5, 2))(3), -4.25);
}

TEST(RandomForest, XorTrainingAccuracy) {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<std::string> labels{"a", "b", "b", "a"};
    ForestConfig cfg;
    cfg.bootstrap = false;
    cfg.max_features = 2;
    const auto rf = RandomForest::fit_classification(X, labels, cfg, 3);
    EXPECT_EQ(rf.predict_labels(X), labels);
}

TEST(RandomForest, SingleTreeEqualsLeafValue) {
    Rng rng(2);
    const auto X = random_matrix(rng, 25, 2);
    Eigen::VectorXd y(25);
    for (Eigen::Index i = 0; i < 25; ++i) y(i) = X(i, 0) * 3 + X(i, 1);
    ForestConfig cfg;
    cfg.n_trees = 1;
    const auto rf = RandomForest::fit_regression(X, y, cfg, 7);
    const auto Xq = random_matrix(rng, 10, 2);
    const auto p = rf.predict(Xq);
    for (Eigen::Index r = 0; r < 10; ++r) EXPECT_EQ(p(r), rf.trees()[0].predict(&Xq(r, 0), Xq.outerStride()));
}

TEST(RandomForest, DeterministicAndJobIndependent) {
    Rng rng(3);
    const auto X = random_matrix(rng, 40, 4);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) y(i) = X(i, 0) - X(i, 2) * X(i, 3);
    ForestConfig one, many;
    many.jobs = 4;
    const auto Xq = random_matrix(rng, 15, 4);
    const auto a = RandomForest::fit_regression(X, y, one, 11).predict(Xq);
    const auto b = RandomForest::fit_regression(X, y, one, 11).predict(Xq);
    const auto c = RandomForest::fit_regression(X, y, many, 11).predict(Xq);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    EXPECT_NE(a, RandomForest::fit_regression(X, y, one, 12).predict(Xq));
}

TEST(RandomForest, PredictionsWithinTargetRange) {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_matrix(rng, 30, 3);
        Eigen::VectorXd y(30);
        for (Eigen::Index i = 0; i < 30; ++i) y(i) = standard_normal(rng) * 100;
        ForestConfig cfg;
        cfg.n_trees = 20;
        const auto p = RandomForest::fit_regression(X, y, cfg, static_cast<std::uint64_t>(trial))
                           .predict(random_matrix(rng, 50, 3) * 3.0 - Eigen::MatrixXd::Ones(50, 3));
        EXPECT_GE(p.minCoeff(), y.minCoeff());
        EXPECT_LE(p.maxCoeff(), y.maxCoeff());
    }
}

TEST(RandomForest, FitsSmoothFunctionWell) {
    Rng rng(5);
    const auto X = random_matrix(rng, 200, 2);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y(i) = 4 * X(i, 0) + X(i, 1);
    const auto rf = RandomForest::fit_regression(X, y, {}, 0);
    const auto Xq = random_matrix(rng, 100, 2);
    Eigen::VectorXd truth(100);
    for (Eigen::Index i = 0; i < 100; ++i) truth(i) = 4 * Xq(i, 0) + Xq(i, 1);
    EXPECT_LT((rf.predict(Xq) - truth).cwiseAbs().mean(), 0.2);
}

TEST(RandomForest, SingleClassAndTies) {
    Eigen::MatrixXd X(3, 1);
    X << 0, 1, 2;
    const auto rf = RandomForest::fit_classification(X, {"x", "x", "x"}, {}, 0);
    EXPECT_EQ(rf.predict_labels(X), (std::vector<std::string>{"x", "x", "x"}));
    EXPECT_EQ(rf.classes(), std::vector<std::string>{"x"});
}

TEST(RandomForest, Errors) {
    EXPECT_THROW(RandomForest::fit_regression(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), {}, 0), InvalidArgument);
    Eigen::MatrixXd X(2, 2);
    X << 0, 1, 1, 0;
    const auto rf = RandomForest::fit_regression(X, Eigen::Vector2d(1, 2), {}, 0);
    EXPECT_THROW(rf.predict(Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
    EXPECT_THROW(rf.predict_labels(X), InvalidArgument);
    ForestConfig bad;
    bad.n_trees = 0;
    EXPECT_THROW(RandomForest::fit_regression(X, Eigen::Vector2d(1, 2), bad, 0), InvalidArgument);
}
