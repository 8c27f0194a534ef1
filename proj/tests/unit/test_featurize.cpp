#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"
#include "alloyopt/featurize.hpp"
#include "fixtures.hpp"

using namespace alloyopt;
using alloyopt::testing::random_fractions;
using alloyopt::testing::random_table;

namespace {
EmbeddingTable ab_table() {
    Eigen::MatrixXd v(2, 2);
    v << 1, 3, 3, 1;
    return EmbeddingTable({"Fe", "Ni"}, v);
}
}  // namespace

TEST(MoleAverage, PureElementIsItsRow) {
    const auto t = random_table({"Fe", "Ni", "Co"}, 5, 1);
    const auto fv = mole_average(make_composition({"Ni", "Co"}, {1.0, 0.0}), t);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(fv.values[j], t.values()(1, static_cast<Eigen::Index>(j)));
    const auto sub = mole_average(make_composition({"Ni"}, {1.0}), t, FeatureSubset({4, 1}, 5));
    EXPECT_EQ(sub.column_ids, (std::vector<std::size_t>{1, 4}));
    EXPECT_EQ(sub.values[1], t.values()(1, 4));
}

TEST(MoleAverage, SymmetricBlend) {
    const auto fv = mole_average(make_composition({"Fe", "Ni"}, {0.5, 0.5}), ab_table());
    EXPECT_EQ(fv.values, (std::vector<double>{2.0, 2.0}));
}

TEST(MoleAverage, MissingElement) {
    EXPECT_THROW(mole_average(make_composition({"Fe", "Cu"}, {0.5, 0.5}), ab_table()), InvalidArgument);
    EXPECT_NO_THROW(mole_average(make_composition({"Fe", "Cu"}, {1.0, 0.0}), ab_table()));
}

TEST(MoleAverage, MatchesDoubleLoopOracle) {
    const auto els = alloyopt::testing::fixture_elements();
    const auto t = random_table(els, 12, 3);
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = random_fractions(rng, els.size());
        const auto fv = mole_average(Composition(els, f), t);
        for (std::size_t j = 0; j < 12; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < els.size(); ++i)
                acc += f[i] * t.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            EXPECT_NEAR(fv.values[j], acc, 1e-13);
        }
    }
}

TEST(MoleAverage, SubsetIsProjection) {
    const auto els = alloyopt::testing::fixture_elements();
    const auto t = random_table(els, 20, 5);
    Rng rng(6);
    const FeatureSubset s({3, 17, 0, 9}, 20);
    for (int trial = 0; trial < 100; ++trial) {
        const Composition c(els, random_fractions(rng, els.size()));
        const auto full = mole_average(c, t);
        const auto part = mole_average(c, t, s);
        for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(part.values[k], full.values[s.columns()[k]]);
    }
}

TEST(MoleAverage, ValuesWithinElementRange) {
    const std::vector<std::string> els{"Fe", "Ni", "Co", "Cr", "Mn"};
    const auto t = random_table(els, 8, 7);
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = random_fractions(rng, els.size());
        f[trial % 5] = 0.0;
        double s = 0;
        for (double v : f) s += v;
        for (double& v : f) v /= s;
        const auto fv = mole_average(make_composition(els, f), t);
        for (std::size_t j = 0; j < 8; ++j) {
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t i = 0; i < els.size(); ++i)
                if (f[i] > 0) {
                    const double v = t.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    lo = std::min(lo, v), hi = std::max(hi, v);
                }
            EXPECT_GE(fv.values[j], lo - 1e-12);
            EXPECT_LE(fv.values[j], hi + 1e-12);
        }
    }
}

TEST(FeatureSubset, ValidationAndJson) {
    EXPECT_THROW(FeatureSubset({}, 4), InvalidArgument);
    EXPECT_THROW(FeatureSubset({1, 1}, 4), InvalidArgument);
    EXPECT_THROW(FeatureSubset({4}, 4), InvalidArgument);
    const FeatureSubset s({3, 0}, 4, "semantic");
    EXPECT_EQ(s.columns(), (std::vector<std::size_t>{0, 3}));
    const auto j = subset_to_json(s);
    EXPECT_EQ(j.at("columns"), nlohmann::json({0, 3}));
    EXPECT_EQ(j.at("source_label"), "semantic");
    const auto back = subset_from_json(j, 4);
    EXPECT_EQ(back, s);
    EXPECT_EQ(back.source_label(), "semantic");
    EXPECT_THROW(subset_from_json(j, 3), InvalidArgument);
    EXPECT_EQ(FeatureSubset::all(3).columns(), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(FeaturizeDataset, SingleRowMatchesMoleAverage) {
    const auto t = random_table({"Fe", "Ni", "Co"}, 6, 9);
    const Dataset ds({"Fe", "Ni", "Co"}, {"y"}, {{{0.2, 0.3, 0.5}, {1.5}, std::nullopt}});
    const auto fm = featurize_dataset(ds, t);
    const auto fv = mole_average(make_composition({"Fe", "Ni", "Co"}, {0.2, 0.3, 0.5}), t);
    ASSERT_EQ(fm.values.rows(), 1);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(fm.values(0, static_cast<Eigen::Index>(j)), fv.values[j]);
    EXPECT_EQ(property_targets(ds, "y")(0), 1.5);
    EXPECT_THROW(property_targets(ds, "z"), InvalidArgument);
    EXPECT_THROW(class_targets(ds), InvalidArgument);
}

TEST(CompositionFeaturizer, BatchMatchesSingle) {
    const auto els = alloyopt::testing::fixture_elements();
    const auto t = random_table(els, 7, 10);
    const CompositionFeaturizer fz(els, t, FeatureSubset({1, 5}, 7));
    Rng rng(11);
    Eigen::MatrixXd F(5, static_cast<Eigen::Index>(els.size()));
    for (Eigen::Index r = 0; r < 5; ++r) {
        const auto f = random_fractions(rng, els.size());
        for (std::size_t i = 0; i < els.size(); ++i) F(r, static_cast<Eigen::Index>(i)) = f[i];
    }
    const auto batch = fz.transform(F);
    for (Eigen::Index r = 0; r < 5; ++r) {
        std::vector<double> f(els.size());
        for (std::size_t i = 0; i < els.size(); ++i) f[i] = F(r, static_cast<Eigen::Index>(i));
        const auto one = fz(f);
        EXPECT_NEAR((one.transpose() - batch.row(r)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    }
}
