#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "alloyopt/cli.hpp"
#include "alloyopt/element_data.hpp"
#include "fixtures.hpp"

using namespace alloyopt;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("alloyopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        std::ofstream(path("emb.csv")) << alloyopt::testing::random_table(6, 21).to_csv();
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return run_cli(args, out_, err_);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, GenSyntheticRoundTrips) {
    ASSERT_EQ(run({"gen-synthetic", "--env", "ti", "--samples", "25", "--seed", "3", "--out", path("d.csv"), "--env-out",
                   path("env.json")}),
              0)
        << err_.str();
    const auto ds = load_dataset(path("d.csv"));
    EXPECT_EQ(ds.size(), 25u);
    EXPECT_TRUE(ds.property_index("fom").has_value());
    EXPECT_TRUE(fs::exists(path("env.json")));
    ASSERT_EQ(run({"gen-synthetic", "--env-file", path("env.json"), "--samples", "25", "--seed", "3", "--out",
                   path("d2.csv")}),
              0)
        << err_.str();
    EXPECT_EQ(slurp(path("d.csv")), slurp(path("d2.csv")));
}

TEST_F(CliTest, SelectWritesSubsetOfRequestedSize) {
    ASSERT_EQ(run({"gen-synthetic", "--env", "hea", "--samples", "30", "--out", path("d.csv")}), 0) << err_.str();
    ASSERT_EQ(run({"select", "--data", path("d.csv"), "--embeddings", path("emb.csv"), "--k", "4", "--population", "8",
                   "--generations", "2", "--rounds", "1", "--folds", "3", "--trees", "10", "--out", path("s.json")}),
              0)
        << err_.str();
    const auto j = nlohmann::json::parse(slurp(path("s.json")));
    EXPECT_EQ(j.at("columns").size(), 4u);
}

TEST_F(CliTest, FeaturizeHeader) {
    ASSERT_EQ(run({"gen-synthetic", "--env", "sma", "--samples", "5", "--out", path("d.csv")}), 0) << err_.str();
    std::ofstream(path("subset.json")) << R"({"columns": [4, 1]})";
    ASSERT_EQ(run({"featurize", "--data", path("d.csv"), "--embeddings", path("emb.csv"), "--subset", path("subset.json"),
                   "--out", path("f.csv")}),
              0)
        << err_.str();
    const auto text = slurp(path("f.csv"));
    EXPECT_EQ(text.substr(0, 6), "e1,e4,");
}

TEST_F(CliTest, HelpExitsZeroEverywhere) {
    EXPECT_EQ(run({"--help"}), 0);
    for (const char* sub : {"gen-synthetic", "featurize", "select", "cv", "bo", "analyze", "report"}) {
        EXPECT_EQ(run({sub, "--help"}), 0) << sub;
        EXPECT_FALSE(out_.str().empty()) << sub;
    }
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run({"transmogrify"}), 2);
    EXPECT_EQ(run({"select", "--data", path("d.csv")}), 2);
    EXPECT_EQ(run({"analyze", "--embeddings", path("emb.csv"), "--mode", "spearman"}), 2);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
    EXPECT_EQ(run({"featurize", "--data", path("missing.csv"), "--embeddings", path("emb.csv"), "--out", path("f.csv")}), 1);
    EXPECT_NE(err_.str().find("error:"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
    std::ofstream(path("cfg.json")) << R"({"env": "hea", "samples": 7, "seed": 4})";
    ASSERT_EQ(run({"gen-synthetic", "--config", path("cfg.json"), "--samples", "9", "--out", path("d.csv")}), 0)
        << err_.str();
    EXPECT_EQ(load_dataset(path("d.csv")).size(), 9u);
    ASSERT_EQ(run({"gen-synthetic", "--config", path("cfg.json"), "--out", path("d7.csv")}), 0) << err_.str();
    EXPECT_EQ(load_dataset(path("d7.csv")).size(), 7u);
}

TEST_F(CliTest, SaveConfigRoundTrips) {
    ASSERT_EQ(run({"gen-synthetic", "--env", "sma", "--samples", "6", "--seed", "8", "--out", path("a.csv"),
                   "--save-config", path("saved.json")}),
              0)
        << err_.str();
    ASSERT_EQ(run({"gen-synthetic", "--config", path("saved.json"), "--out", path("b.csv")}), 0) << err_.str();
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, AnalyzeAndReport) {
    ASSERT_EQ(run({"analyze", "--embeddings", path("emb.csv"), "--mode", "cosine", "--out", path("cos.csv")}), 0)
        << err_.str();
    EXPECT_FALSE(slurp(path("cos.csv")).empty());
    std::ofstream(path("a.json")) << R"({"label": "a", "final_fom": [1.2, 1.5, 1.9, 2.4, 2.0, 1.7]})";
    std::ofstream(path("b.json")) << R"({"label": "b", "final_fom": [0.9, 1.1, 1.0, 1.4, 0.7]})";
    ASSERT_EQ(run({"report", "--compare", path("a.json"), path("b.json"), "--out", path("r.json")}), 0) << err_.str();
    const auto j = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_NEAR(j.at("comparison").at("t_statistic").get<double>(), 3.709505402778902, 1e-9);
    EXPECT_NEAR(j.at("comparison").at("p_greater").get<double>(), 0.002712118400360055, 1e-9);
    EXPECT_EQ(j.at("groups").at(0).at("label"), "a");
}
