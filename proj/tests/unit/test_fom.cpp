#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"
#include "alloyopt/fom.hpp"

using namespace alloyopt;

namespace {
FomConfig ti_config() { return {EnvironmentKind::ti, {{"sigma_Y", 900}, {"sigma_U", 1000}, {"v", 250}}, {}, 350, {}}; }
FomConfig sma_config(SmaThirdTerm mode) {
    return {EnvironmentKind::sma, {{"delta_H", 20}, {"delta_T", 30}, {"T_w", 40}}, {}, 350, mode};
}
}  // namespace

TEST(Fom, TiUnitAndHomogeneity) {
    EXPECT_EQ(fom(ti_config(), {{"sigma_Y", 900}, {"sigma_U", 1000}, {"v", 250}}), 1.0);
    EXPECT_EQ(fom(ti_config(), {{"sigma_Y", 1800}, {"sigma_U", 2000}, {"v", 500}}), 2.0);
}

TEST(Fom, SmaThirdTermModes) {
    const PropertyMap at_deviation{{"delta_H", 20}, {"delta_T", 30}, {"M_p", 380}, {"A_p", 400}};
    EXPECT_EQ(fom(sma_config(SmaThirdTerm::one_minus_deviation), at_deviation), 2.0 / 3.0);
    const PropertyMap on_target{{"delta_H", 20}, {"delta_T", 30}, {"M_p", 340}, {"A_p", 360}};
    EXPECT_EQ(fom(sma_config(SmaThirdTerm::one_minus_deviation), on_target), 1.0);
    // literal: T_wN - deviation / T_wN = 40 - 1
    EXPECT_EQ(fom(sma_config(SmaThirdTerm::literal), at_deviation), (1.0 + 1.0 + 39.0) / 3.0);
}

TEST(Fom, WeightsOverrideSign) {
    auto cfg = sma_config(SmaThirdTerm::one_minus_deviation);
    cfg.weights["delta_T"] = -1.0;
    const PropertyMap p{{"delta_H", 20}, {"delta_T", 30}, {"M_p", 340}, {"A_p", 360}};
    EXPECT_EQ(fom(cfg, p), (1.0 - 1.0 + 1.0) / 3.0);
}

TEST(Fom, Errors) {
    EXPECT_THROW(fom(ti_config(), {{"sigma_Y", 1}, {"sigma_U", 1}}), InvalidArgument);
    auto bad = ti_config();
    bad.normalizers["v"] = 0.0;
    EXPECT_THROW(fom(bad, {{"sigma_Y", 1}, {"sigma_U", 1}, {"v", 1}}), InvalidArgument);
    bad.normalizers.erase("v");
    EXPECT_THROW(validate(bad), InvalidArgument);
}

TEST(Fom, DefaultConfigUsesPositivePercentiles) {
    for (auto kind : {EnvironmentKind::sma, EnvironmentKind::ti, EnvironmentKind::hea}) {
        const auto env = make_environment(kind, 2);
        const auto cfg = default_fom_config(env, 350.0, 2000);
        EXPECT_NO_THROW(validate(cfg));
        EXPECT_EQ(cfg.normalizers.size(), 3u);
        EXPECT_EQ(to_json(default_fom_config(env, 350.0, 2000)).dump(), to_json(cfg).dump());
    }
}

TEST(Fom, JsonRoundTrip) {
    auto cfg = sma_config(SmaThirdTerm::literal);
    cfg.weights["delta_T"] = -0.5;
    cfg.target_temperature = 310;
    const auto back = fom_config_from_json(nlohmann::json::parse(to_json(cfg).dump()));
    EXPECT_EQ(to_json(back), to_json(cfg));
    EXPECT_THROW(fom_config_from_json(nlohmann::json{{"environment", "ti"}}), InvalidArgument);
}
