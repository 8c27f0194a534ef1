#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "alloyopt/environment.hpp"

namespace alloyopt {

enum class SmaThirdTerm {
    one_minus_deviation,  // 1 - |T_w - T_target| / T_wN
    literal,              // T_wN - |T_w - T_target| / T_wN
};

/// Normalizers and options for the figure of merit of one alloy family.
///
/// Normalizer keys: sma {delta_H, delta_T, T_w}; ti {sigma_Y, sigma_U, v};
/// hea {sigma_Y, sigma_U, epsilon}. `weights` multiplies individual terms (same keys,
/// default 1); a weight of -1 on delta_T rewards low hysteresis instead of high.
struct FomConfig {
    EnvironmentKind kind = EnvironmentKind::hea;
    std::map<std::string, double> normalizers;
    std::map<std::string, double> weights;
    double target_temperature = 350.0;  // kelvin, sma only
    SmaThirdTerm sma_third_term = SmaThirdTerm::one_minus_deviation;
};

void validate(const FomConfig& config);

/// Mean of the three normalized terms of the family's figure of merit.
double fom(const FomConfig& config, const PropertyMap& properties);

/// Normalizers set to the 90th percentile of each term's raw quantity over
/// `samples` seeded random compositions of `env`. For sma the T_w normalizer is the
/// percentile of |T_w - T_target|.
FomConfig default_fom_config(const SyntheticEnvironment& env, double target_temperature = 350.0,
                             std::size_t samples = 10000, std::uint64_t seed = 0);

nlohmann::json to_json(const FomConfig& config);
FomConfig fom_config_from_json(const nlohmann::json& j);

}  // namespace alloyopt
