#include "alloyopt/fom.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"

namespace alloyopt {
namespace {

std::array<const char*, 3> term_keys(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::sma: return {"delta_H", "delta_T", "T_w"};
        case EnvironmentKind::ti: return {"sigma_Y", "sigma_U", "v"};
        case EnvironmentKind::hea: return {"sigma_Y", "sigma_U", "epsilon"};
    }
    throw InvalidArgument("unknown environment kind");
}

double require(const PropertyMap& props, const char* name) {
    const auto it = props.find(name);
    if (it == props.end()) throw InvalidArgument(std::string("fom: missing property '") + name + "'");
    if (!std::isfinite(it->second)) throw InvalidArgument(std::string("fom: non-finite property '") + name + "'");
    return it->second;
}

double weight(const FomConfig& cfg, const char* key) {
    const auto it = cfg.weights.find(key);
    return it == cfg.weights.end() ? 1.0 : it->second;
}

/// Raw quantity that each term divides by its normalizer.
std::array<double, 3> raw_terms(const FomConfig& cfg, const PropertyMap& props) {
    if (cfg.kind == EnvironmentKind::sma) {
        const double working_temperature = 0.5 * (require(props, "M_p") + require(props, "A_p"));
        return {require(props, "delta_H"), require(props, "delta_T"),
                std::abs(working_temperature - cfg.target_temperature)};
    }
    const auto keys = term_keys(cfg.kind);
    return {require(props, keys[0]), require(props, keys[1]), require(props, keys[2])};
}

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

void validate(const FomConfig& cfg) {
    for (const char* key : term_keys(cfg.kind)) {
        const auto it = cfg.normalizers.find(key);
        if (it == cfg.normalizers.end()) throw InvalidArgument(std::string("fom: missing normalizer '") + key + "'");
        if (!(std::isfinite(it->second) && it->second > 0.0))
            throw InvalidArgument(std::string("fom: normalizer '") + key + "' must be positive and finite");
    }
    for (const auto& [key, w] : cfg.weights)
        if (!std::isfinite(w)) throw InvalidArgument("fom: non-finite weight for '" + key + "'");
    if (!std::isfinite(cfg.target_temperature)) throw InvalidArgument("fom: non-finite target temperature");
}

double fom(const FomConfig& cfg, const PropertyMap& properties) {
    validate(cfg);
    const auto keys = term_keys(cfg.kind);
    const auto raw = raw_terms(cfg, properties);
    const double t1 = weight(cfg, keys[0]) * (raw[0] / cfg.normalizers.at(keys[0]));
    const double t2 = weight(cfg, keys[1]) * (raw[1] / cfg.normalizers.at(keys[1]));
    double t3;
    if (cfg.kind == EnvironmentKind::sma) {
        const double norm = cfg.normalizers.at(keys[2]);
        t3 = cfg.sma_third_term == SmaThirdTerm::one_minus_deviation ? 1.0 - raw[2] / norm : norm - raw[2] / norm;
        t3 *= weight(cfg, keys[2]);
    } else {
        t3 = weight(cfg, keys[2]) * (raw[2] / cfg.normalizers.at(keys[2]));
    }
    return (t1 + t2 + t3) / 3.0;
}

FomConfig default_fom_config(const SyntheticEnvironment& env, double target_temperature, std::size_t samples,
                             std::uint64_t seed) {
    if (samples == 0) throw InvalidArgument("default_fom_config: samples must be positive");
    FomConfig cfg;
    cfg.kind = env.kind;
    cfg.target_temperature = target_temperature;
    const auto keys = term_keys(env.kind);
    std::array<std::vector<double>, 3> columns;
    Rng rng(derive_seed(seed, {0xF0AULL}));
    const auto names = env.property_names();
    for (std::size_t s = 0; s < samples; ++s) {
        const auto x = env.space.sample(rng);
        const auto values = ground_truth_values(env, x);
        PropertyMap props;
        for (std::size_t i = 0; i < names.size(); ++i) props.emplace(names[i], values[i]);
        const auto raw = raw_terms(cfg, props);
        for (int t = 0; t < 3; ++t) columns[static_cast<std::size_t>(t)].push_back(raw[static_cast<std::size_t>(t)]);
    }
    for (int t = 0; t < 3; ++t) {
        double p90 = percentile(columns[static_cast<std::size_t>(t)], 0.9);
        if (!(p90 > 0.0)) p90 = 1.0;
        cfg.normalizers[keys[static_cast<std::size_t>(t)]] = p90;
    }
    return cfg;
}

nlohmann::json to_json(const FomConfig& cfg) {
    return {{"environment", to_string(cfg.kind)},
            {"normalizers", cfg.normalizers},
            {"weights", cfg.weights},
            {"target_temperature", cfg.target_temperature},
            {"sma_third_term",
             cfg.sma_third_term == SmaThirdTerm::one_minus_deviation ? "one-minus-deviation" : "literal"}};
}

FomConfig fom_config_from_json(const nlohmann::json& j) {
    try {
        FomConfig cfg;
        cfg.kind = parse_environment_kind(j.at("environment").get<std::string>());
        cfg.normalizers = j.at("normalizers").get<std::map<std::string, double>>();
        cfg.weights = j.value("weights", std::map<std::string, double>{});
        cfg.target_temperature = j.value("target_temperature", 350.0);
        const auto mode = j.value("sma_third_term", std::string("one-minus-deviation"));
        if (mode == "one-minus-deviation")
            cfg.sma_third_term = SmaThirdTerm::one_minus_deviation;
        else if (mode == "literal")
            cfg.sma_third_term = SmaThirdTerm::literal;
        else
            throw InvalidArgument("fom config: unknown sma_third_term '" + mode + "'");
        validate(cfg);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("fom config JSON: ") + e.what());
    }
}

}  // namespace alloyopt
