#include "alloyopt/environment.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"

namespace alloyopt {
namespace {

struct SurfaceShape {
    const char* name;
    double baseline;
    double amplitude_scale;
};

// Baselines and bump scales are in the usual units of each property
// (J/g, K, MPa, HV, %); they only set plausible magnitudes.
std::vector<SurfaceShape> shapes_for(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::sma:
            return {{"delta_H", 8.0, 20.0}, {"delta_T", 15.0, 25.0}, {"M_p", 250.0, 150.0}, {"A_p", 280.0, 150.0}};
        case EnvironmentKind::ti:
            return {{"sigma_Y", 600.0, 500.0}, {"sigma_U", 700.0, 550.0}, {"v", 250.0, 150.0}};
        case EnvironmentKind::hea:
            return {{"sigma_Y", 300.0, 700.0}, {"sigma_U", 600.0, 700.0}, {"epsilon", 5.0, 45.0}};
    }
    throw InvalidArgument("unknown environment kind");
}

constexpr double kMinWidth = 0.15;
constexpr double kMaxWidth = 0.35;
constexpr double kMinAmplitude = 0.4;  // fraction of the property's amplitude scale

}  // namespace

std::string_view to_string(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::sma: return "sma";
        case EnvironmentKind::ti: return "ti";
        case EnvironmentKind::hea: return "hea";
    }
    return "?";
}

EnvironmentKind parse_environment_kind(std::string_view name) {
    if (name == "sma") return EnvironmentKind::sma;
    if (name == "ti") return EnvironmentKind::ti;
    if (name == "hea") return EnvironmentKind::hea;
    throw InvalidArgument("unknown environment '" + std::string(name) + "' (expected sma, ti or hea)");
}

double PropertySurface::evaluate(std::span<const double> fractions) const {
    double value = baseline;
    for (const auto& b : bumps) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < fractions.size(); ++i) {
            const double d = fractions[i] - b.center[i];
            d2 += d * d;
        }
        value += b.amplitude * std::exp(-d2 / (2.0 * b.width * b.width));
    }
    return value;
}

std::vector<std::string> SyntheticEnvironment::property_names() const {
    std::vector<std::string> names;
    for (const auto& p : properties) names.push_back(p.name);
    return names;
}

std::vector<std::string> default_elements(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::sma: return {"Ni", "Ti", "Cu", "Hf", "Zr", "Pd", "Fe", "Co", "Nb", "Al"};
        case EnvironmentKind::ti: return {"Ti", "Al", "V", "Mo", "Nb", "Zr", "Sn", "Fe", "Cr", "Ta", "Si"};
        case EnvironmentKind::hea: return {"Co", "Cr", "Fe", "Ni", "Mn", "Al", "Cu", "Ti", "V", "Nb"};
    }
    throw InvalidArgument("unknown environment kind");
}

std::vector<std::string> environment_property_names(EnvironmentKind kind) {
    std::vector<std::string> names;
    for (const auto& s : shapes_for(kind)) names.emplace_back(s.name);
    return names;
}

SyntheticEnvironment make_environment(EnvironmentKind kind, std::uint64_t seed, std::optional<CompositionSpace> space) {
    if (!space) space = CompositionSpace::unbounded(default_elements(kind));
    SyntheticEnvironment env{kind, *space, seed, {}};
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(kind), 0xE17ULL}));
    for (const auto& shape : shapes_for(kind)) {
        PropertySurface surface{shape.name, shape.baseline, {}};
        for (std::size_t g = 0; g < kBumpsPerProperty; ++g) {
            Bump bump;
            bump.center = env.space.sample(rng);
            bump.width = kMinWidth + (kMaxWidth - kMinWidth) * uniform01(rng);
            bump.amplitude = shape.amplitude_scale * (kMinAmplitude + (1.0 - kMinAmplitude) * uniform01(rng));
            surface.bumps.push_back(std::move(bump));
        }
        env.properties.push_back(std::move(surface));
    }
    return env;
}

std::vector<double> ground_truth_values(const SyntheticEnvironment& env, std::span<const double> fractions) {
    std::vector<double> out;
    out.reserve(env.properties.size());
    for (const auto& p : env.properties) out.push_back(p.evaluate(fractions));
    return out;
}

PropertyMap ground_truth(const SyntheticEnvironment& env, const Composition& c) {
    if (c.elements() != env.space.elements())
        throw InvalidArgument("ground_truth: composition elements do not match the environment");
    if (!env.space.contains(c.fractions())) throw InvalidArgument("ground_truth: composition outside the design space");
    PropertyMap out;
    const auto values = ground_truth_values(env, c.fractions());
    for (std::size_t i = 0; i < values.size(); ++i) out.emplace(env.properties[i].name, values[i]);
    return out;
}

Dataset generate_synthetic_dataset(const SyntheticEnvironment& env, std::size_t n, double noise_std,
                                   std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("generate_synthetic_dataset: n must be at least 1");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw InvalidArgument("generate_synthetic_dataset: noise_std must be finite and non-negative");
    Rng sample_rng(derive_seed(seed, {1}));
    Rng noise_rng(derive_seed(seed, {2}));
    std::vector<DatasetRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        DatasetRow row;
        row.fractions = env.space.sample(sample_rng);
        rescale_to_unit_sum(row.fractions);
        row.properties = ground_truth_values(env, row.fractions);
        if (noise_std > 0.0)
            for (double& v : row.properties) v += noise_std * standard_normal(noise_rng);
        rows.push_back(std::move(row));
    }
    return Dataset(env.space.elements(), env.property_names(), std::move(rows));
}

void to_json(nlohmann::json& j, const SyntheticEnvironment& env) {
    j = nlohmann::json{{"name", to_string(env.kind)},
                       {"seed", env.seed},
                       {"elements", env.space.elements()},
                       {"lower", env.space.lower()},
                       {"upper", env.space.upper()}};
    auto& props = j["properties"] = nlohmann::json::array();
    for (const auto& p : env.properties) {
        nlohmann::json bumps = nlohmann::json::array();
        for (const auto& b : p.bumps)
            bumps.push_back({{"center", b.center}, {"width", b.width}, {"amplitude", b.amplitude}});
        props.push_back({{"name", p.name}, {"baseline", p.baseline}, {"bumps", bumps}});
    }
}

SyntheticEnvironment environment_from_json(const nlohmann::json& j) {
    try {
        const auto kind = parse_environment_kind(j.at("name").get<std::string>());
        CompositionSpace space(j.at("elements").get<std::vector<std::string>>(),
                               j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>());
        SyntheticEnvironment env{kind, space, j.at("seed").get<std::uint64_t>(), {}};
        for (const auto& p : j.at("properties")) {
            PropertySurface s{p.at("name").get<std::string>(), p.at("baseline").get<double>(), {}};
            for (const auto& b : p.at("bumps")) {
                Bump bump{b.at("center").get<std::vector<double>>(), b.at("width").get<double>(),
                          b.at("amplitude").get<double>()};
                if (bump.center.size() != space.size())
                    throw InvalidArgument("environment: bump center has the wrong dimension");
                if (!(bump.width > 0.0)) throw InvalidArgument("environment: bump width must be positive");
                s.bumps.push_back(std::move(bump));
            }
            env.properties.push_back(std::move(s));
        }
        if (env.property_names() != environment_property_names(kind))
            throw InvalidArgument("environment: property list does not match '" + std::string(to_string(kind)) + "'");
        return env;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("environment JSON: ") + e.what());
    }
}

}  // namespace alloyopt
