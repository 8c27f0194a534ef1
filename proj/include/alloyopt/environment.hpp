#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alloyopt/composition.hpp"
#include "alloyopt/element_data.hpp"

namespace alloyopt {

enum class EnvironmentKind { sma, ti, hea };

std::string_view to_string(EnvironmentKind kind);
EnvironmentKind parse_environment_kind(std::string_view name);

/// One Gaussian bump: amplitude * exp(-|c - center|^2 / (2 width^2)).
struct Bump {
    std::vector<double> center;
    double width = 0.2;
    double amplitude = 0.0;
};

struct PropertySurface {
    std::string name;
    double baseline = 0.0;
    std::vector<Bump> bumps;

    double evaluate(std::span<const double> fractions) const;
};

using PropertyMap = std::map<std::string, double, std::less<>>;

/// Closed-form stand-in for an experimental ground truth: every property is a
/// baseline plus a sum of seeded Gaussian bumps over the composition simplex.
struct SyntheticEnvironment {
    EnvironmentKind kind = EnvironmentKind::hea;
    CompositionSpace space;
    std::uint64_t seed = 0;
    std::vector<PropertySurface> properties;

    std::vector<std::string> property_names() const;
};

inline constexpr std::size_t kBumpsPerProperty = 5;

/// Default element list for each alloy family (10 for sma and hea, 11 for ti).
std::vector<std::string> default_elements(EnvironmentKind kind);
/// Property names required for each alloy family.
std::vector<std::string> environment_property_names(EnvironmentKind kind);

/// Deterministic in (kind, seed, space).
SyntheticEnvironment make_environment(EnvironmentKind kind, std::uint64_t seed,
                                      std::optional<CompositionSpace> space = std::nullopt);

/// Throws InvalidArgument if `c` is outside env.space.
PropertyMap ground_truth(const SyntheticEnvironment& env, const Composition& c);
/// Raw form without validation, used in tight loops that already guarantee membership.
std::vector<double> ground_truth_values(const SyntheticEnvironment& env, std::span<const double> fractions);

/// Samples `n` compositions and adds independent N(0, noise_std^2) noise to every property.
Dataset generate_synthetic_dataset(const SyntheticEnvironment& env, std::size_t n, double noise_std,
                                   std::uint64_t seed);

void to_json(nlohmann::json& j, const SyntheticEnvironment& env);
SyntheticEnvironment environment_from_json(const nlohmann::json& j);

}  // namespace alloyopt
