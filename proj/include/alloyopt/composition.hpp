#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alloyopt/random.hpp"

namespace alloyopt {

inline constexpr double kSimplexTolerance = 1e-9;

/// Divides by the sum until the vector no longer changes, so a second call is a no-op.
/// Entries are capped at one.
void rescale_to_unit_sum(std::span<double> fractions);

/// Mole fractions over an ordered element list; non-negative and summing to one.
class Composition {
public:
    Composition(std::vector<std::string> elements, std::vector<double> fractions);

    const std::vector<std::string>& elements() const noexcept { return elements_; }
    const std::vector<double>& fractions() const noexcept { return fractions_; }
    std::size_t size() const noexcept { return fractions_.size(); }
    double operator[](std::size_t i) const { return fractions_[i]; }

private:
    std::vector<std::string> elements_;
    std::vector<double> fractions_;
};

/// Validates and builds a composition. With `normalize`, fractions are first divided by
/// their sum; otherwise the sum must already be within 1e-9 of one.
Composition make_composition(std::vector<std::string> elements, std::vector<double> fractions, bool normalize = false);

/// Per-element box bounds intersected with the simplex.
class CompositionSpace {
public:
    CompositionSpace(std::vector<std::string> elements, std::vector<double> lower, std::vector<double> upper);

    /// [0, 1] on every element.
    static CompositionSpace unbounded(std::vector<std::string> elements);

    const std::vector<std::string>& elements() const noexcept { return elements_; }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    std::size_t size() const noexcept { return elements_.size(); }

    bool contains(std::span<const double> fractions, double tol = kSimplexTolerance) const;

    /// Clip to the box, then move the residual mass onto coordinates with room left,
    /// in proportion to that room. Result is inside the space to within round-off.
    std::vector<double> project(std::span<const double> point) const;

    /// One Dirichlet(1,...,1) draw projected into the space.
    std::vector<double> sample(Rng& rng) const;

private:
    std::vector<std::string> elements_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

std::vector<Composition> sample_random_compositions(const CompositionSpace& space, std::size_t n, std::uint64_t seed);

}  // namespace alloyopt
