#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alloyopt/element_data.hpp"
#include "alloyopt/environment.hpp"
#include "alloyopt/random.hpp"

namespace alloyopt::testing {

/// Union of the element lists of all synthetic environments, in first-seen order.
inline std::vector<std::string> fixture_elements() {
    std::vector<std::string> out;
    for (auto kind : {EnvironmentKind::sma, EnvironmentKind::ti, EnvironmentKind::hea})
        for (auto& e : default_elements(kind))
            if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    return out;
}

/// Seeded standard-normal embedding table over `elements`.
inline EmbeddingTable random_table(const std::vector<std::string>& elements, std::size_t dim, std::uint64_t seed,
                                   std::string label = "fixture") {
    Rng rng(seed);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(elements.size()), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) values(i, j) = standard_normal(rng);
    return EmbeddingTable(elements, values, std::move(label));
}

inline EmbeddingTable random_table(std::size_t dim, std::uint64_t seed) {
    return random_table(fixture_elements(), dim, seed);
}

/// Dirichlet(1) fractions over `n` elements.
inline std::vector<double> random_fractions(Rng& rng, std::size_t n) {
    std::vector<double> f(n);
    double sum = 0.0;
    for (auto& v : f) {
        double u;
        do {
            u = uniform01(rng);
        } while (u <= 0.0);
        v = -std::log(u);
        sum += v;
    }
    for (auto& v : f) v /= sum;
    return f;
}

}  // namespace alloyopt::testing
