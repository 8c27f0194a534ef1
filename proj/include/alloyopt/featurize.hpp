#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "alloyopt/composition.hpp"
#include "alloyopt/element_data.hpp"

namespace alloyopt {

/// Strictly increasing descriptor-column indices.
class FeatureSubset {
public:
    FeatureSubset() = default;
    /// Sorts and validates `columns` against a table of width `dim`.
    FeatureSubset(std::vector<std::size_t> columns, std::size_t dim, std::string source_label = {});

    static FeatureSubset all(std::size_t dim, std::string source_label = {});

    const std::vector<std::size_t>& columns() const noexcept { return columns_; }
    std::size_t size() const noexcept { return columns_.size(); }
    const std::string& source_label() const noexcept { return source_label_; }

    friend bool operator==(const FeatureSubset& a, const FeatureSubset& b) { return a.columns_ == b.columns_; }
    friend bool operator<(const FeatureSubset& a, const FeatureSubset& b) { return a.columns_ < b.columns_; }

private:
    std::vector<std::size_t> columns_;
    std::string source_label_;
};

nlohmann::json subset_to_json(const FeatureSubset& subset);
FeatureSubset subset_from_json(const nlohmann::json& j, std::size_t dim);

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::size_t> column_ids;
};

/// value_j = sum_i fraction_i * table[element_i][column_j]. Elements with zero fraction
/// may be absent from the table.
FeatureVector mole_average(const Composition& c, const EmbeddingTable& table,
                           const std::optional<FeatureSubset>& subset = std::nullopt);

/// Precomputed element-to-feature weights for a fixed element ordering, so that many
/// compositions over the same elements can be featurized with one matrix product.
class CompositionFeaturizer {
public:
    CompositionFeaturizer(const std::vector<std::string>& elements, const EmbeddingTable& table,
                          const std::optional<FeatureSubset>& subset = std::nullopt);

    std::size_t n_elements() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    std::size_t n_features() const noexcept { return static_cast<std::size_t>(weights_.cols()); }
    const std::vector<std::size_t>& column_ids() const noexcept { return column_ids_; }

    Eigen::VectorXd operator()(std::span<const double> fractions) const;
    /// Row i of the result featurizes row i of `fractions` (n x n_elements).
    Eigen::MatrixXd transform(const Eigen::MatrixXd& fractions) const;

private:
    void check_support(std::span<const double> fractions) const;

    Eigen::MatrixXd weights_;         // n_elements x n_features
    std::vector<bool> present_;       // element found in the table
    std::vector<std::string> elements_;
    std::vector<std::size_t> column_ids_;
};

struct FeatureMatrix {
    Eigen::MatrixXd values;  // one row per dataset row
    std::vector<std::size_t> column_ids;
};

FeatureMatrix featurize_dataset(const Dataset& ds, const EmbeddingTable& table,
                                const std::optional<FeatureSubset>& subset = std::nullopt);

/// Target column for a regression run; throws InvalidArgument for an unknown name.
Eigen::VectorXd property_targets(const Dataset& ds, const std::string& name);
/// Class labels; throws InvalidArgument if the dataset has no class column.
std::vector<std::string> class_targets(const Dataset& ds);

/// Row-stacked fractions of a dataset.
Eigen::MatrixXd fraction_matrix(const Dataset& ds);

}  // namespace alloyopt
