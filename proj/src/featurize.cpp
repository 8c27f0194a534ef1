#include "alloyopt/featurize.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "alloyopt/error.hpp"

namespace alloyopt {

FeatureSubset::FeatureSubset(std::vector<std::size_t> columns, std::size_t dim, std::string source_label)
    : columns_(std::move(columns)), source_label_(std::move(source_label)) {
    if (columns_.empty()) throw InvalidArgument("feature subset: at least one column required");
    std::sort(columns_.begin(), columns_.end());
    if (std::adjacent_find(columns_.begin(), columns_.end()) != columns_.end())
        throw InvalidArgument("feature subset: duplicate column index");
    if (columns_.back() >= dim)
        throw InvalidArgument("feature subset: column " + std::to_string(columns_.back()) + " out of range for D=" +
                              std::to_string(dim));
}

FeatureSubset FeatureSubset::all(std::size_t dim, std::string source_label) {
    std::vector<std::size_t> cols(dim);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return FeatureSubset(std::move(cols), dim, std::move(source_label));
}

nlohmann::json subset_to_json(const FeatureSubset& subset) {
    return {{"columns", subset.columns()}, {"source_label", subset.source_label()}};
}

FeatureSubset subset_from_json(const nlohmann::json& j, std::size_t dim) {
    try {
        return FeatureSubset(j.at("columns").get<std::vector<std::size_t>>(), dim,
                             j.value("source_label", std::string()));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("feature subset JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------------------

CompositionFeaturizer::CompositionFeaturizer(const std::vector<std::string>& elements, const EmbeddingTable& table,
                                             const std::optional<FeatureSubset>& subset)
    : elements_(elements) {
    if (subset) {
        if (!subset->columns().empty() && subset->columns().back() >= table.dim())
            throw InvalidArgument("featurizer: subset column out of range for the table");
        column_ids_ = subset->columns();
    } else {
        column_ids_.resize(table.dim());
        std::iota(column_ids_.begin(), column_ids_.end(), std::size_t{0});
    }
    const auto n = static_cast<Eigen::Index>(elements.size());
    const auto k = static_cast<Eigen::Index>(column_ids_.size());
    weights_ = Eigen::MatrixXd::Zero(n, k);
    present_.assign(elements.size(), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = table.index_of(elements[static_cast<std::size_t>(i)]);
        if (!row) continue;
        present_[static_cast<std::size_t>(i)] = true;
        for (Eigen::Index j = 0; j < k; ++j)
            weights_(i, j) = table.values()(static_cast<Eigen::Index>(*row),
                                            static_cast<Eigen::Index>(column_ids_[static_cast<std::size_t>(j)]));
    }
}

void CompositionFeaturizer::check_support(std::span<const double> fractions) const {
    if (fractions.size() != elements_.size()) throw InvalidArgument("featurizer: composition has the wrong length");
    for (std::size_t i = 0; i < fractions.size(); ++i)
        if (fractions[i] != 0.0 && !present_[i])
            throw InvalidArgument("element '" + elements_[i] + "' is missing from the embedding table");
}

Eigen::VectorXd CompositionFeaturizer::operator()(std::span<const double> fractions) const {
    check_support(fractions);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(weights_.cols());
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (fractions[i] == 0.0) continue;
        out += fractions[i] * weights_.row(static_cast<Eigen::Index>(i)).transpose();
    }
    return out;
}

Eigen::MatrixXd CompositionFeaturizer::transform(const Eigen::MatrixXd& fractions) const {
    if (fractions.cols() != weights_.rows()) throw InvalidArgument("featurizer: fraction matrix has the wrong width");
    Eigen::MatrixXd out(fractions.rows(), weights_.cols());
    std::vector<double> row(static_cast<std::size_t>(fractions.cols()));
    for (Eigen::Index r = 0; r < fractions.rows(); ++r) {
        for (Eigen::Index c = 0; c < fractions.cols(); ++c) row[static_cast<std::size_t>(c)] = fractions(r, c);
        out.row(r) = (*this)(row).transpose();
    }
    return out;
}

FeatureVector mole_average(const Composition& c, const EmbeddingTable& table,
                           const std::optional<FeatureSubset>& subset) {
    CompositionFeaturizer featurizer(c.elements(), table, subset);
    const Eigen::VectorXd v = featurizer(c.fractions());
    return FeatureVector{std::vector<double>(v.data(), v.data() + v.size()), featurizer.column_ids()};
}

Eigen::MatrixXd fraction_matrix(const Dataset& ds) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.elements().size()));
    for (std::size_t r = 0; r < ds.size(); ++r)
        for (std::size_t c = 0; c < ds.elements().size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds.rows()[r].fractions[c];
    return out;
}

FeatureMatrix featurize_dataset(const Dataset& ds, const EmbeddingTable& table,
                                const std::optional<FeatureSubset>& subset) {
    CompositionFeaturizer featurizer(ds.elements(), table, subset);
    return FeatureMatrix{featurizer.transform(fraction_matrix(ds)), featurizer.column_ids()};
}

Eigen::VectorXd property_targets(const Dataset& ds, const std::string& name) {
    const auto column = ds.property(name);
    return Eigen::Map<const Eigen::VectorXd>(column.data(), static_cast<Eigen::Index>(column.size()));
}

std::vector<std::string> class_targets(const Dataset& ds) {
    if (!ds.has_class()) throw InvalidArgument("dataset has no class column");
    return ds.labels();
}

}  // namespace alloyopt
