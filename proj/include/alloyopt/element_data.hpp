#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace alloyopt {

/// True if `symbol` is one of the 118 IUPAC element symbols.
bool is_element_symbol(std::string_view symbol);

/// Per-element descriptor vectors, one row per element. Immutable once built.
///
/// Rows keep the exact cell text they were loaded from so that writing a loaded
/// table back out reproduces the source file.
class EmbeddingTable {
public:
    EmbeddingTable(std::vector<std::string> elements, Eigen::MatrixXd values, std::string source_label = {});

    const std::vector<std::string>& elements() const noexcept { return elements_; }
    std::size_t size() const noexcept { return elements_.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::string& source_label() const noexcept { return source_label_; }

    std::optional<std::size_t> index_of(std::string_view symbol) const;
    Eigen::VectorXd row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Serialized form in the embedding-table CSV format.
    std::string to_csv() const;

private:
    friend EmbeddingTable load_embedding_table(const std::filesystem::path&, std::string);

    std::vector<std::string> elements_;
    Eigen::MatrixXd values_;
    std::string source_label_;
    std::vector<std::string> cell_text_;  // row-major, empty unless loaded from disk
};

/// Loads `element,e0,...,e{D-1}` CSV. `source_label` defaults to the file stem.
EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::string source_label = {});
void write_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table);

struct DatasetRow {
    std::vector<double> fractions;
    std::vector<double> properties;  // aligned with Dataset::property_names()
    std::optional<std::string> label;
};

/// Compositions with measured (or simulated) properties and an optional class label.
class Dataset {
public:
    Dataset(std::vector<std::string> elements, std::vector<std::string> property_names, std::vector<DatasetRow> rows,
            bool has_class = false);

    const std::vector<std::string>& elements() const noexcept { return elements_; }
    const std::vector<std::string>& property_names() const noexcept { return property_names_; }
    const std::vector<DatasetRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool has_class() const noexcept { return has_class_; }

    std::optional<std::size_t> property_index(std::string_view name) const;
    /// Column of property `name`; throws InvalidArgument if unknown.
    std::vector<double> property(std::string_view name) const;
    /// Class labels; rows without a label yield an empty string.
    std::vector<std::string> labels() const;

    Dataset subset(std::span<const std::size_t> row_indices) const;
    std::string to_csv() const;

private:
    std::vector<std::string> elements_;
    std::vector<std::string> property_names_;
    std::vector<DatasetRow> rows_;
    bool has_class_;
};

Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::vector<std::string>> expected_elements = std::nullopt);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace alloyopt
