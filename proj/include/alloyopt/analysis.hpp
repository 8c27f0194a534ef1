#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "alloyopt/element_data.hpp"

namespace alloyopt {

/// Labeled matrix of correlations or similarities. Undefined cells (zero-variance column,
/// zero-norm row) hold NaN and have a matching entry in `warnings`.
struct SimilarityMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd values;
    std::vector<std::string> warnings;

    std::string to_csv() const;
};

/// Entry (i, j) is the Pearson correlation of column i of `a` with column j of `b`,
/// taken over the shared rows.
SimilarityMatrix pearson_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                std::vector<std::string> a_labels = {}, std::vector<std::string> b_labels = {});

/// Pearson correlation between the descriptor columns of two tables over the same elements.
SimilarityMatrix pearson_matrix(const EmbeddingTable& a, const EmbeddingTable& b);

/// Cosine similarity between the element rows of `table`.
SimilarityMatrix cosine_similarity_matrix(const EmbeddingTable& table);

}  // namespace alloyopt
