#include "alloyopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alloyopt/error.hpp"
#include "alloyopt/text_io.hpp"

namespace alloyopt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> default_labels(Eigen::Index n, const std::string& prefix) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace

std::string SimilarityMatrix::to_csv() const {
    std::string out;
    for (const auto& c : col_labels) out += "," + c;
    out += '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out += row_labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            out += ',';
            out += std::isnan(values(i, j)) ? std::string("nan") : io::format_double(values(i, j));
        }
        out += '\n';
    }
    return out;
}

SimilarityMatrix pearson_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::vector<std::string> a_labels,
                                std::vector<std::string> b_labels) {
    if (a.rows() != b.rows())
        throw InvalidArgument("pearson_matrix: inputs have " + std::to_string(a.rows()) + " and " +
                              std::to_string(b.rows()) + " rows");
    if (a.rows() < 2) throw InvalidArgument("pearson_matrix: at least two rows required");
    if (a_labels.empty()) a_labels = default_labels(a.cols(), "a");
    if (b_labels.empty()) b_labels = default_labels(b.cols(), "b");
    if (static_cast<Eigen::Index>(a_labels.size()) != a.cols() || static_cast<Eigen::Index>(b_labels.size()) != b.cols())
        throw InvalidArgument("pearson_matrix: label count does not match column count");

    SimilarityMatrix out{std::move(a_labels), std::move(b_labels), Eigen::MatrixXd(a.cols(), b.cols()), {}};
    const Eigen::MatrixXd ca = a.rowwise() - a.colwise().mean();
    const Eigen::MatrixXd cb = b.rowwise() - b.colwise().mean();
    const Eigen::VectorXd na = ca.colwise().norm().transpose();
    const Eigen::VectorXd nb = cb.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        if (na(i) == 0.0) out.warnings.push_back("zero-variance column " + out.row_labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        if (nb(j) == 0.0) out.warnings.push_back("zero-variance column " + out.col_labels[static_cast<std::size_t>(j)]);

    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            if (na(i) == 0.0 || nb(j) == 0.0) {
                out.values(i, j) = kNaN;
                continue;
            }
            out.values(i, j) = std::clamp(ca.col(i).dot(cb.col(j)) / (na(i) * nb(j)), -1.0, 1.0);
        }
    }
    return out;
}

SimilarityMatrix pearson_matrix(const EmbeddingTable& a, const EmbeddingTable& b) {
    if (a.elements() != b.elements())
        throw InvalidArgument("pearson_matrix: tables must list the same elements in the same order");
    auto labels = [](const EmbeddingTable& t) {
        std::vector<std::string> out;
        const std::string prefix = t.source_label().empty() ? "e" : t.source_label() + ":e";
        for (std::size_t j = 0; j < t.dim(); ++j) out.push_back(prefix + std::to_string(j));
        return out;
    };
    return pearson_matrix(a.values(), b.values(), labels(a), labels(b));
}

SimilarityMatrix cosine_similarity_matrix(const EmbeddingTable& table) {
    const Eigen::MatrixXd& v = table.values();
    const Eigen::VectorXd norms = v.rowwise().norm();
    SimilarityMatrix out{table.elements(), table.elements(), Eigen::MatrixXd(v.rows(), v.rows()), {}};
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        if (norms(i) == 0.0) out.warnings.push_back("zero-norm row " + table.elements()[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double s = kNaN;
            if (norms(i) > 0.0 && norms(j) > 0.0)
                s = i == j ? 1.0 : std::clamp(v.row(i).dot(v.row(j)) / (norms(i) * norms(j)), -1.0, 1.0);
            out.values(i, j) = out.values(j, i) = s;
        }
    }
    return out;
}

}  // namespace alloyopt
