#include "alloyopt/gpr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "alloyopt/error.hpp"
#include "alloyopt/random.hpp"

namespace alloyopt {
namespace {

constexpr double kFirstJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd d2(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) d2.row(i) = (B.rowwise() - A.row(i)).rowwise().squaredNorm().transpose();
    return d2;
}

Eigen::MatrixXd exact_self_distances(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) d2(i, j) = d2(j, i) = (X.row(i) - X.row(j)).squaredNorm();
    }
    return d2;
}

struct Factorization {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

/// Cholesky of K + (noise + jitter) I, escalating jitter 1e-10, 1e-9, ..., 1e-4.
std::optional<Factorization> factorize(const Eigen::MatrixXd& K, double noise) {
    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += noise + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd L = llt.matrixL();
            const auto diag = L.diagonal();
            if (diag.allFinite() && (diag.array() > 0.0).all()) return Factorization{std::move(L), jitter};
        }
        if (jitter >= kMaxJitter) return std::nullopt;
        jitter = jitter == 0.0 ? kFirstJitter : jitter * 10.0;
    }
}

double lml_from(const Factorization& f, const Eigen::VectorXd& y) {
    const Eigen::VectorXd z = f.lower.triangularView<Eigen::Lower>().solve(y);
    const double log_det = 2.0 * f.lower.diagonal().array().log().sum();
    return -0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

double lml_with_distances(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y, const KernelConfig& k) {
    const Eigen::MatrixXd K = k.signal_variance * (-d2.array() / (2.0 * k.length_scale * k.length_scale)).exp();
    const auto f = factorize(K, k.noise_variance);
    if (!f) return -std::numeric_limits<double>::infinity();
    return lml_from(*f, y);
}

void column_stats(const Eigen::MatrixXd& X, Eigen::RowVectorXd& mean, Eigen::RowVectorXd& scale) {
    mean = X.colwise().mean();
    scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - mean(j)).square().mean();
        const double sd = std::sqrt(var);
        scale(j) = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    }
}

}  // namespace

void validate(const KernelConfig& k) {
    if (!(std::isfinite(k.signal_variance) && k.signal_variance > 0.0))
        throw InvalidArgument("kernel: signal variance must be positive and finite");
    if (!(std::isfinite(k.length_scale) && k.length_scale > 0.0))
        throw InvalidArgument("kernel: length scale must be positive and finite");
    if (!(std::isfinite(k.noise_variance) && k.noise_variance >= 0.0))
        throw InvalidArgument("kernel: noise variance must be non-negative and finite");
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_variance,
                           double length_scale) {
    return signal_variance * (-squared_distances(A, B).array() / (2.0 * length_scale * length_scale)).exp();
}

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel) {
    validate(kernel);
    return lml_with_distances(exact_self_distances(X), y, kernel);
}

GprModel GprModel::prior(Eigen::Index input_dim, const KernelConfig& kernel, double prior_mean) {
    validate(kernel);
    GprModel m;
    m.kernel_ = kernel;
    m.input_dim_ = input_dim;
    m.X_.resize(0, input_dim);
    m.alpha_.resize(0);
    m.chol_.resize(0, 0);
    m.x_mean_ = Eigen::RowVectorXd::Zero(input_dim);
    m.x_scale_ = Eigen::RowVectorXd::Ones(input_dim);
    m.y_mean_ = prior_mean;
    return m;
}

GprModel GprModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
                       Options options) {
    validate(kernel);
    if (X.rows() < 1) throw InvalidArgument("gpr_fit: at least one training row required");
    if (X.rows() != y.size()) throw InvalidArgument("gpr_fit: X and y have different lengths");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("gpr_fit: non-finite training data");

    GprModel m;
    m.kernel_ = kernel;
    m.input_dim_ = X.cols();
    if (options.standardize) {
        column_stats(X, m.x_mean_, m.x_scale_);
        m.y_mean_ = y.mean();
        const double sd = std::sqrt((y.array() - m.y_mean_).square().mean());
        m.y_scale_ = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    } else {
        m.x_mean_ = Eigen::RowVectorXd::Zero(X.cols());
        m.x_scale_ = Eigen::RowVectorXd::Ones(X.cols());
    }
    m.X_ = m.standardize_inputs(X);
    const Eigen::VectorXd ys = (y.array() - m.y_mean_) / m.y_scale_;

    const Eigen::MatrixXd K =
        kernel.signal_variance * (-exact_self_distances(m.X_).array() / (2.0 * kernel.length_scale * kernel.length_scale)).exp();
    auto f = factorize(K, kernel.noise_variance);
    if (!f)
        throw NotPositiveDefinite("gpr_fit: kernel matrix is not positive definite even with jitter " +
                                  std::to_string(kMaxJitter));
    m.chol_ = std::move(f->lower);
    m.jitter_ = f->jitter;
    const Eigen::VectorXd z = m.chol_.triangularView<Eigen::Lower>().solve(ys);
    m.alpha_ = m.chol_.transpose().triangularView<Eigen::Upper>().solve(z);
    if (!m.alpha_.allFinite()) throw NotPositiveDefinite("gpr_fit: factorization produced non-finite weights");
    m.lml_ = lml_from(Factorization{m.chol_, m.jitter_}, ys);
    return m;
}

GprModel GprModel::fit_auto(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const HyperparameterSearch& search,
                            const KernelConfig& initial, Options options) {
    validate(initial);
    if (X.rows() < 1) throw InvalidArgument("gpr_fit: at least one training row required");
    if (X.rows() != y.size()) throw InvalidArgument("gpr_fit: X and y have different lengths");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("gpr_fit: non-finite training data");

    // Same preprocessing as fit(), so the objective matches the model it produces.
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.cols()), scale = Eigen::RowVectorXd::Ones(X.cols());
    double y_mean = 0.0, y_scale = 1.0;
    if (options.standardize) {
        column_stats(X, mean, scale);
        y_mean = y.mean();
        const double sd = std::sqrt((y.array() - y_mean).square().mean());
        y_scale = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    }
    const Eigen::MatrixXd Xs = (X.rowwise() - mean).array().rowwise() / scale.array();
    const Eigen::VectorXd ys = (y.array() - y_mean) / y_scale;
    const Eigen::MatrixXd d2 = exact_self_distances(Xs);

    const std::array<double, 3> lo{search.min_log_signal, search.min_log_length, search.min_log_noise};
    const std::array<double, 3> hi{search.max_log_signal, search.max_log_length, search.max_log_noise};
    auto to_kernel = [](const std::array<double, 3>& t) {
        return KernelConfig{std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
    };
    auto objective = [&](const std::array<double, 3>& t) { return lml_with_distances(d2, ys, to_kernel(t)); };

    Rng rng(derive_seed(search.seed, {0x6B7ULL}));
    const std::array<double, 3> initial_theta{
        std::log(initial.signal_variance), std::log(initial.length_scale),
        std::log(std::max(initial.noise_variance, std::exp(search.min_log_noise)))};
    // Start 0 is the caller's kernel as given (noise may be below the search floor).
    double best = lml_with_distances(d2, ys, initial);
    KernelConfig best_kernel = initial;

    for (int s = 0; s < std::max(search.starts, 1); ++s) {
        std::array<double, 3> theta = initial_theta;
        if (s == 0) {
            for (int d = 0; d < 3; ++d) theta[d] = std::clamp(theta[d], lo[d], hi[d]);
        } else {
            for (int d = 0; d < 3; ++d) theta[d] = lo[d] + (hi[d] - lo[d]) * uniform01(rng);
        }
        double value = objective(theta);
        int evals = 1;
        double step = 1.0;
        while (step >= search.tolerance && evals < search.max_evaluations) {
            bool improved = false;
            for (int d = 0; d < 3 && evals < search.max_evaluations; ++d) {
                for (double dir : {1.0, -1.0}) {
                    if (evals >= search.max_evaluations) break;
                    auto trial = theta;
                    trial[d] = std::clamp(theta[d] + dir * step, lo[d], hi[d]);
                    if (trial[d] == theta[d]) continue;
                    const double v = objective(trial);
                    ++evals;
                    if (v > value) {
                        value = v;
                        theta = trial;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (value > best) {
            best = value;
            best_kernel = to_kernel(theta);
        }
    }
    return fit(X, y, best_kernel, options);
}

Eigen::MatrixXd GprModel::standardize_inputs(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - x_mean_).array().rowwise() / x_scale_.array();
}

GprPrediction GprModel::predict(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != input_dim_)
        throw InvalidArgument("gpr_predict: query has " + std::to_string(Xq.cols()) + " columns, model expects " +
                              std::to_string(input_dim_));
    const Eigen::Index m = Xq.rows();
    GprPrediction out;
    if (X_.rows() == 0) {
        out.mean = Eigen::VectorXd::Constant(m, y_mean_);
        out.stddev = Eigen::VectorXd::Constant(m, std::sqrt(kernel_.signal_variance) * y_scale_);
        return out;
    }
    const Eigen::MatrixXd Ks = rbf_kernel(standardize_inputs(Xq), X_, kernel_.signal_variance, kernel_.length_scale);
    const Eigen::VectorXd mean_s = Ks * alpha_;
    const Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Ks.transpose());
    const Eigen::VectorXd var_s = (kernel_.signal_variance - V.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
    out.mean = mean_s.array() * y_scale_ + y_mean_;
    out.stddev = var_s.array().sqrt() * y_scale_;
    return out;
}

}  // namespace alloyopt
