#pragma once

#include <cstdint>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace alloyopt {

/// Isotropic squared-exponential kernel k(x, x') = s2 * exp(-|x - x'|^2 / (2 l^2)),
/// plus observation noise on the diagonal.
struct KernelConfig {
    double signal_variance = 1.0;
    double length_scale = 1.0;
    double noise_variance = 1e-6;
};

void validate(const KernelConfig& kernel);

/// Options for maximizing the log marginal likelihood over (log s2, log l, log sn2).
/// Start 0 is the supplied kernel; the rest are seeded draws inside the bounds.
struct HyperparameterSearch {
    int starts = 5;
    int max_evaluations = 200;  // per start
    double tolerance = 1e-6;    // on the coordinate step in log space
    std::uint64_t seed = 0;
    double min_log_signal = -4.6, max_log_signal = 4.6;
    double min_log_length = -4.6, max_log_length = 4.6;
    double min_log_noise = -18.4, max_log_noise = 0.0;
};

struct GprPrediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

struct GprOptions {
    bool standardize = true;
};

/// Gaussian-process regressor with zero prior mean in standardized target space.
///
/// Features and targets are standardized with training statistics (population std;
/// a zero std is replaced by one). Predictions are returned in original target units.
class GprModel {
public:
    using Options = GprOptions;

    /// Model with no observations: mean equals `prior_mean`, std equals sqrt(s2).
    static GprModel prior(Eigen::Index input_dim, const KernelConfig& kernel, double prior_mean = 0.0);

    static GprModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
                        Options options = {});

    /// Fits with hyperparameters maximizing the log marginal likelihood.
    static GprModel fit_auto(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const HyperparameterSearch& search,
                             const KernelConfig& initial = {}, Options options = {});

    GprPrediction predict(const Eigen::MatrixXd& Xq) const;

    const KernelConfig& kernel() const noexcept { return kernel_; }
    /// Diagonal jitter that was added on top of the noise variance to obtain a factorization.
    double jitter() const noexcept { return jitter_; }
    Eigen::Index n_train() const noexcept { return X_.rows(); }
    Eigen::Index input_dim() const noexcept { return input_dim_; }
    const Eigen::MatrixXd& lower_cholesky() const noexcept { return chol_; }
    /// Log marginal likelihood of the standardized targets.
    double log_marginal_likelihood() const noexcept { return lml_; }

private:
    GprModel() = default;
    Eigen::MatrixXd standardize_inputs(const Eigen::MatrixXd& X) const;

    KernelConfig kernel_;
    Eigen::Index input_dim_ = 0;
    Eigen::MatrixXd X_;  // standardized
    Eigen::VectorXd alpha_;
    Eigen::MatrixXd chol_;
    Eigen::RowVectorXd x_mean_, x_scale_;
    double y_mean_ = 0.0, y_scale_ = 1.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

/// Log marginal likelihood of already-standardized data under `kernel`; -inf if the
/// kernel matrix cannot be factorized.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel);

/// Squared-exponential covariance between the rows of A and B.
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_variance,
                           double length_scale);

}  // namespace alloyopt
