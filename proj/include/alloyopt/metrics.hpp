#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace alloyopt {

double mae(std::span<const double> pred, std::span<const double> truth);

struct ClassCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
    std::size_t support() const noexcept { return tp + fn; }
};

/// One-vs-rest counts for every label seen in either vector, keyed in sort order.
std::map<std::string, ClassCounts> count_classes(std::span<const std::string> pred,
                                                 std::span<const std::string> truth);

/// F1 from counts: 2PR/(P+R) with P = TP/(TP+FP), R = TP/(TP+FN). Any undefined
/// ratio makes the score 0.
double f1_from_counts(const ClassCounts& counts);

/// One-vs-rest F1 of `positive_class`.
double f1_binary(std::span<const std::string> pred, std::span<const std::string> truth,
                 const std::string& positive_class);

/// Support-weighted mean of per-class F1.
double f1_weighted(std::span<const std::string> pred, std::span<const std::string> truth);

struct WelchResult {
    double t_statistic = 0.0;
    double dof = 0.0;
    double p_greater = 1.0;  // one-sided, alternative mean(a) > mean(b)
    double p_two_sided = 1.0;
};

/// Unequal-variance t-test between two samples (each needs at least two values).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

double mean_of(std::span<const double> v);
/// Population standard deviation.
double stddev_of(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double sample_stddev_of(std::span<const double> v);

}  // namespace alloyopt
