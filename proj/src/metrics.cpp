#include "alloyopt/metrics.hpp"

#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "alloyopt/error.hpp"

namespace alloyopt {

double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw InvalidArgument("mae: length mismatch");
    if (pred.empty()) throw InvalidArgument("mae: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
    return sum / static_cast<double>(pred.size());
}

std::map<std::string, ClassCounts> count_classes(std::span<const std::string> pred,
                                                 std::span<const std::string> truth) {
    if (pred.size() != truth.size()) throw InvalidArgument("f1: length mismatch");
    std::map<std::string, ClassCounts> counts;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) {
            ++counts[truth[i]].tp;
        } else {
            ++counts[pred[i]].fp;
            ++counts[truth[i]].fn;
        }
    }
    return counts;
}

double f1_from_counts(const ClassCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * (precision * recall) / (precision + recall);
}

double f1_binary(std::span<const std::string> pred, std::span<const std::string> truth,
                 const std::string& positive_class) {
    const auto counts = count_classes(pred, truth);
    const auto it = counts.find(positive_class);
    return it == counts.end() ? 0.0 : f1_from_counts(it->second);
}

double f1_weighted(std::span<const std::string> pred, std::span<const std::string> truth) {
    if (truth.empty()) throw InvalidArgument("f1_weighted: empty input");
    const auto counts = count_classes(pred, truth);
    double total = 0.0;
    for (const auto& [label, c] : counts) total += static_cast<double>(c.support());
    double score = 0.0;
    for (const auto& [label, c] : counts) score += (static_cast<double>(c.support()) / total) * f1_from_counts(c);
    return score;
}

double mean_of(std::span<const double> v) {
    if (v.empty()) throw InvalidArgument("mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

double sample_stddev_of(std::span<const double> v) {
    if (v.size() < 2) throw InvalidArgument("sample standard deviation needs at least two values");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch_t_test: each sample needs at least two values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = std::pow(sample_stddev_of(a), 2) / na;
    const double vb = std::pow(sample_stddev_of(b), 2) / nb;
    const double diff = mean_of(a) - mean_of(b);
    WelchResult r;
    const double se2 = va + vb;
    if (se2 == 0.0) {
        r.t_statistic = diff > 0 ? INFINITY : diff < 0 ? -INFINITY : 0.0;
        r.dof = na + nb - 2.0;
        r.p_greater = diff > 0 ? 0.0 : diff < 0 ? 1.0 : 0.5;
        r.p_two_sided = diff != 0 ? 0.0 : 1.0;
        return r;
    }
    r.t_statistic = diff / std::sqrt(se2);
    r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t dist(r.dof);
    r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t_statistic));
    r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic)));
    return r;
}

}  // namespace alloyopt
