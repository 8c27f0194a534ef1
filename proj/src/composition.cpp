#include "alloyopt/composition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alloyopt/error.hpp"

namespace alloyopt {
namespace {

constexpr double kProjectionTolerance = 1e-12;
constexpr int kProjectionPasses = 100;

void check_fractions(const std::vector<double>& fractions) {
    for (double f : fractions) {
        if (!std::isfinite(f)) throw InvalidArgument("composition: non-finite fraction");
        if (f < 0.0) throw InvalidArgument("composition: negative fraction");
        if (f > 1.0 + kSimplexTolerance) throw InvalidArgument("composition: fraction greater than 1");
    }
}

}  // namespace

Composition::Composition(std::vector<std::string> elements, std::vector<double> fractions)
    : elements_(std::move(elements)), fractions_(std::move(fractions)) {
    if (elements_.size() != fractions_.size())
        throw InvalidArgument("composition: element and fraction counts differ");
    if (elements_.empty()) throw InvalidArgument("composition: empty element list");
    check_fractions(fractions_);
    const double sum = std::accumulate(fractions_.begin(), fractions_.end(), 0.0);
    if (std::abs(sum - 1.0) > kSimplexTolerance)
        throw InvalidArgument("composition: fractions sum to " + std::to_string(sum) + ", not 1");
    rescale_to_unit_sum(fractions_);
}

void rescale_to_unit_sum(std::span<double> fractions) {
    for (int pass = 0; pass < 8; ++pass) {
        const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
        if (sum == 1.0 || !(sum > 0.0)) return;
        bool changed = false;
        for (double& f : fractions) {
            const double g = std::min(1.0, f / sum);
            changed |= g != f;
            f = g;
        }
        if (!changed) return;
    }
}

Composition make_composition(std::vector<std::string> elements, std::vector<double> fractions, bool normalize) {
    if (elements.size() != fractions.size()) throw InvalidArgument("composition: element and fraction counts differ");
    if (normalize) {
        for (double f : fractions)
            if (!std::isfinite(f) || f < 0.0) throw InvalidArgument("composition: fractions must be finite and non-negative");
        const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
        if (!(sum > 0.0)) throw InvalidArgument("composition: cannot normalize all-zero fractions");
        for (double& f : fractions) f /= sum;
    }
    return Composition(std::move(elements), std::move(fractions));
}

// ---------------------------------------------------------------------------------------

CompositionSpace::CompositionSpace(std::vector<std::string> elements, std::vector<double> lower,
                                   std::vector<double> upper)
    : elements_(std::move(elements)), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (elements_.empty()) throw InvalidArgument("composition space: empty element list");
    if (lower_.size() != elements_.size() || upper_.size() != elements_.size())
        throw InvalidArgument("composition space: bound vectors must match the element list");
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (!(lower_[i] >= 0.0 && lower_[i] <= upper_[i] && upper_[i] <= 1.0))
            throw InvalidArgument("composition space: bounds for " + elements_[i] + " must satisfy 0 <= lower <= upper <= 1");
        lo += lower_[i];
        hi += upper_[i];
    }
    if (lo > 1.0 + kSimplexTolerance || hi < 1.0 - kSimplexTolerance)
        throw InfeasibleSpace("composition space: bounds exclude every point of the simplex");
}

CompositionSpace CompositionSpace::unbounded(std::vector<std::string> elements) {
    const auto n = elements.size();
    return CompositionSpace(std::move(elements), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
}

bool CompositionSpace::contains(std::span<const double> fractions, double tol) const {
    if (fractions.size() != elements_.size()) return false;
    double sum = 0.0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] >= lower_[i] - tol && fractions[i] <= upper_[i] + tol)) return false;
        sum += fractions[i];
    }
    return std::abs(sum - 1.0) <= tol;
}

std::vector<double> CompositionSpace::project(std::span<const double> point) const {
    const std::size_t n = elements_.size();
    if (point.size() != n) throw InvalidArgument("project: dimension mismatch");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::isfinite(point[i]) ? point[i] : lower_[i];
        x[i] = std::clamp(v, lower_[i], upper_[i]);
    }
    for (int pass = 0; pass < kProjectionPasses; ++pass) {
        const double residual = 1.0 - std::accumulate(x.begin(), x.end(), 0.0);
        if (std::abs(residual) <= kProjectionTolerance) break;
        double room = 0.0;
        for (std::size_t i = 0; i < n; ++i) room += residual > 0 ? upper_[i] - x[i] : x[i] - lower_[i];
        if (!(room > 0.0)) break;
        const double scale = std::min(1.0, std::abs(residual) / room);
        for (std::size_t i = 0; i < n; ++i) {
            if (residual > 0)
                x[i] += scale * (upper_[i] - x[i]);
            else
                x[i] -= scale * (x[i] - lower_[i]);
            x[i] = std::clamp(x[i], lower_[i], upper_[i]);
        }
    }
    return x;
}

std::vector<double> CompositionSpace::sample(Rng& rng) const {
    std::vector<double> g(elements_.size());
    double sum = 0.0;
    for (double& v : g) {
        double u;
        do {
            u = uniform01(rng);
        } while (u <= 0.0);
        v = -std::log(u);
        sum += v;
    }
    for (double& v : g) v /= sum;
    return project(g);
}

std::vector<Composition> sample_random_compositions(const CompositionSpace& space, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Composition> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(space.elements(), space.sample(rng));
    return out;
}

}  // namespace alloyopt
