#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "billiard/errors.hpp"

namespace billiard::stats {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw InputError("mean of empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw InputError("variance needs at least two values");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

/// Sample variance with its standard error sqrt((m4 - s^4) / N).
inline MeanSe variance_with_se(std::span<const double> xs) {
    const double m = mean(xs);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    const auto n = static_cast<double>(xs.size());
    m2 /= n;
    m4 /= n;
    return {m2 * n / (n - 1.0), std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

/// Batch-means estimate of a long-run average and its standard error.
inline MeanSe batch_means(std::span<const double> xs, std::size_t batches = 50) {
    if (xs.empty()) throw InputError("batch_means: empty sample");
    batches = std::clamp<std::size_t>(batches, 1, xs.size());
    const std::size_t size = xs.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b)
        means.push_back(mean(xs.subspan(b * size, size)));
    MeanSe out{mean(xs), 0.0};
    if (batches > 1) out.se = std::sqrt(variance(means) / static_cast<double>(batches));
    return out;
}

/// Empirical p-quantile (lower order statistic) of a sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InputError("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size());
    auto k = static_cast<std::size_t>(std::ceil(pos));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

/// Distribution-free ~95% interval for the p-quantile from binomial order statistics.
inline std::pair<double, double> quantile_ci(std::span<const double> sorted, double p, double z = 1.959963984540054) {
    const auto n = static_cast<double>(sorted.size());
    const double half = z * std::sqrt(n * p * (1.0 - p));
    const auto idx = [&](double pos) {
        const auto k = static_cast<long long>(std::floor(pos));
        return static_cast<std::size_t>(std::clamp<long long>(k, 1, static_cast<long long>(sorted.size())) - 1);
    };
    return {sorted[idx(n * p - half)], sorted[idx(std::ceil(n * p + half))]};
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw InputError("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

struct ChiSquare {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 0.0;
};

/// Pearson goodness-of-fit test of counts against cell probabilities.
inline ChiSquare chi_square_test(std::span<const double> counts, std::span<const double> probs) {
    if (counts.size() != probs.size() || counts.size() < 2) throw InputError("chi_square_test: size mismatch");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    ChiSquare out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = total * probs[i];
        if (!(expected > 0.0)) throw InputError("chi_square_test: empty expected cell");
        out.statistic += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    out.dof = static_cast<double>(counts.size() - 1);
    out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.statistic));
    return out;
}

/// Least-squares slope of y against x.
inline double slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("slope: need matching samples of size >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace billiard::stats
