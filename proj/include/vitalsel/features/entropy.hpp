#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

namespace detail {
    inline double population_std(std::span<const double> x)
    {
        if (x.empty()) {
            return 0.0;
        }
        double mean = 0.0;
        for (double v : x) {
            mean += v;
        }
        mean /= static_cast<double>(x.size());
        double s = 0.0;
        for (double v : x) {
            s += (v - mean) * (v - mean);
        }
        return std::sqrt(s / static_cast<double>(x.size()));
    }

    inline bool templates_match(std::span<const double> x, std::size_t i, std::size_t j, int len, double r)
    {
        for (int k = 0; k < len; ++k) {
            if (std::abs(x[i + k] - x[j + k]) > r) {
                return false;
            }
        }
        return true;
    }

    inline double apen_phi(std::span<const double> x, int m, double r)
    {
        const std::size_t count = x.size() - static_cast<std::size_t>(m) + 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < count; ++j) {
                if (templates_match(x, i, j, m, r)) {
                    ++c;
                }
            }
            acc += std::log(static_cast<double>(c) / static_cast<double>(count));
        }
        return acc / static_cast<double>(count);
    }
} // namespace detail

// Ordinal-pattern entropy. Ties are ranked by position (earlier sample ranks lower).
inline double permutation_entropy(std::span<const double> x, int order = 3, int delay = 1, bool normalized = true)
{
    require(order >= 2 && delay >= 1, "permutation_entropy: order >= 2 and delay >= 1 required");
    const std::size_t span_len = static_cast<std::size_t>(order - 1) * static_cast<std::size_t>(delay);
    require(x.size() > static_cast<std::size_t>(order) * static_cast<std::size_t>(delay),
            "permutation_entropy: input shorter than order*delay");

    // Patterns are keyed by their rank sequence read as a base-`order` number.
    std::map<long long, std::size_t> counts;
    std::vector<int> pattern(static_cast<std::size_t>(order));
    const std::size_t total = x.size() - span_len;
    for (std::size_t i = 0; i < total; ++i) {
        std::iota(pattern.begin(), pattern.end(), 0);
        std::stable_sort(pattern.begin(), pattern.end(), [&](int a, int b) {
            return x[i + static_cast<std::size_t>(a * delay)] < x[i + static_cast<std::size_t>(b * delay)];
        });
        long long key = 0;
        for (int v : pattern) {
            key = key * order + v;
        }
        ++counts[key];
    }
    double h = 0.0;
    for (const auto& [pat, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    if (normalized) {
        double fact = 1.0;
        for (int k = 2; k <= order; ++k) {
            fact *= k;
        }
        h /= std::log(fact);
    }
    return h;
}

// Approximate entropy with Chebyshev distance, self-matches included, r = r_factor * std(x).
inline double approx_entropy(std::span<const double> x, int m = 2, double r_factor = 0.2)
{
    require(m >= 1, "approx_entropy: m must be >= 1");
    require(x.size() >= static_cast<std::size_t>(m) + 2, "approx_entropy: need at least m+2 samples");
    const double r = r_factor * detail::population_std(x);
    return detail::apen_phi(x, m, r) - detail::apen_phi(x, m + 1, r);
}

// Sample entropy: -ln(A/B) over the first N-m templates, self-matches excluded.
// No matches of length m+1 (or m) gives +infinity.
inline double sample_entropy(std::span<const double> x, int m = 2, double r_factor = 0.2)
{
    require(m >= 1, "sample_entropy: m must be >= 1");
    require(x.size() >= static_cast<std::size_t>(m) + 2, "sample_entropy: need at least m+2 samples");
    const double r = r_factor * detail::population_std(x);
    const std::size_t templates = x.size() - static_cast<std::size_t>(m);
    std::size_t b = 0;
    std::size_t a = 0;
    for (std::size_t i = 0; i < templates; ++i) {
        for (std::size_t j = i + 1; j < templates; ++j) {
            if (detail::templates_match(x, i, j, m, r)) {
                ++b;
                if (std::abs(x[i + m] - x[j + m]) <= r) {
                    ++a;
                }
            }
        }
    }
    if (a == 0 || b == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

// Shannon entropy of an equal-width amplitude histogram, normalized by log(bins).
inline double histogram_entropy(std::span<const double> x, int bins = 16)
{
    require(bins >= 2, "histogram_entropy: need at least 2 bins");
    if (x.empty()) {
        return 0.0;
    }
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        return 0.0;
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
        counts[std::min(b, counts.size() - 1)]++;
    }
    double h = 0.0;
    for (auto c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / static_cast<double>(x.size());
            h -= p * std::log(p);
        }
    }
    return h / std::log(static_cast<double>(bins));
}

// Entropy of the normalized singular spectrum of the delay-embedding matrix,
// normalized by log(order).
inline double svd_entropy(std::span<const double> x, int order = 3, int delay = 1)
{
    require(order >= 2 && delay >= 1, "svd_entropy: order >= 2 and delay >= 1 required");
    const std::size_t span_len = static_cast<std::size_t>(order - 1) * static_cast<std::size_t>(delay);
    if (x.size() <= span_len) {
        return 0.0;
    }
    const std::size_t rows = x.size() - span_len;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(order, order);
    for (std::size_t i = 0; i < rows; ++i) {
        for (int a = 0; a < order; ++a) {
            for (int b = a; b < order; ++b) {
                gram(a, b) += x[i + static_cast<std::size_t>(a * delay)] * x[i + static_cast<std::size_t>(b * delay)];
            }
        }
    }
    gram = gram.selfadjointView<Eigen::Upper>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    std::vector<double> sv;
    double total = 0.0;
    for (int k = 0; k < order; ++k) {
        const double s = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
        sv.push_back(s);
        total += s;
    }
    if (!(total > 0.0)) {
        return 0.0;
    }
    double h = 0.0;
    for (double s : sv) {
        if (s > 0.0) {
            const double p = s / total;
            h -= p * std::log(p);
        }
    }
    return h / std::log(static_cast<double>(order));
}

} // namespace vitalsel
