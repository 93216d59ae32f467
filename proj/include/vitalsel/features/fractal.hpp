#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

// Katz fractal dimension on the amplitude trace.
// n = number of steps, L = summed |dx|, d = max |x_i - x_0|. A flat signal or a
// single step is 1 by convention.
inline double katz_fd(std::span<const double> x)
{
    require(x.size() >= 2, "katz_fd: need at least 2 samples");
    double total = 0.0;
    double extent = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        total += std::abs(x[i] - x[i - 1]);
        extent = std::max(extent, std::abs(x[i] - x[0]));
    }
    if (total == 0.0 || extent == 0.0 || x.size() == 2) {
        return 1.0;
    }
    const double steps = std::log10(static_cast<double>(x.size() - 1));
    return steps / (steps + std::log10(extent / total));
}

// Least-squares slope of log L(k) against log(1/k), k = 1..k_max.
inline double higuchi_fd(std::span<const double> x, int k_max = 10)
{
    require(k_max >= 2, "higuchi_fd: k_max must be >= 2");
    const std::size_t n = x.size();
    require(n >= 2 * static_cast<std::size_t>(k_max), "higuchi_fd: need at least 2*k_max samples");

    std::vector<double> log_inv_k;
    std::vector<double> log_len;
    for (int k = 1; k <= k_max; ++k) {
        double sum_lm = 0.0;
        int used = 0;
        for (int m = 0; m < k; ++m) {
            const auto steps = (n - 1 - static_cast<std::size_t>(m)) / static_cast<std::size_t>(k);
            if (steps == 0) {
                continue;
            }
            double length = 0.0;
            for (std::size_t i = 1; i <= steps; ++i) {
                length += std::abs(x[m + i * k] - x[m + (i - 1) * k]);
            }
            const double norm = static_cast<double>(n - 1) / (static_cast<double>(steps) * k);
            sum_lm += length * norm / k;
            ++used;
        }
        const double mean_len = used > 0 ? sum_lm / used : 0.0;
        if (mean_len <= 0.0) {
            return 1.0; // flat signal: no curve length at any scale
        }
        log_inv_k.push_back(std::log(1.0 / k));
        log_len.push_back(std::log(mean_len));
    }

    const double m = static_cast<double>(log_len.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < log_len.size(); ++i) {
        sx += log_inv_k[i];
        sy += log_len[i];
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < log_len.size(); ++i) {
        sxy += (log_inv_k[i] - mx) * (log_len[i] - my);
        sxx += (log_inv_k[i] - mx) * (log_inv_k[i] - mx);
    }
    return sxy / sxx;
}

// Sign changes of the first difference.
inline std::size_t derivative_sign_changes(std::span<const double> x)
{
    std::size_t changes = 0;
    for (std::size_t i = 2; i < x.size(); ++i) {
        const double d0 = x[i - 1] - x[i - 2];
        const double d1 = x[i] - x[i - 1];
        if (d0 * d1 < 0.0) {
            ++changes;
        }
    }
    return changes;
}

inline double petrosian_fd(std::span<const double> x)
{
    require(x.size() >= 2, "petrosian_fd: need at least 2 samples");
    const double n = static_cast<double>(x.size());
    const double nd = static_cast<double>(derivative_sign_changes(x));
    const double ln = std::log10(n);
    return ln / (ln + std::log10(n / (n + 0.4 * nd)));
}

struct Hjorth {
    double mobility = 0.0;
    double complexity = 0.0;
};

inline Hjorth hjorth_parameters(std::span<const double> x)
{
    auto variance = [](std::span<const double> v) {
        if (v.empty()) {
            return 0.0;
        }
        double mean = 0.0;
        for (double a : v) {
            mean += a;
        }
        mean /= static_cast<double>(v.size());
        double s = 0.0;
        for (double a : v) {
            s += (a - mean) * (a - mean);
        }
        return s / static_cast<double>(v.size());
    };
    auto diff = [](std::span<const double> v) {
        std::vector<double> d(v.size() > 0 ? v.size() - 1 : 0);
        for (std::size_t i = 1; i < v.size(); ++i) {
            d[i - 1] = v[i] - v[i - 1];
        }
        return d;
    };
    const auto dx = diff(x);
    const auto ddx = diff(dx);
    const double v0 = variance(x);
    const double v1 = variance(dx);
    const double v2 = variance(ddx);
    Hjorth h;
    if (v0 > 0.0) {
        h.mobility = std::sqrt(v1 / v0);
    }
    if (v1 > 0.0 && h.mobility > 0.0) {
        h.complexity = std::sqrt(v2 / v1) / h.mobility;
    }
    return h;
}

} // namespace vitalsel
