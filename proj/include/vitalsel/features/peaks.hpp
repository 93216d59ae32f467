#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

namespace detail {
    // Prominence of the peak at p: height above the higher of the two lowest
    // points reached before the signal climbs above x[p] on either side.
    inline double peak_prominence(std::span<const double> x, std::size_t p)
    {
        double left_min = x[p];
        for (std::size_t j = p; j-- > 0;) {
            if (x[j] > x[p]) {
                break;
            }
            left_min = std::min(left_min, x[j]);
        }
        double right_min = x[p];
        for (std::size_t j = p + 1; j < x.size(); ++j) {
            if (x[j] > x[p]) {
                break;
            }
            right_min = std::min(right_min, x[j]);
        }
        return x[p] - std::max(left_min, right_min);
    }

    inline double quantile_sorted(std::span<const double> sorted, double q)
    {
        if (sorted.empty()) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
    }

    inline double mean_of(std::span<const double> v)
    {
        if (v.empty()) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }

    inline double pstd_of(std::span<const double> v)
    {
        if (v.empty()) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double m = mean_of(v);
        double s = 0.0;
        for (double a : v) {
            s += (a - m) * (a - m);
        }
        return std::sqrt(s / static_cast<double>(v.size()));
    }
} // namespace detail

// Local maxima (plateaus resolved to their midpoint) that have at least
// min_prominence and are at least min_distance_s*fs samples apart. When two
// candidates are too close the taller one wins. Edges are never peaks.
inline std::vector<std::size_t> detect_peaks(std::span<const double> x, double fs, double min_distance_s, double min_prominence)
{
    require(fs > 0.0, "detect_peaks: fs must be > 0");
    std::vector<std::size_t> candidates;
    const std::size_t n = x.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(x[i - 1] < x[i])) {
            continue;
        }
        std::size_t ahead = i;
        while (ahead + 1 < n && x[ahead + 1] == x[i]) {
            ++ahead;
        }
        if (ahead + 1 < n && x[ahead + 1] < x[i]) {
            candidates.push_back((i + ahead) / 2);
        }
        i = ahead;
    }

    std::erase_if(candidates, [&](std::size_t p) { return detail::peak_prominence(x, p) < min_prominence; });

    const auto distance = static_cast<std::size_t>(std::max(1.0, std::ceil(min_distance_s * fs - 1e-9)));
    if (distance > 1 && candidates.size() > 1) {
        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[candidates[a]] > x[candidates[b]]; });
        std::vector<bool> keep(candidates.size(), true);
        for (auto idx : order) {
            if (!keep[idx]) {
                continue;
            }
            for (std::size_t j = idx; j-- > 0 && candidates[idx] - candidates[j] < distance;) {
                keep[j] = false;
            }
            for (std::size_t j = idx + 1; j < candidates.size() && candidates[j] - candidates[idx] < distance; ++j) {
                keep[j] = false;
            }
        }
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (keep[i]) {
                kept.push_back(candidates[i]);
            }
        }
        candidates = std::move(kept);
    }
    return candidates;
}

// Interval statistics over detected peaks (beat-to-beat or breath-to-breath).
// Fewer than two peaks leaves every value NaN; statistics that need more
// intervals than are available are NaN as well.
struct VariabilityFeatures {
    static constexpr std::size_t kCount = 23;
    static constexpr std::array<std::string_view, kCount> kNames{
        "interval_mean", "interval_sd", "interval_rmssd", "interval_sdsd", "interval_pnn",
        "rate_per_min", "interval_cv", "interval_min", "interval_max", "interval_range",
        "interval_q1", "interval_median", "interval_q3", "interval_iqr", "interval_mean_abs_diff",
        "peak_amp_mean", "peak_amp_sd", "peak_amp_cv", "rise_time_mean", "fall_time_mean",
        "rise_time_sd", "fall_time_sd", "rise_fall_ratio"};

    std::array<double, kCount> values;

    VariabilityFeatures() { values.fill(std::numeric_limits<double>::quiet_NaN()); }

    [[nodiscard]] double get(std::string_view name) const
    {
        for (std::size_t i = 0; i < kCount; ++i) {
            if (kNames[i] == name) {
                return values[i];
            }
        }
        throw InvalidArgument("VariabilityFeatures: unknown name");
    }

    double& at(std::string_view name)
    {
        for (std::size_t i = 0; i < kCount; ++i) {
            if (kNames[i] == name) {
                return values[i];
            }
        }
        throw InvalidArgument("VariabilityFeatures: unknown name");
    }
};

// change_threshold_s: successive-interval change counted by the pNN-style
// proportion (0.05 s for heartbeats; scale up for breaths).
inline VariabilityFeatures variability_features(std::span<const std::size_t> peaks, std::span<const double> x, double fs,
                                                double change_threshold_s = 0.05)
{
    VariabilityFeatures f;
    if (peaks.size() < 2 || !(fs > 0.0)) {
        return f;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> intervals;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        intervals.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / fs);
    }
    std::vector<double> diffs;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        diffs.push_back(intervals[i] - intervals[i - 1]);
    }

    const double mean = detail::mean_of(intervals);
    f.at("interval_mean") = mean;
    f.at("interval_sd") = detail::pstd_of(intervals);
    f.at("rate_per_min") = mean > 0.0 ? 60.0 / mean : nan;
    f.at("interval_cv") = mean > 0.0 ? f.get("interval_sd") / mean : nan;
    if (!diffs.empty()) {
        double sq = 0.0;
        double abs_sum = 0.0;
        std::size_t over = 0;
        for (double d : diffs) {
            sq += d * d;
            abs_sum += std::abs(d);
            if (std::abs(d) > change_threshold_s) {
                ++over;
            }
        }
        const double m = static_cast<double>(diffs.size());
        f.at("interval_rmssd") = std::sqrt(sq / m);
        f.at("interval_sdsd") = detail::pstd_of(diffs);
        f.at("interval_pnn") = static_cast<double>(over) / m;
        f.at("interval_mean_abs_diff") = abs_sum / m;
    }

    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    f.at("interval_min") = sorted.front();
    f.at("interval_max") = sorted.back();
    f.at("interval_range") = sorted.back() - sorted.front();
    f.at("interval_q1") = detail::quantile_sorted(sorted, 0.25);
    f.at("interval_median") = detail::quantile_sorted(sorted, 0.5);
    f.at("interval_q3") = detail::quantile_sorted(sorted, 0.75);
    f.at("interval_iqr") = f.get("interval_q3") - f.get("interval_q1");

    std::vector<double> amps;
    for (auto p : peaks) {
        amps.push_back(x[p]);
    }
    const double amp_mean = detail::mean_of(amps);
    f.at("peak_amp_mean") = amp_mean;
    f.at("peak_amp_sd") = detail::pstd_of(amps);
    f.at("peak_amp_cv") = amp_mean != 0.0 ? f.get("peak_amp_sd") / std::abs(amp_mean) : 0.0;

    // Rise: preceding trough -> peak. Fall: peak -> following trough.
    std::vector<double> rises;
    std::vector<double> falls;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const std::size_t lo = i == 0 ? 0 : peaks[i - 1];
        const std::size_t hi = i + 1 == peaks.size() ? x.size() - 1 : peaks[i + 1];
        const auto trough_before = static_cast<std::size_t>(std::min_element(x.begin() + lo, x.begin() + peaks[i] + 1) - x.begin());
        const auto trough_after = static_cast<std::size_t>(std::min_element(x.begin() + peaks[i], x.begin() + hi + 1) - x.begin());
        rises.push_back(static_cast<double>(peaks[i] - trough_before) / fs);
        falls.push_back(static_cast<double>(trough_after - peaks[i]) / fs);
    }
    f.at("rise_time_mean") = detail::mean_of(rises);
    f.at("fall_time_mean") = detail::mean_of(falls);
    f.at("rise_time_sd") = detail::pstd_of(rises);
    f.at("fall_time_sd") = detail::pstd_of(falls);
    f.at("rise_fall_ratio") = f.get("fall_time_mean") > 0.0 ? f.get("rise_time_mean") / f.get("fall_time_mean") : nan;
    return f;
}

} // namespace vitalsel
