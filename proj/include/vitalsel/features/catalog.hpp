#pragma once

// The default per-window feature catalog: 63 features for each of the chest,
// respiration and cardiac channels (189 total), grouped as
//   12 statistical, 8 time-domain, 9 spectral, 6 entropy,
//   5 fractal/complexity, 23 peak-interval variability.
// Column names are "<channel>_<feature>" and their order is fixed.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/labels.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/features/entropy.hpp"
#include "vitalsel/features/feature_matrix.hpp"
#include "vitalsel/features/fractal.hpp"
#include "vitalsel/features/peaks.hpp"
#include "vitalsel/features/spectral.hpp"
#include "vitalsel/features/window.hpp"

namespace vitalsel {

inline constexpr std::string_view kCatalogVersion = "vitalsel-catalog-1";

struct PeakSettings {
    double min_distance_s = 2.0;
    double prominence_factor = 0.3; // times channel std
    double change_threshold_s = 0.25;
};

struct CatalogConfig {
    // Indexed by Channel: chest, respiration, cardiac.
    std::array<PeakSettings, 3> peaks{PeakSettings{2.0, 0.3, 0.25}, PeakSettings{2.0, 0.3, 0.25}, PeakSettings{0.4, 0.3, 0.05}};
    int permutation_order = 3;
    int entropy_m = 2;
    double entropy_r_factor = 0.2;
    int higuchi_k_max = 10;
    int histogram_bins = 16;
    std::array<double, 4> band_edges{0.0, 0.5, 2.0, 5.0};
    unsigned threads = 1;
};

inline constexpr std::array<std::string_view, 40> kChannelBaseNames{
    // statistical
    "mean", "min", "max", "std", "var", "median", "q1", "q3", "iqr", "range", "rms", "snr",
    // time domain
    "slope", "energy", "line_length", "mean_abs_diff", "mean_abs_diff2", "zero_cross_rate", "peak_count", "skewness",
    // spectral
    "total_power", "dominant_freq", "dominant_power", "spectral_centroid", "spectral_bandwidth", "band_power_low",
    "band_power_mid", "band_power_high", "spectral_entropy",
    // entropy
    "perm_entropy", "approx_entropy", "sample_entropy", "hist_entropy", "svd_entropy", "spectral_flatness",
    // fractal / complexity
    "katz_fd", "higuchi_fd", "petrosian_fd", "hjorth_mobility", "hjorth_complexity"};

inline constexpr std::size_t kFeaturesPerChannel = kChannelBaseNames.size() + VariabilityFeatures::kCount;
static_assert(kFeaturesPerChannel == 63);

inline std::string_view channel_prefix(Channel c)
{
    switch (c) {
    case Channel::Chest: return "chest";
    case Channel::Respiration: return "resp";
    case Channel::Cardiac: return "cardiac";
    }
    return "?";
}

inline std::vector<std::string> feature_names()
{
    std::vector<std::string> names;
    names.reserve(kFeaturesPerChannel * 3);
    for (auto c : kAllChannels) {
        const std::string prefix = std::string(channel_prefix(c)) + "_";
        for (auto n : kChannelBaseNames) {
            names.push_back(prefix + std::string(n));
        }
        for (auto n : VariabilityFeatures::kNames) {
            names.push_back(prefix + std::string(n));
        }
    }
    return names;
}

inline std::vector<double> channel_features(std::span<const double> x, double fs, const PeakSettings& peak_cfg, const CatalogConfig& cfg)
{
    require(x.size() >= 8, "channel_features: window shorter than 8 samples");
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    std::vector<double> out;
    out.reserve(kFeaturesPerChannel);

    // statistical
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    double sq = 0.0;
    for (double v : x) {
        mean += v;
        sq += v * v;
    }
    mean /= nd;
    double var = 0.0;
    double m3 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        var += d * d;
        m3 += d * d * d;
    }
    var /= nd;
    m3 /= nd;
    const double sd = std::sqrt(var);
    const double q1 = detail::quantile_sorted(sorted, 0.25);
    const double q3 = detail::quantile_sorted(sorted, 0.75);
    out.insert(out.end(), {mean, sorted.front(), sorted.back(), sd, var, detail::quantile_sorted(sorted, 0.5), q1, q3, q3 - q1,
                           sorted.back() - sorted.front(), std::sqrt(sq / nd), sd > 0.0 ? mean / sd : 0.0});

    // time domain
    const double tm = 0.5 * (nd - 1.0);
    double sxy = 0.0;
    double sxx = 0.0;
    double line = 0.0;
    double diff2 = 0.0;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - tm;
        sxy += dt * (x[i] - mean);
        sxx += dt * dt;
        if (i > 0) {
            line += std::abs(x[i] - x[i - 1]);
            if ((x[i] - mean) * (x[i - 1] - mean) < 0.0) {
                ++crossings;
            }
        }
        if (i > 1) {
            diff2 += std::abs(x[i] - 2.0 * x[i - 1] + x[i - 2]);
        }
    }
    const auto peaks = detect_peaks(x, fs, peak_cfg.min_distance_s, peak_cfg.prominence_factor * sd);
    out.insert(out.end(), {sxy / sxx * fs, sq, line, line / (nd - 1.0), diff2 / (nd - 2.0), static_cast<double>(crossings) / (nd - 1.0),
                           static_cast<double>(peaks.size()), sd > 0.0 ? m3 / (sd * sd * sd) : 0.0});

    // spectral
    const auto spec = periodogram(x, fs, Taper::Hann, Detrend::Linear);
    double psum = 0.0;
    double fsum = 0.0;
    std::size_t kmax = 0;
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
        psum += spec.power[k];
        fsum += spec.freqs[k] * spec.power[k];
        if (spec.power[k] > spec.power[kmax]) {
            kmax = k;
        }
    }
    double centroid = 0.0;
    double bandwidth = 0.0;
    double dom_freq = 0.0;
    double dom_power = 0.0;
    if (psum > 0.0) {
        centroid = fsum / psum;
        double spread = 0.0;
        for (std::size_t k = 0; k < spec.power.size(); ++k) {
            spread += (spec.freqs[k] - centroid) * (spec.freqs[k] - centroid) * spec.power[k];
        }
        bandwidth = std::sqrt(spread / psum);
        dom_freq = spec.freqs[kmax];
        dom_power = spec.power[kmax] * spec.bin_width;
    }
    const auto& e = cfg.band_edges;
    out.insert(out.end(), {spec.total(), dom_freq, dom_power, centroid, bandwidth, band_power(spec, e[0], e[1]),
                           band_power(spec, e[1], e[2]), band_power(spec, e[2], e[3]), spectral_entropy(x, fs)});

    // entropy
    out.insert(out.end(), {permutation_entropy(x, cfg.permutation_order), approx_entropy(x, cfg.entropy_m, cfg.entropy_r_factor),
                           sample_entropy(x, cfg.entropy_m, cfg.entropy_r_factor), histogram_entropy(x, cfg.histogram_bins),
                           svd_entropy(x), spectral_flatness(spec)});

    // fractal / complexity
    const auto hj = hjorth_parameters(x);
    out.insert(out.end(), {katz_fd(x), higuchi_fd(x, cfg.higuchi_k_max), petrosian_fd(x), hj.mobility, hj.complexity});

    const auto var_features = variability_features(peaks, x, fs, peak_cfg.change_threshold_s);
    out.insert(out.end(), var_features.values.begin(), var_features.values.end());
    return out;
}

inline FeatureVector extract_window(const Window& w, const CatalogConfig& cfg = {})
{
    FeatureVector fv;
    fv.labels = w.labels;
    fv.names = feature_names();
    fv.values.reserve(fv.names.size());
    for (auto c : kAllChannels) {
        const auto vals = channel_features(w.channel(c), w.sample_rate_hz, cfg.peaks[static_cast<std::size_t>(c)], cfg);
        fv.values.insert(fv.values.end(), vals.begin(), vals.end());
    }
    return fv;
}

// Rows follow the order of `windows`.
inline FeatureMatrix extract_all(std::span<const Window> windows, const CatalogConfig& cfg = {})
{
    auto names = feature_names();
    if (windows.empty()) {
        return FeatureMatrix(names, Eigen::MatrixXd(0, static_cast<Eigen::Index>(names.size())), {});
    }
    const std::size_t len = windows.front().size();
    const double fs = windows.front().sample_rate_hz;
    for (const auto& w : windows) {
        if (w.sample_rate_hz != fs) {
            throw InvalidArgument("extract_all: windows have different sample rates");
        }
        for (const auto& ch : w.channels) {
            if (ch.size() != len) {
                throw InvalidArgument("extract_all: inconsistent window lengths");
            }
        }
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(names.size()));
    std::vector<RowLabels> labels(windows.size());
    parallel_for(windows.size(), cfg.threads, [&](std::size_t i) {
        Eigen::Index col = 0;
        for (auto c : kAllChannels) {
            const auto vals = channel_features(windows[i].channel(c), fs, cfg.peaks[static_cast<std::size_t>(c)], cfg);
            for (double v : vals) {
                values(static_cast<Eigen::Index>(i), col++) = v;
            }
        }
        labels[i] = windows[i].labels;
    });
    return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
}

// Windows every record and extracts the catalog, record-major then window order.
inline FeatureMatrix extract_records(std::span<const SignalRecord> records, double win_s = 10.0, double step_s = 1.0,
                                     const CatalogConfig& cfg = {})
{
    std::vector<Window> windows;
    for (const auto& r : records) {
        auto w = window_signal(r, win_s, step_s);
        windows.insert(windows.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    return extract_all(windows, cfg);
}

} // namespace vitalsel
