#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

enum class Taper { Rectangular, Hann };
enum class Detrend { Mean, Linear };

// One-sided power spectral density. Bin 0 (DC) is dropped; bins run
// k = 1..n/2 at frequency k*fs/n.
struct Spectrum {
    std::vector<double> freqs;
    std::vector<double> power;
    double bin_width = 0.0;

    [[nodiscard]] double total() const
    {
        double s = 0.0;
        for (double p : power) {
            s += p;
        }
        return s * bin_width;
    }
};

inline std::vector<double> detrended(std::span<const double> x, Detrend mode)
{
    const std::size_t n = x.size();
    std::vector<double> out(x.begin(), x.end());
    if (n == 0) {
        return out;
    }
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    if (mode == Detrend::Mean || n < 2) {
        for (auto& v : out) {
            v -= mean;
        }
        return out;
    }
    const double tm = 0.5 * static_cast<double>(n - 1);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - tm;
        sxy += dt * (x[i] - mean);
        sxx += dt * dt;
    }
    const double slope = sxy / sxx;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] -= mean + slope * (static_cast<double>(i) - tm);
    }
    return out;
}

inline Spectrum periodogram(std::span<const double> x, double fs, Taper taper = Taper::Hann, Detrend detrend = Detrend::Linear)
{
    require(fs > 0.0, "periodogram: fs must be > 0");
    const std::size_t n = x.size();
    require(n >= 2, "periodogram: need at least 2 samples");

    auto y = detrended(x, detrend);
    double wss = static_cast<double>(n);
    if (taper == Taper::Hann) {
        wss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
            y[i] *= w;
            wss += w * w;
        }
    }

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, y);

    Spectrum s;
    s.bin_width = fs / static_cast<double>(n);
    const std::size_t half = n / 2;
    s.freqs.reserve(half);
    s.power.reserve(half);
    for (std::size_t k = 1; k <= half; ++k) {
        double p = std::norm(spec[k]) / (fs * wss);
        if (!(n % 2 == 0 && k == half)) {
            p *= 2.0;
        }
        s.freqs.push_back(static_cast<double>(k) * s.bin_width);
        s.power.push_back(p);
    }
    return s;
}

// Power in [lo, hi) Hz.
inline double band_power(const Spectrum& s, double lo, double hi)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < s.freqs.size(); ++i) {
        if (s.freqs[i] >= lo && s.freqs[i] < hi) {
            acc += s.power[i];
        }
    }
    return acc * s.bin_width;
}

// Shannon entropy of the normalized one-sided spectrum (DC excluded).
// Uses a mean-removed rectangular periodogram so a bin-centred tone lands in
// a single bin. Zero power gives 0.
inline double spectral_entropy(std::span<const double> x, double fs, bool normalized = true)
{
    require(x.size() >= 8, "spectral_entropy: need at least 8 samples");
    const auto s = periodogram(x, fs, Taper::Rectangular, Detrend::Mean);
    double total = 0.0;
    for (double p : s.power) {
        total += p;
    }
    if (!(total > 0.0)) {
        return 0.0;
    }
    double h = 0.0;
    for (double p : s.power) {
        if (p > 0.0) {
            const double q = p / total;
            h -= q * std::log(q);
        }
    }
    if (normalized) {
        h /= std::log(static_cast<double>(s.power.size()));
    }
    return h;
}

// Geometric over arithmetic mean of the spectrum; 0 when any bin is empty or power is zero.
inline double spectral_flatness(const Spectrum& s)
{
    if (s.power.empty()) {
        return 0.0;
    }
    double log_sum = 0.0;
    double sum = 0.0;
    for (double p : s.power) {
        if (!(p > 0.0)) {
            return 0.0;
        }
        log_sum += std::log(p);
        sum += p;
    }
    const double m = static_cast<double>(s.power.size());
    return std::exp(log_sum / m) / (sum / m);
}

} // namespace vitalsel
