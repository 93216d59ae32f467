#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/labels.hpp"
#include "vitalsel/sigsynth.hpp"

namespace vitalsel {

struct Window {
    RowLabels labels;
    int window_index = 0;
    double sample_rate_hz = 20.0;
    std::array<std::vector<double>, 3> channels; // indexed by Channel

    [[nodiscard]] std::size_t size() const { return channels[0].size(); }
    [[nodiscard]] const std::vector<double>& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }
};

namespace detail {
    inline std::size_t whole_samples(double seconds, double fs, const char* what)
    {
        const double exact = seconds * fs;
        const double rounded = std::round(exact);
        if (rounded < 1.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact)) {
            throw InvalidArgument(std::string("window_signal: ") + what + " is not a whole, positive sample count");
        }
        return static_cast<std::size_t>(rounded);
    }
} // namespace detail

// Number of windows of length w with hop s that fit in l samples.
inline std::size_t window_count(std::size_t l, std::size_t w, std::size_t s)
{
    return l < w ? 0 : (l - w) / s + 1;
}

inline std::vector<Window> window_signal(const SignalRecord& record, double win_s = 10.0, double step_s = 1.0)
{
    const double fs = record.sample_rate_hz;
    const std::size_t w = detail::whole_samples(win_s, fs, "window length");
    const std::size_t s = detail::whole_samples(step_s, fs, "window step");
    const std::size_t l = record.size();
    for (const auto& ch : record.channels) {
        if (ch.size() != l) {
            throw InvalidArgument("window_signal: channel lengths differ");
        }
    }
    if (l < w) {
        throw InvalidArgument("window_signal: record has " + std::to_string(l) + " samples, shorter than one window of " +
                              std::to_string(w));
    }

    const std::size_t count = window_count(l, w, s);
    std::vector<Window> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto& win = out[k];
        win.labels = record.labels;
        win.window_index = static_cast<int>(k);
        win.sample_rate_hz = fs;
        for (std::size_t c = 0; c < 3; ++c) {
            const auto first = record.channels[c].begin() + static_cast<std::ptrdiff_t>(k * s);
            win.channels[c].assign(first, first + static_cast<std::ptrdiff_t>(w));
        }
    }
    return out;
}

} // namespace vitalsel
