#pragma once

// Deterministic synthetic vital-sign sessions.
//
// Each subject gets a profile whose cardiac parameters act as an identity
// fingerprint, while the breathing activity is written into the respiration
// channel. The chest channel mixes both, the way a displacement trace would.
// Every record draws from its own RNG stream keyed by (subject, activity,
// position), so generation order and parallelism do not change the output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/labels.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/core/random.hpp"

namespace vitalsel {

struct SubjectProfile {
    int subject_id = 0;
    double cardiac_rate_hz = 1.2;      // [0.9, 1.6]
    double cardiac_variability = 0.04; // relative beat-interval jitter (sd / mean)
    double cardiac_amplitude = 1.0;    // [0.5, 1.5]
    double cardiac_shape = 0.3;        // second-harmonic weight of the pulse, [0.1, 0.6]
    double chest_amplitude = 1.0;      // peak-to-peak breathing excursion, [0.6, 1.4]
    double breath_rate_hz = 0.27;      // [0.2, 0.35]
    std::uint64_t noise_seed = 0;

    friend bool operator==(const SubjectProfile&, const SubjectProfile&) = default;
};

struct SynthOptions {
    double guide_hz = 0.1;
    double lying_scale = 0.8;
};

struct SignalRecord {
    RowLabels labels;
    double sample_rate_hz = 20.0;
    std::uint64_t seed = 0;
    std::array<std::vector<double>, 3> channels; // indexed by Channel

    [[nodiscard]] std::size_t size() const { return channels[0].size(); }
    [[nodiscard]] const std::vector<double>& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }
    [[nodiscard]] std::vector<double>& channel(Channel c) { return channels[static_cast<std::size_t>(c)]; }
};

inline SubjectProfile make_profile(std::uint64_t master_seed, int subject_id)
{
    auto rng = make_rng(master_seed, {static_cast<std::uint64_t>(subject_id), 0x70726f66ULL});
    SubjectProfile p;
    p.subject_id = subject_id;
    p.cardiac_rate_hz = uniform(rng, 0.9, 1.6);
    p.cardiac_variability = uniform(rng, 0.01, 0.1);
    p.cardiac_amplitude = uniform(rng, 0.5, 1.5);
    p.cardiac_shape = uniform(rng, 0.1, 0.6);
    p.chest_amplitude = uniform(rng, 0.6, 1.4);
    p.breath_rate_hz = uniform(rng, 0.2, 0.35);
    p.noise_seed = derive_seed(master_seed, {static_cast<std::uint64_t>(subject_id), 0x6e6f6973ULL});
    return p;
}

// Subject ids are 1..n_subjects.
inline std::vector<SubjectProfile> generate_profiles(std::uint64_t master_seed, int n_subjects)
{
    if (n_subjects <= 0) {
        throw InvalidArgument("generate_profiles: empty cohort (n_subjects must be >= 1)");
    }
    std::vector<SubjectProfile> out;
    out.reserve(static_cast<std::size_t>(n_subjects));
    for (int id = 1; id <= n_subjects; ++id) {
        out.push_back(make_profile(master_seed, id));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (out[i].cardiac_rate_hz == out[j].cardiac_rate_hz && out[i].cardiac_shape == out[j].cardiac_shape) {
                throw Error("generate_profiles: duplicate cardiac signature");
            }
        }
    }
    return out;
}

namespace detail {

    struct BreathSegment {
        double start = 0.0;
        double duration = 1.0;
        double amplitude = 0.0;
        double inhale_fraction = 0.4;
        bool pause = false;
    };

    // One breath spans [trough, peak, trough]: a raised-cosine rise over the
    // inhale fraction and a raised-cosine fall over the rest. Troughs sit at
    // -base/2 regardless of breath amplitude so segments join continuously.
    inline double breath_value(const BreathSegment& b, double t, double base)
    {
        if (b.pause) {
            return -0.5 * base;
        }
        const double phase = std::clamp((t - b.start) / b.duration, 0.0, 1.0);
        const double rho = b.inhale_fraction;
        const double y = phase < rho ? -std::cos(std::numbers::pi * phase / rho)
                                     : std::cos(std::numbers::pi * (phase - rho) / (1.0 - rho));
        return b.amplitude * 0.5 * (y + 1.0) - 0.5 * base;
    }

    template <typename NextBreath>
    std::vector<double> render_breaths(std::size_t n, double fs, double base, double first_period, Rng& rng, NextBreath&& next)
    {
        std::vector<BreathSegment> segments;
        const double total = static_cast<double>(n) / fs;
        double t = -uniform(rng, 0.0, first_period);
        while (t < total) {
            auto [breath, pause] = next();
            breath.start = t;
            segments.push_back(breath);
            t += breath.duration;
            if (pause > 0.0) {
                segments.push_back(BreathSegment{t, pause, 0.0, 0.5, true});
                t += pause;
            }
        }
        std::vector<double> out(n);
        std::size_t seg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = static_cast<double>(i) / fs;
            while (seg + 1 < segments.size() && segments[seg + 1].start <= ti) {
                ++seg;
            }
            out[i] = breath_value(segments[seg], ti, base);
        }
        return out;
    }

    inline double activity_heart_factor(Activity a)
    {
        switch (a) {
        case Activity::Normal: return 1.0;
        case Activity::Reading: return 1.03;
        case Activity::Guided: return 0.98;
        case Activity::Apnea: return 0.95;
        }
        return 1.0;
    }

} // namespace detail

inline SignalRecord synthesize_session(const SubjectProfile& profile, Activity activity, Position position,
                                       double duration_s, double sample_rate_hz, const SynthOptions& options = {})
{
    require(duration_s > 0.0, "synthesize_session: duration_s must be > 0");
    require(sample_rate_hz > 0.0, "synthesize_session: sample_rate_hz must be > 0");
    require(options.guide_hz > 0.0, "synthesize_session: guide_hz must be > 0");

    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    require(n > 0, "synthesize_session: fewer than one sample");
    const double fs = sample_rate_hz;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    SignalRecord rec;
    rec.labels = RowLabels{profile.subject_id, activity, position};
    rec.sample_rate_hz = fs;
    rec.seed = derive_seed(profile.noise_seed, {static_cast<std::uint64_t>(activity), static_cast<std::uint64_t>(position)});
    Rng rng(rec.seed);

    // Breathing drifts a lot between sessions, the heart much less.
    const double base = profile.chest_amplitude;
    const double amp = base * std::clamp(std::exp(0.4 * gaussian(rng)), 0.6, 2.0);
    const double br = profile.breath_rate_hz * std::clamp(std::exp(0.3 * gaussian(rng)), 0.6, 1.6);
    const double heart_session = std::exp(0.02 * gaussian(rng));
    const double heart_amp = profile.cardiac_amplitude * std::clamp(std::exp(0.15 * gaussian(rng)), 0.5, 2.0);
    const double heart_shape = std::clamp(profile.cardiac_shape + 0.03 * gaussian(rng), 0.0, 0.8);

    // Respiration: the activity signature.
    std::vector<double> resp;
    switch (activity) {
    case Activity::Normal:
        resp = detail::render_breaths(n, fs, amp, 1.0 / br, rng, [&] {
            const double period = std::clamp(1.0 + 0.08 * gaussian(rng), 0.6, 1.4) / br;
            const double a = amp * std::clamp(1.0 + 0.08 * gaussian(rng), 0.5, 1.5);
            return std::pair{detail::BreathSegment{0.0, period, a, 0.4, false}, 0.0};
        });
        break;
    case Activity::Reading:
        resp = detail::render_breaths(n, fs, amp, 1.0 / br, rng, [&] {
            const double period = uniform(rng, 0.6, 1.6) / br;
            const double a = amp * uniform(rng, 0.3, 1.1);
            const double pause = uniform01(rng) < 0.35 ? uniform(rng, 0.8, 2.5) : 0.0;
            return std::pair{detail::BreathSegment{0.0, period, a, 0.25, false}, pause};
        });
        break;
    case Activity::Guided: {
        // Symmetric raised cosine at a fixed period is a pure sinusoid.
        const double period = 1.0 / options.guide_hz;
        resp = detail::render_breaths(n, fs, amp, period, rng, [&] {
            return std::pair{detail::BreathSegment{0.0, period, amp, 0.5, false}, 0.0};
        });
        break;
    }
    case Activity::Apnea: {
        const double drift_hz = uniform(rng, 0.01, 0.03);
        const double phase = uniform(rng, 0.0, two_pi);
        resp.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            resp[i] = 0.015 * base * std::sin(two_pi * drift_hz * static_cast<double>(i) / fs + phase);
        }
        break;
    }
    }
    for (auto& v : resp) {
        v += 0.002 * gaussian(rng);
    }

    // Normalized breathing drive in roughly [-1, 1], used for cardio-respiratory coupling.
    std::vector<double> drive(n);
    for (std::size_t i = 0; i < n; ++i) {
        drive[i] = std::clamp(resp[i] / (0.5 * amp), -1.5, 1.5);
    }

    // Cardiac: the identity signature, beat by beat.
    std::vector<double> cardiac(n);
    {
        const double rate = profile.cardiac_rate_hz * heart_session * detail::activity_heart_factor(activity);
        const double mean_rr = 1.0 / rate;
        double beat_start = -uniform(rng, 0.0, mean_rr);
        auto next_rr = [&](double at) {
            const auto idx = static_cast<std::size_t>(std::clamp(at * fs, 0.0, static_cast<double>(n - 1)));
            const double rr = mean_rr * (1.0 + profile.cardiac_variability * gaussian(rng)) * (1.0 - 0.04 * drive[idx]);
            return std::clamp(rr, 0.4 * mean_rr, 1.6 * mean_rr);
        };
        double rr = next_rr(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            while (t >= beat_start + rr) {
                beat_start += rr;
                rr = next_rr(beat_start);
            }
            const double phi = (t - beat_start) / rr;
            const double pulse = std::sin(two_pi * phi) + heart_shape * std::sin(2.0 * two_pi * phi + 0.6) - heart_shape * std::sin(0.6);
            cardiac[i] = heart_amp * pulse * (1.0 + 0.15 * drive[i]) + 0.05 * heart_amp * gaussian(rng);
        }
    }

    // Chest displacement: breathing plus a small cardiac component, scaled by position.
    std::vector<double> chest(n);
    {
        const double scale = position == Position::Lying ? options.lying_scale : 1.0;
        const double wander_hz = uniform(rng, 0.02, 0.05);
        const double wander_phase = uniform(rng, 0.0, two_pi);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            double v = scale * (resp[i] + 0.02 * cardiac[i]);
            if (position == Position::Lying) {
                v += 0.1 * base * std::sin(two_pi * wander_hz * t + wander_phase);
            }
            chest[i] = v + 0.02 * gaussian(rng);
        }
    }

    rec.channel(Channel::Chest) = std::move(chest);
    rec.channel(Channel::Respiration) = std::move(resp);
    rec.channel(Channel::Cardiac) = std::move(cardiac);
    return rec;
}

struct DatasetConfig {
    std::uint64_t master_seed = 0;
    int n_subjects = 50;
    std::vector<Activity> activities{kAllActivities.begin(), kAllActivities.end()};
    std::vector<Position> positions{kAllPositions.begin(), kAllPositions.end()};
    double duration_s = 30.0;
    double sample_rate_hz = 20.0;
    SynthOptions options{};
    unsigned threads = 1;
};

// One record per (subject, activity, position), ordered by activity, then
// position, then subject.
inline std::vector<SignalRecord> synthesize_dataset(const DatasetConfig& cfg)
{
    require(!cfg.activities.empty(), "synthesize_dataset: no activities");
    require(!cfg.positions.empty(), "synthesize_dataset: no positions");
    const auto profiles = generate_profiles(cfg.master_seed, cfg.n_subjects);
    const std::size_t per_subject = cfg.activities.size() * cfg.positions.size();
    std::vector<SignalRecord> out(profiles.size() * per_subject);
    const std::size_t n_subj = profiles.size();
    parallel_for(out.size(), cfg.threads, [&](std::size_t k) {
        const auto& prof = profiles[k % n_subj];
        const std::size_t r = k / n_subj;
        const auto act = cfg.activities[r / cfg.positions.size()];
        const auto pos = cfg.positions[r % cfg.positions.size()];
        out[k] = synthesize_session(prof, act, pos, cfg.duration_s, cfg.sample_rate_hz, cfg.options);
    });
    return out;
}

inline std::vector<SignalRecord> synthesize_dataset(std::uint64_t master_seed, int n_subjects, std::span<const Activity> activities,
                                                    std::span<const Position> positions, double duration_s, double sample_rate_hz)
{
    DatasetConfig cfg;
    cfg.master_seed = master_seed;
    cfg.n_subjects = n_subjects;
    cfg.activities.assign(activities.begin(), activities.end());
    cfg.positions.assign(positions.begin(), positions.end());
    cfg.duration_s = duration_s;
    cfg.sample_rate_hz = sample_rate_hz;
    return synthesize_dataset(cfg);
}

} // namespace vitalsel
