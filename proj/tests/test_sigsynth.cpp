#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "vitalsel/features/spectral.hpp"
#include "vitalsel/features/window.hpp"
#include "vitalsel/io.hpp"
#include "vitalsel/sigsynth.hpp"

using namespace vitalsel;

namespace {

double max_abs(const std::vector<double>& x)
{
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double pop_std(const std::vector<double>& x)
{
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(x.size()));
}

} // namespace

TEST(Profiles, RangesAndIds)
{
    const auto p = generate_profiles(7, 50);
    ASSERT_EQ(p.size(), 50u);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_EQ(p[i].subject_id, static_cast<int>(i) + 1);
        EXPECT_GE(p[i].cardiac_rate_hz, 0.9);
        EXPECT_LE(p[i].cardiac_rate_hz, 1.6);
        EXPECT_GE(p[i].breath_rate_hz, 0.2);
        EXPECT_LE(p[i].breath_rate_hz, 0.35);
        EXPECT_GT(p[i].chest_amplitude, 0.0);
        EXPECT_GE(p[i].cardiac_variability, 0.0);
    }
}

TEST(Profiles, DeterministicPerSeed)
{
    EXPECT_EQ(generate_profiles(7, 50), generate_profiles(7, 50));
    EXPECT_NE(generate_profiles(7, 50), generate_profiles(8, 50));
    // a profile only depends on (seed, id), not on the cohort size
    EXPECT_EQ(generate_profiles(7, 10)[3], generate_profiles(7, 50)[3]);
}

TEST(Profiles, CardiacSignaturesDistinct)
{
    const auto p = generate_profiles(7, 50);
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            EXPECT_FALSE(p[i].cardiac_rate_hz == p[j].cardiac_rate_hz && p[i].cardiac_shape == p[j].cardiac_shape);
        }
    }
}

TEST(Profiles, EmptyCohortRejected)
{
    EXPECT_THROW(generate_profiles(7, 0), InvalidArgument);
}

TEST(Session, LengthAndFinite)
{
    const auto prof = make_profile(7, 1);
    for (auto a : kAllActivities) {
        for (auto pos : kAllPositions) {
            const auto r = synthesize_session(prof, a, pos, 30.0, 20.0);
            EXPECT_EQ(r.labels, (RowLabels{1, a, pos}));
            for (auto c : kAllChannels) {
                ASSERT_EQ(r.channel(c).size(), 600u);
                for (double v : r.channel(c)) {
                    ASSERT_TRUE(std::isfinite(v));
                }
            }
        }
    }
}

TEST(Session, ApneaBelowTenthOfNormal)
{
    for (const auto& prof : generate_profiles(7, 50)) {
        for (auto pos : kAllPositions) {
            const auto normal = synthesize_session(prof, Activity::Normal, pos, 30.0, 20.0);
            const auto apnea = synthesize_session(prof, Activity::Apnea, pos, 30.0, 20.0);
            EXPECT_LT(max_abs(apnea.channel(Channel::Respiration)), 0.1 * max_abs(normal.channel(Channel::Respiration)))
                << "subject " << prof.subject_id;
        }
    }
}

TEST(Session, GuidedPeakAtGuideFrequency)
{
    for (const auto& prof : generate_profiles(3, 10)) {
        const auto r = synthesize_session(prof, Activity::Guided, Position::Sitting, 30.0, 20.0);
        const auto spec = periodogram(r.channel(Channel::Respiration), 20.0, Taper::Rectangular, Detrend::Mean);
        const auto top = std::max_element(spec.power.begin(), spec.power.end()) - spec.power.begin();
        const double bin = 20.0 / 600.0;
        EXPECT_NEAR(spec.freqs[static_cast<std::size_t>(top)], 0.1, bin + 1e-12);
    }
}

TEST(Session, GuideFrequencyIsConfigurable)
{
    SynthOptions o;
    o.guide_hz = 0.2;
    const auto r = synthesize_session(make_profile(3, 2), Activity::Guided, Position::Lying, 30.0, 20.0, o);
    const auto spec = periodogram(r.channel(Channel::Respiration), 20.0, Taper::Rectangular, Detrend::Mean);
    const auto top = std::max_element(spec.power.begin(), spec.power.end()) - spec.power.begin();
    EXPECT_NEAR(spec.freqs[static_cast<std::size_t>(top)], 0.2, 20.0 / 600.0 + 1e-12);
}

TEST(Session, PreconditionsChecked)
{
    const auto prof = make_profile(1, 1);
    EXPECT_THROW(synthesize_session(prof, Activity::Normal, Position::Sitting, 0.0, 20.0), InvalidArgument);
    EXPECT_THROW(synthesize_session(prof, Activity::Normal, Position::Sitting, 30.0, 0.0), InvalidArgument);
}

TEST(Dataset, CountsAndOrder)
{
    DatasetConfig cfg;
    cfg.master_seed = 7;
    const auto recs = synthesize_dataset(cfg);
    ASSERT_EQ(recs.size(), 400u);
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& r : recs) {
        seen.insert({r.labels.subject, static_cast<int>(r.labels.activity), static_cast<int>(r.labels.position)});
    }
    EXPECT_EQ(seen.size(), 400u);

    const std::array<Activity, 1> one_act{Activity::Reading};
    const std::array<Position, 1> one_pos{Position::Lying};
    const auto single = synthesize_dataset(7, 1, one_act, one_pos, 30.0, 20.0);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].labels, (RowLabels{1, Activity::Reading, Position::Lying}));
}

TEST(Dataset, ByteIdenticalAcrossRunsAndThreads)
{
    DatasetConfig cfg;
    cfg.master_seed = 11;
    cfg.n_subjects = 6;
    const auto a = synthesize_dataset(cfg);
    cfg.threads = 3;
    const auto b = synthesize_dataset(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(io::session_csv(a[i]), io::session_csv(b[i]));
    }
}

TEST(Dataset, SessionIndependentOfCohort)
{
    DatasetConfig small;
    small.master_seed = 5;
    small.n_subjects = 3;
    DatasetConfig big = small;
    big.n_subjects = 9;
    const auto a = synthesize_dataset(small);
    const auto b = synthesize_dataset(big);
    auto find = [](const std::vector<SignalRecord>& v, RowLabels l) {
        return *std::find_if(v.begin(), v.end(), [&](const SignalRecord& r) { return r.labels == l; });
    };
    const RowLabels l{2, Activity::Guided, Position::Lying};
    EXPECT_EQ(find(a, l).channels, find(b, l).channels);
}

// A window-level amplitude threshold on the respiration channel tells apnea
// from normal breathing for every subject and window.
TEST(Dataset, ApneaSeparableByAmplitudeThreshold)
{
    DatasetConfig cfg;
    cfg.master_seed = 7;
    cfg.activities = {Activity::Normal, Activity::Apnea};
    const auto recs = synthesize_dataset(cfg);
    double apnea_max = 0.0;
    double normal_min = 1e300;
    for (const auto& r : recs) {
        for (const auto& w : window_signal(r)) {
            const double s = pop_std(w.channel(Channel::Respiration));
            if (r.labels.activity == Activity::Apnea) {
                apnea_max = std::max(apnea_max, s);
            } else {
                normal_min = std::min(normal_min, s);
            }
        }
    }
    EXPECT_LT(apnea_max, normal_min);
}
