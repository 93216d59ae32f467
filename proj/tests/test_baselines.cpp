#include <gtest/gtest.h>

#include <map>

#include "vitalsel/baselines/rfe.hpp"
#include "vitalsel/core/random.hpp"

using namespace vitalsel;

namespace {

struct Labeled {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

// Only column `signal` carries the class; the rest is noise.
Labeled one_informative(Eigen::Index rows, Eigen::Index cols, Eigen::Index signal, std::uint64_t seed)
{
    auto rng = make_rng(seed, {});
    Labeled d{Eigen::MatrixXd(rows, cols), std::vector<int>(static_cast<std::size_t>(rows))};
    for (Eigen::Index i = 0; i < rows; ++i) {
        const int c = static_cast<int>(i % 3);
        d.y[static_cast<std::size_t>(i)] = c;
        for (Eigen::Index j = 0; j < cols; ++j) {
            d.x(i, j) = gaussian(rng);
        }
        d.x(i, signal) = 3.0 * c + 0.3 * gaussian(rng);
    }
    return d;
}

RfeOptions small_forest(std::uint64_t seed, int step = 1)
{
    RfeOptions o;
    o.step = step;
    o.forest = ForestConfig{20, seed, 0, 1};
    return o;
}

} // namespace

TEST(Rfe, FullSizeKeepsEverything)
{
    const auto d = one_informative(30, 6, 2, 1);
    const auto m = rfe(d.x, d.y, 6, small_forest(1));
    EXPECT_EQ(m.count(), 6u);
    EXPECT_TRUE(rfe_trace(d.x, d.y, 6, small_forest(1)).eliminated.empty());
}

TEST(Rfe, FindsTheInformativeColumn)
{
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto signal = static_cast<Eigen::Index>(seed % 8);
        const auto d = one_informative(60, 8, signal, 100 + seed);
        const auto m = rfe(d.x, d.y, 1, small_forest(seed));
        hits += m[static_cast<std::size_t>(signal)] ? 1 : 0;
    }
    EXPECT_GE(hits, 19);
}

TEST(Rfe, ReturnsExactlyTheTargetCount)
{
    auto rng = make_rng(77, {});
    for (int t = 0; t < 15; ++t) {
        const auto cols = static_cast<Eigen::Index>(2 + uniform_index(rng, 12));
        const auto d = one_informative(24, cols, 0, 300 + static_cast<std::uint64_t>(t));
        const std::size_t n = 1 + uniform_index(rng, static_cast<std::size_t>(cols));
        const int step = 1 + static_cast<int>(uniform_index(rng, 4));
        EXPECT_EQ(rfe(d.x, d.y, n, small_forest(static_cast<std::uint64_t>(t), step)).count(), n);
    }
}

TEST(Rfe, SurvivorSetsAreNested)
{
    const auto d = one_informative(45, 10, 4, 5);
    const auto trace = rfe_trace(d.x, d.y, 1, small_forest(5));
    ASSERT_EQ(trace.eliminated.size(), 9u);
    for (std::size_t n = 1; n < 10; ++n) {
        const auto small = trace.survivors_at(n);
        const auto big = trace.survivors_at(n + 1);
        for (std::size_t j = 0; j < 10; ++j) {
            EXPECT_TRUE(!small[j] || big[j]);
        }
    }
    // a shorter run is a prefix of the longer one
    const auto partial = rfe_trace(d.x, d.y, 6, small_forest(5));
    ASSERT_EQ(partial.eliminated.size(), 4u);
    EXPECT_TRUE(std::equal(partial.eliminated.begin(), partial.eliminated.end(), trace.eliminated.begin()));
    EXPECT_EQ(rfe(d.x, d.y, 6, small_forest(5)), trace.survivors_at(6));
}

TEST(Rfe, LargerStepStopsAtTarget)
{
    const auto d = one_informative(30, 11, 0, 8);
    const auto trace = rfe_trace(d.x, d.y, 3, small_forest(8, 3));
    EXPECT_EQ(trace.eliminated.size(), 8u);
    EXPECT_EQ(trace.survivors_at(3).count(), 3u);
}

TEST(Rfe, Errors)
{
    const auto d = one_informative(12, 4, 0, 1);
    EXPECT_THROW(rfe(d.x, d.y, 0), InvalidArgument);
    EXPECT_THROW(rfe(d.x, d.y, 5), InvalidArgument);
    EXPECT_THROW(rfe(d.x, std::vector<int>(3, 0), 2), InvalidArgument);
    auto bad = small_forest(1);
    bad.step = 0;
    EXPECT_THROW(rfe(d.x, d.y, 2, bad), InvalidArgument);
    const auto trace = rfe_trace(d.x, d.y, 3, small_forest(1));
    EXPECT_THROW((void)trace.survivors_at(2), InvalidArgument);
}

TEST(RfeGrid, Sizes)
{
    EXPECT_EQ(rfe_size_grid(189), (std::vector<std::size_t>{5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 189}));
    EXPECT_EQ(rfe_size_grid(20), (std::vector<std::size_t>{5, 10, 20}));
    EXPECT_EQ(rfe_size_grid(7), (std::vector<std::size_t>{5, 7}));
    EXPECT_EQ(rfe_size_grid(3), (std::vector<std::size_t>{3}));
}

TEST(RfeCv, StratifiedFoldsAreBalanced)
{
    std::vector<int> y;
    for (int c = 0; c < 4; ++c) {
        for (int k = 0; k < 10 + 3 * c; ++k) {
            y.push_back(c);
        }
    }
    const auto fold = stratified_folds(y, 5, 9);
    std::map<std::pair<int, int>, int> per;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ASSERT_GE(fold[i], 0);
        ASSERT_LT(fold[i], 5);
        ++per[{y[i], fold[i]}];
    }
    for (int c = 0; c < 4; ++c) {
        int lo = 1 << 30;
        int hi = 0;
        for (int f = 0; f < 5; ++f) {
            lo = std::min(lo, per[{c, f}]);
            hi = std::max(hi, per[{c, f}]);
        }
        EXPECT_LE(hi - lo, 1);
    }
    EXPECT_EQ(stratified_folds(y, 5, 9), fold);
    EXPECT_NE(stratified_folds(y, 5, 10), fold);
}

TEST(RfeCv, ChoosesSmallSizeOnSeparableData)
{
    const auto d = one_informative(60, 12, 7, 3);
    const auto res = rfe_cv(d.x, d.y, 3, 0, small_forest(3));
    EXPECT_EQ(res.grid, (std::vector<std::size_t>{5, 10, 12}));
    ASSERT_EQ(res.mean_accuracy.size(), res.grid.size());
    EXPECT_EQ(res.mask.count(), res.chosen_size);
    EXPECT_LE(res.chosen_size, 10u);
    EXPECT_TRUE(res.mask[7]);
    EXPECT_GT(res.mean_accuracy[0], 0.9);
}

TEST(RfeCv, TwoFoldsAndThreadsAgree)
{
    const auto d = one_informative(30, 8, 1, 4);
    const auto a = rfe_cv(d.x, d.y, 2, 1, small_forest(4), 1);
    const auto b = rfe_cv(d.x, d.y, 2, 1, small_forest(4), 3);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.mean_accuracy, b.mean_accuracy);
    EXPECT_GE(a.chosen_size, 1u);
}

TEST(RfeCv, TooFewRowsPerClass)
{
    const auto d = one_informative(9, 4, 0, 1);
    EXPECT_THROW(rfe_cv(d.x, d.y, 5, 0, small_forest(1)), InvalidArgument);
    EXPECT_THROW(stratified_folds(d.y, 1, 0), InvalidArgument);
}
