#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "vitalsel/classifiers/forest.hpp"
#include "vitalsel/classifiers/knn.hpp"
#include "vitalsel/classifiers/metrics.hpp"
#include "vitalsel/classifiers/model.hpp"
#include "vitalsel/core/random.hpp"

using namespace vitalsel;

namespace {

struct Labelled {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

Labelled blobs(int per_class, int classes, int dims, double spread, std::uint64_t seed)
{
    auto rng = make_rng(seed, {});
    Labelled d;
    d.x.resize(per_class * classes, dims);
    int r = 0;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++r) {
            for (int j = 0; j < dims; ++j) {
                d.x(r, j) = (j == c % dims ? 10.0 * (1 + c / dims) : 0.0) + gaussian(rng, 0.0, spread);
            }
            d.y.push_back(c);
        }
    }
    return d;
}

Labelled xor_data(int n, std::uint64_t seed)
{
    auto rng = make_rng(seed, {});
    Labelled d;
    d.x.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        d.x(i, 0) = uniform(rng, -1.0, 1.0);
        d.x(i, 1) = uniform(rng, -1.0, 1.0);
        d.y.push_back((d.x(i, 0) > 0) != (d.x(i, 1) > 0) ? 1 : 0);
    }
    return d;
}

// Sort every training row by (distance, label), vote among the first k.
int brute_knn(const Eigen::MatrixXd& x, const std::vector<int>& y, int k, const Eigen::RowVectorXd& q)
{
    std::vector<std::pair<double, int>> all;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        all.emplace_back((x.row(i) - q).norm(), y[static_cast<std::size_t>(i)]);
    }
    std::sort(all.begin(), all.end());
    std::map<int, int> count;
    std::map<int, double> dsum;
    for (int i = 0; i < k; ++i) {
        count[all[static_cast<std::size_t>(i)].second]++;
        dsum[all[static_cast<std::size_t>(i)].second] += all[static_cast<std::size_t>(i)].first;
    }
    int best = -1;
    for (const auto& [label, c] : count) {
        if (best < 0 || c > count[best] || (c == count[best] && dsum[label] < dsum[best])) {
            best = label;
        }
    }
    return best;
}

} // namespace

// ---- k-NN ----

TEST(Knn, SeparatedClustersAtCenters)
{
    const auto d = blobs(30, 2, 3, 0.5, 1);
    const auto m = knn_fit(d.x, d.y, 3);
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(2, 3);
    centers(0, 0) = 10.0;
    centers(1, 1) = 10.0;
    EXPECT_EQ(knn_predict(m, centers), (std::vector<int>{0, 1}));
}

TEST(Knn, SingleRowAndSelfQuery)
{
    Eigen::MatrixXd one(1, 2);
    one << 3, 4;
    const auto m = knn_fit(one, {7}, 1);
    Eigen::MatrixXd q(3, 2);
    q << 0, 0, 100, -5, 3, 4;
    EXPECT_EQ(knn_predict(m, q), (std::vector<int>{7, 7, 7}));

    const auto d = blobs(10, 3, 2, 3.0, 2);
    const auto m1 = knn_fit(d.x, d.y, 1);
    EXPECT_EQ(knn_predict(m1, d.x), d.y);
}

TEST(Knn, MatchesBruteForceVote)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = blobs(15, 4, 3, 6.0, 100 + seed);
        const auto q = blobs(5, 4, 3, 6.0, 200 + seed);
        for (int k : {1, 2, 3, 4, 7}) {
            const auto pred = knn_predict(knn_fit(d.x, d.y, k), q.x);
            for (Eigen::Index i = 0; i < q.x.rows(); ++i) {
                ASSERT_EQ(pred[static_cast<std::size_t>(i)], brute_knn(d.x, d.y, k, q.x.row(i))) << "seed " << seed << " k " << k;
            }
        }
    }
}

TEST(Knn, InvariantUnderTrainingPermutation)
{
    auto rng = make_rng(5, {});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto d = blobs(12, 3, 2, 8.0, seed);
        // integer coordinates force many exact distance ties
        d.x = d.x.array().round();
        const auto q = blobs(6, 3, 2, 8.0, 50 + seed).x.array().round().matrix();
        std::vector<std::size_t> perm(static_cast<std::size_t>(d.x.rows()));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd px = take_rows(d.x, perm);
        std::vector<int> py;
        for (auto i : perm) {
            py.push_back(d.y[i]);
        }
        for (int k : {1, 3, 5}) {
            for (auto metric : {Metric::Euclidean, Metric::Cosine}) {
                EXPECT_EQ(knn_predict(knn_fit(d.x, d.y, k, metric), q), knn_predict(knn_fit(px, py, k, metric), q));
            }
        }
    }
}

TEST(Knn, CosineIgnoresScale)
{
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 0, 1;
    const auto m = knn_fit(x, {0, 1}, 1, Metric::Cosine);
    Eigen::MatrixXd q(2, 2);
    q << 100, 1, 0.1, 5;
    EXPECT_EQ(knn_predict(m, q), (std::vector<int>{0, 1}));
}

TEST(Knn, Errors)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
    EXPECT_THROW(knn_fit(x, {0, 1, 0}, 4), InvalidArgument);
    EXPECT_THROW(knn_fit(x, {0, 1}, 1), InvalidArgument);
    EXPECT_THROW(knn_fit(Eigen::MatrixXd(0, 2), {}, 1), InvalidArgument);
    const auto m = knn_fit(x, {0, 1, 0}, 1);
    EXPECT_THROW(knn_predict(m, Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
}

// ---- forest ----

TEST(Forest, FitsXor)
{
    const auto d = xor_data(200, 3);
    const auto m = forest_fit(d.x, d.y, {100, 42});
    EXPECT_GT(accuracy(forest_predict(m, d.x), d.y), 0.95);
}

TEST(Forest, SingleClassIsConstant)
{
    const auto d = xor_data(30, 4);
    const std::vector<int> y(30, 5);
    const auto m = forest_fit(d.x, y, {10, 1});
    const auto pred = forest_predict(m, xor_data(20, 9).x);
    EXPECT_TRUE(std::all_of(pred.begin(), pred.end(), [](int v) { return v == 5; }));
    const auto& imp = feature_importances(m);
    EXPECT_DOUBLE_EQ(imp[0], 0.5);
    EXPECT_DOUBLE_EQ(imp[1], 0.5);
}

TEST(Forest, DeterministicGivenSeedAndThreads)
{
    const auto d = blobs(40, 3, 5, 4.0, 8);
    const auto held = blobs(10, 3, 5, 4.0, 9);
    const auto a = forest_fit(d.x, d.y, {30, 77, 0, 1});
    const auto b = forest_fit(d.x, d.y, {30, 77, 0, 3});
    EXPECT_EQ(forest_predict(a, held.x), forest_predict(b, held.x));
    EXPECT_EQ(feature_importances(a), feature_importances(b));
    const auto c = forest_fit(d.x, d.y, {30, 78, 0, 1});
    EXPECT_NE(feature_importances(a), feature_importances(c));
}

TEST(Forest, ImportancesSumToOne)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto d = blobs(20, 3, 6, 5.0, seed);
        const auto m = forest_fit(d.x, d.y, {20, seed});
        const auto& imp = feature_importances(m);
        EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-9);
        for (double v : imp) {
            EXPECT_GE(v, 0.0);
        }
    }
}

TEST(Forest, InformativeFeatureDominatesImportance)
{
    auto rng = make_rng(12, {});
    Eigen::MatrixXd x(300, 6);
    std::vector<int> y;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            x(i, j) = gaussian(rng);
        }
        y.push_back(x(i, 0) > 0 ? 1 : 0);
    }
    const auto imp = feature_importances(forest_fit(x, y, {100, 1}));
    EXPECT_GT(imp[0], 0.5);
}

TEST(Forest, EverySplitHasPositiveGain)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto rng = make_rng(seed, {1});
        Eigen::MatrixXd x(80, 4);
        std::vector<int> y;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                x(i, j) = std::round(gaussian(rng) * 2.0);
            }
            y.push_back(static_cast<int>(uniform_index(rng, 3)));
        }
        const auto m = forest_fit(x, y, {15, seed});
        for (const auto& t : m.trees) {
            for (const auto& n : t.nodes) {
                if (n.feature >= 0) {
                    ASSERT_GT(n.gain, 0.0);
                }
            }
        }
    }
}

TEST(Forest, MaxFeaturesOneStillLearns)
{
    const auto d = blobs(30, 4, 4, 1.0, 6);
    const auto m = forest_fit(d.x, d.y, {50, 2, 1, 1});
    EXPECT_GT(accuracy(forest_predict(m, d.x), d.y), 0.95);
}

TEST(Forest, Errors)
{
    EXPECT_THROW(forest_fit(Eigen::MatrixXd(0, 2), {}, {}), InvalidArgument);
    EXPECT_THROW(forest_fit(Eigen::MatrixXd::Zero(2, 2), std::vector<int>{0}, {}), InvalidArgument);
    const auto d = xor_data(20, 1);
    const auto m = forest_fit(d.x, d.y, {5, 1});
    EXPECT_THROW(forest_predict(m, Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
}

// ---- metrics ----

TEST(Metrics, Accuracy)
{
    const std::vector<int> a{0, 0, 1};
    const std::vector<int> b{0, 1, 1};
    EXPECT_DOUBLE_EQ(accuracy(a, a), 1.0);
    EXPECT_DOUBLE_EQ(accuracy(std::vector<int>{0, 0}, std::vector<int>{1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(accuracy(a, b), 2.0 / 3.0);
    EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), InvalidArgument);
    EXPECT_THROW(accuracy(a, std::vector<int>{0}), InvalidArgument);
}

TEST(Metrics, ConfusionRowsAreTruth)
{
    const std::vector<int> pred{0, 1, 1, 2};
    const std::vector<int> truth{0, 0, 1, 2};
    const auto cm = confusion(pred, truth, {0, 1, 2});
    EXPECT_EQ(cm.counts[0][1], 1);
    EXPECT_EQ(cm.counts[1][0], 0);
    EXPECT_EQ(cm.total(), 4);
    EXPECT_EQ(cm.trace(), 3);
    EXPECT_DOUBLE_EQ(cm.accuracy(), accuracy(pred, truth));
    const auto norm = cm.row_normalized();
    EXPECT_DOUBLE_EQ(norm[0][0], 0.5);
    EXPECT_DOUBLE_EQ(norm[2][2], 1.0);
    EXPECT_EQ(confusion_csv(cm), "truth\\pred,0,1,2\n0,1,1,0\n1,0,1,0\n2,0,0,1\n");
}

TEST(Metrics, ConfusionTraceMatchesAccuracyOnRandomLabels)
{
    auto rng = make_rng(4, {});
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 60);
        std::vector<int> p(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<int>(uniform_index(rng, 4));
            y[i] = static_cast<int>(uniform_index(rng, 4));
        }
        const auto cm = confusion(p, y, {0, 1, 2, 3});
        EXPECT_NEAR(static_cast<double>(cm.trace()) / static_cast<double>(cm.total()), accuracy(p, y), 1e-12);
    }
}
