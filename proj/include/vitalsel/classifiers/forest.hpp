#pragma once

// Random forest of unpruned Gini trees.
//
// Each tree sees a bootstrap sample of the training rows and, at every node,
// searches floor(sqrt(d)) randomly drawn features (constant features do not
// count against that budget). Nodes split on the best Gini gain and stop when
// pure, smaller than two samples, or when no split improves impurity.
// Tree t draws from the stream derived from (seed, t), so the fitted model
// does not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/core/random.hpp"

namespace vitalsel {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int class_index = 0; // majority class at this node
    int samples = 0;
    double gain = 0.0; // Gini decrease of the accepted split
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    template <typename Row>
    [[nodiscard]] int predict_class(const Row& row) const
    {
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& n = nodes[static_cast<std::size_t>(at)];
            at = row(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(at)].class_index;
    }

    [[nodiscard]] std::size_t split_count() const
    {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature >= 0; }));
    }
};

struct ForestConfig {
    int n_trees = 100;
    std::uint64_t seed = 0;
    int max_features = 0; // 0 = floor(sqrt(d))
    unsigned threads = 1;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::vector<int> classes; // sorted; trees vote with indices into this list
    std::vector<double> feature_importances;
    int n_features = 0;
    ForestConfig config;
};

namespace detail {

    class TreeBuilder {
    public:
        TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes, int max_features, Rng rng)
            : x_(x), y_(y), n_classes_(n_classes), max_features_(max_features), rng_(std::move(rng))
        {
        }

        DecisionTree build(std::vector<std::size_t> sample, std::vector<double>& importance)
        {
            DecisionTree tree;
            idx_ = std::move(sample);
            features_.resize(static_cast<std::size_t>(x_.cols()));
            std::iota(features_.begin(), features_.end(), 0);
            const double root = static_cast<double>(idx_.size());

            struct Pending {
                int node;
                std::size_t begin;
                std::size_t end;
            };
            std::vector<Pending> stack;
            tree.nodes.emplace_back();
            stack.push_back({0, 0, idx_.size()});
            std::vector<int> counts(static_cast<std::size_t>(n_classes_));

            while (!stack.empty()) {
                const auto [node_id, begin, end] = stack.back();
                stack.pop_back();
                std::fill(counts.begin(), counts.end(), 0);
                for (std::size_t i = begin; i < end; ++i) {
                    counts[static_cast<std::size_t>(y_[idx_[i]])]++;
                }
                auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
                node.samples = static_cast<int>(end - begin);
                node.class_index = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
                const bool pure = counts[static_cast<std::size_t>(node.class_index)] == node.samples;
                if (pure || end - begin < 2) {
                    continue;
                }

                const auto split = best_split(begin, end, counts);
                if (split.feature < 0) {
                    continue;
                }
                const auto mid = static_cast<std::size_t>(
                    std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin), idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                   [&](std::size_t r) {
                                       return x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold;
                                   }) -
                    idx_.begin());

                importance[static_cast<std::size_t>(split.feature)] += static_cast<double>(end - begin) / root * split.gain;
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& parent = tree.nodes[static_cast<std::size_t>(node_id)];
                parent.feature = split.feature;
                parent.threshold = split.threshold;
                parent.gain = split.gain;
                parent.left = left;
                parent.right = left + 1;
                stack.push_back({left + 1, mid, end});
                stack.push_back({left, begin, mid});
            }
            return tree;
        }

    private:
        struct Split {
            int feature = -1;
            double threshold = 0.0;
            double gain = 0.0;
        };

        Split best_split(std::size_t begin, std::size_t end, const std::vector<int>& parent_counts)
        {
            const std::size_t n = end - begin;
            const double nd = static_cast<double>(n);
            double parent_sq = 0.0;
            for (int c : parent_counts) {
                parent_sq += static_cast<double>(c) * c;
            }
            const double parent_gini = 1.0 - parent_sq / (nd * nd);

            Split best;
            std::vector<int> left(parent_counts.size());
            std::vector<int> right(parent_counts.size());
            int visited = 0;
            for (std::size_t f = 0; f < features_.size() && visited < max_features_; ++f) {
                // Lazy Fisher-Yates: features_[0..f) holds the ones drawn so far.
                std::swap(features_[f], features_[f + uniform_index(rng_, features_.size() - f)]);
                const int feat = features_[f];

                buf_.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t r = idx_[begin + i];
                    buf_[i] = {x_(static_cast<Eigen::Index>(r), feat), y_[r]};
                }
                std::sort(buf_.begin(), buf_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
                if (!(buf_.front().first < buf_.back().first)) {
                    continue; // constant here; does not use up the feature budget
                }
                ++visited;

                std::fill(left.begin(), left.end(), 0);
                std::copy(parent_counts.begin(), parent_counts.end(), right.begin());
                double left_sq = 0.0;
                double right_sq = parent_sq;
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const auto c = static_cast<std::size_t>(buf_[i].second);
                    left_sq += 2.0 * left[c] + 1.0;
                    ++left[c];
                    right_sq -= 2.0 * right[c] - 1.0;
                    --right[c];
                    if (!(buf_[i].first < buf_[i + 1].first)) {
                        continue;
                    }
                    const double nl = static_cast<double>(i + 1);
                    const double nr = nd - nl;
                    const double child = ((nl - left_sq / nl) + (nr - right_sq / nr)) / nd;
                    const double gain = parent_gini - child;
                    if (gain > best.gain + 1e-12) {
                        double thr = 0.5 * (buf_[i].first + buf_[i + 1].first);
                        if (!(thr < buf_[i + 1].first)) {
                            thr = buf_[i].first;
                        }
                        best = Split{feat, thr, gain};
                    }
                }
            }
            return best;
        }

        const Eigen::MatrixXd& x_;
        std::span<const int> y_;
        int n_classes_;
        int max_features_;
        Rng rng_;
        std::vector<std::size_t> idx_;
        std::vector<int> features_;
        std::vector<std::pair<double, int>> buf_;
    };

} // namespace detail

inline ForestModel forest_fit(const Eigen::MatrixXd& train, std::span<const int> labels, const ForestConfig& config = {})
{
    if (train.rows() == 0) {
        throw InvalidArgument("forest_fit: empty training set");
    }
    if (static_cast<std::size_t>(train.rows()) != labels.size()) {
        throw InvalidArgument("forest_fit: row and label counts differ");
    }
    if (config.n_trees < 1) {
        throw InvalidArgument("forest_fit: n_trees must be >= 1");
    }
    const auto d = static_cast<int>(train.cols());
    if (d < 1) {
        throw InvalidArgument("forest_fit: no feature columns");
    }

    ForestModel model;
    model.config = config;
    model.n_features = d;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y[i] = static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) - model.classes.begin());
    }

    const int mtry = config.max_features > 0 ? std::min(config.max_features, d)
                                             : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    const auto n = static_cast<std::size_t>(train.rows());
    const auto n_trees = static_cast<std::size_t>(config.n_trees);
    model.trees.resize(n_trees);
    std::vector<std::vector<double>> per_tree(n_trees, std::vector<double>(static_cast<std::size_t>(d), 0.0));

    parallel_for(n_trees, config.threads, [&](std::size_t t) {
        auto rng = make_rng(config.seed, {static_cast<std::uint64_t>(t)});
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) {
            s = uniform_index(rng, n);
        }
        detail::TreeBuilder builder(train, y, static_cast<int>(model.classes.size()), mtry, std::move(rng));
        model.trees[t] = builder.build(std::move(sample), per_tree[t]);
    });

    std::vector<double> imp(static_cast<std::size_t>(d), 0.0);
    for (const auto& t : per_tree) {
        for (std::size_t j = 0; j < imp.size(); ++j) {
            imp[j] += t[j] / static_cast<double>(n_trees);
        }
    }
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : imp) {
            v /= total;
        }
    } else {
        std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(d));
    }
    model.feature_importances = std::move(imp);
    return model;
}

// Majority vote across trees; ties go to the smallest label.
inline std::vector<int> forest_predict(const ForestModel& model, const Eigen::MatrixXd& rows)
{
    if (rows.cols() != model.n_features) {
        throw InvalidArgument("forest_predict: expected " + std::to_string(model.n_features) + " columns, got " +
                              std::to_string(rows.cols()));
    }
    std::vector<int> out(static_cast<std::size_t>(rows.rows()));
    std::vector<int> votes(model.classes.size());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        const auto row = rows.row(i);
        for (const auto& t : model.trees) {
            votes[static_cast<std::size_t>(t.predict_class(row))]++;
        }
        const auto best = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        out[static_cast<std::size_t>(i)] = model.classes[best];
    }
    return out;
}

// Mean decrease in impurity, normalized to sum 1; uniform when no tree split.
inline const std::vector<double>& feature_importances(const ForestModel& model)
{
    return model.feature_importances;
}

} // namespace vitalsel
