#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

enum class Metric { Euclidean, Cosine };

struct KnnModel {
    Eigen::MatrixXd rows;
    std::vector<int> labels;
    int k = 3;
    Metric metric = Metric::Euclidean;
};

inline KnnModel knn_fit(Eigen::MatrixXd train, std::vector<int> labels, int k = 3, Metric metric = Metric::Euclidean)
{
    if (train.rows() == 0) {
        throw InvalidArgument("knn_fit: empty training set");
    }
    if (static_cast<std::size_t>(train.rows()) != labels.size()) {
        throw InvalidArgument("knn_fit: row and label counts differ");
    }
    if (k < 1 || k > train.rows()) {
        throw InvalidArgument("knn_fit: k must be in [1, training size]");
    }
    return KnnModel{std::move(train), std::move(labels), k, metric};
}

namespace detail {
    inline double knn_distance(const KnnModel& m, Eigen::Index train_row, const Eigen::MatrixXd& q, Eigen::Index query_row)
    {
        const Eigen::Index d = q.cols();
        if (m.metric == Metric::Euclidean) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = m.rows(train_row, j) - q(query_row, j);
                s += diff * diff;
            }
            return std::sqrt(s);
        }
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double a = m.rows(train_row, j);
            const double b = q(query_row, j);
            dot += a * b;
            na += a * a;
            nb += b * b;
        }
        const double cos = (na > 0.0 && nb > 0.0) ? dot / std::sqrt(na * nb) : 0.0;
        return 1.0 - cos;
    }
} // namespace detail

// Majority vote among the k nearest rows. Neighbours are ranked by
// (distance, label), so the result does not depend on training-row order.
// Vote ties go to the class with the smallest summed distance, then the
// smallest label.
inline std::vector<int> knn_predict(const KnnModel& m, const Eigen::MatrixXd& queries)
{
    if (queries.cols() != m.rows.cols()) {
        throw InvalidArgument("knn_predict: query dimension " + std::to_string(queries.cols()) + " does not match training dimension " +
                              std::to_string(m.rows.cols()));
    }
    const auto n = static_cast<std::size_t>(m.rows.rows());
    const auto k = static_cast<std::size_t>(m.k);
    std::vector<int> out(static_cast<std::size_t>(queries.rows()));
    std::vector<std::pair<double, int>> dist(n);
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = {detail::knn_distance(m, static_cast<Eigen::Index>(i), queries, q), m.labels[i]};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::map<int, std::pair<int, double>> votes; // label -> (count, summed distance)
        for (std::size_t i = 0; i < k; ++i) {
            auto& v = votes[dist[i].second];
            v.first += 1;
            v.second += dist[i].first;
        }
        int best = votes.begin()->first;
        auto best_vote = votes.begin()->second;
        for (const auto& [label, v] : votes) {
            if (v.first > best_vote.first || (v.first == best_vote.first && v.second < best_vote.second)) {
                best = label;
                best_vote = v;
            }
        }
        out[static_cast<std::size_t>(q)] = best;
    }
    return out;
}

} // namespace vitalsel
