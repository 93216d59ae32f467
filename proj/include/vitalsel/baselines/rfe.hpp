#pragma once

// Recursive feature elimination driven by forest impurity importances, with a
// fixed target size or a size picked by stratified k-fold cross-validation.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/classifiers/forest.hpp"
#include "vitalsel/classifiers/metrics.hpp"
#include "vitalsel/classifiers/model.hpp"
#include "vitalsel/core/error.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/core/random.hpp"
#include "vitalsel/nsga2/mask.hpp"

namespace vitalsel {

struct RfeOptions {
    int step = 1;
    ForestConfig forest{100, 0x5eed, 0, 1};
};

// Order in which features left the survivor set. The first d - n entries
// removed give exactly the mask rfe() returns for target n.
struct RfeTrace {
    std::size_t n_features = 0;
    std::vector<std::size_t> eliminated;

    [[nodiscard]] FeatureMask survivors_at(std::size_t n) const
    {
        require(n >= 1 && n <= n_features, "RfeTrace: size out of range");
        require(n_features - n <= eliminated.size(), "RfeTrace: trace stops before that size");
        FeatureMask m(n_features, true);
        for (std::size_t i = 0; i < n_features - n; ++i) {
            m.set(eliminated[i], false);
        }
        return m;
    }
};

// Runs elimination until n_stop features survive.
inline RfeTrace rfe_trace(const Eigen::MatrixXd& train, std::span<const int> labels, std::size_t n_stop, const RfeOptions& opts = {})
{
    const auto d = static_cast<std::size_t>(train.cols());
    if (n_stop < 1 || n_stop > d) {
        throw InvalidArgument("rfe: n_target must lie in [1, " + std::to_string(d) + "], got " + std::to_string(n_stop));
    }
    require(opts.step >= 1, "rfe: step must be >= 1");
    require(static_cast<std::size_t>(train.rows()) == labels.size(), "rfe: label count differs from row count");

    RfeTrace trace;
    trace.n_features = d;
    std::vector<std::size_t> alive(d);
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    while (alive.size() > n_stop) {
        const auto model = forest_fit(take_columns(train, alive), labels, opts.forest);
        const auto& imp = feature_importances(model);
        std::vector<std::size_t> order(alive.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return imp[a] < imp[b] || (imp[a] == imp[b] && alive[a] < alive[b]);
        });
        const std::size_t drop = std::min<std::size_t>(static_cast<std::size_t>(opts.step), alive.size() - n_stop);
        std::vector<char> gone(alive.size(), 0);
        for (std::size_t i = 0; i < drop; ++i) {
            gone[order[i]] = 1;
            trace.eliminated.push_back(alive[order[i]]);
        }
        std::vector<std::size_t> next;
        next.reserve(alive.size() - drop);
        for (std::size_t i = 0; i < alive.size(); ++i) {
            if (gone[i] == 0) {
                next.push_back(alive[i]);
            }
        }
        alive = std::move(next);
    }
    return trace;
}

inline FeatureMask rfe(const Eigen::MatrixXd& train, std::span<const int> labels, std::size_t n_target, const RfeOptions& opts = {})
{
    return rfe_trace(train, labels, n_target, opts).survivors_at(n_target);
}

// {5, 10, 20, 30, ...} below d, then d itself.
inline std::vector<std::size_t> rfe_size_grid(std::size_t d)
{
    std::vector<std::size_t> grid;
    for (std::size_t s : {std::size_t{5}, std::size_t{10}}) {
        if (s < d) {
            grid.push_back(s);
        }
    }
    for (std::size_t s = 20; s < d; s += 10) {
        grid.push_back(s);
    }
    grid.push_back(d);
    return grid;
}

// Each class's rows are shuffled and dealt round-robin into the folds.
inline std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed)
{
    require(folds >= 2, "stratified_folds: folds must be >= 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    std::vector<int> fold(labels.size(), 0);
    for (auto& [cls, rows] : by_class) {
        if (rows.size() < static_cast<std::size_t>(folds)) {
            throw InvalidArgument("rfe_cv: class " + std::to_string(cls) + " has " + std::to_string(rows.size()) + " rows, fewer than " +
                                  std::to_string(folds) + " folds");
        }
        auto rng = make_rng(seed, {0x666f6c64, static_cast<std::uint64_t>(static_cast<std::int64_t>(cls))});
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            fold[rows[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
        }
    }
    return fold;
}

struct RfeCvResult {
    FeatureMask mask;
    std::size_t chosen_size = 0;
    std::vector<std::size_t> grid;
    std::vector<double> mean_accuracy; // aligned with grid
};

inline RfeCvResult rfe_cv(const Eigen::MatrixXd& train, std::span<const int> labels, int folds = 5, std::uint64_t seed = 0,
                          const RfeOptions& opts = {}, unsigned threads = 1)
{
    const auto d = static_cast<std::size_t>(train.cols());
    require(d >= 1, "rfe_cv: no features");
    const auto fold_of = stratified_folds(labels, folds, seed);
    RfeCvResult res;
    res.grid = rfe_size_grid(d);

    std::vector<std::vector<double>> acc(static_cast<std::size_t>(folds), std::vector<double>(res.grid.size(), 0.0));
    parallel_for(static_cast<std::size_t>(folds), threads, [&](std::size_t f) {
        std::vector<std::size_t> tr;
        std::vector<std::size_t> te;
        for (std::size_t i = 0; i < fold_of.size(); ++i) {
            (fold_of[i] == static_cast<int>(f) ? te : tr).push_back(i);
        }
        const Eigen::MatrixXd xtr = take_rows(train, tr);
        const Eigen::MatrixXd xte = take_rows(train, te);
        std::vector<int> ytr;
        std::vector<int> yte;
        for (auto i : tr) {
            ytr.push_back(labels[i]);
        }
        for (auto i : te) {
            yte.push_back(labels[i]);
        }
        const auto trace = rfe_trace(xtr, ytr, res.grid.front(), opts);
        for (std::size_t g = 0; g < res.grid.size(); ++g) {
            const auto cols = trace.survivors_at(res.grid[g]).indices();
            const auto model = forest_fit(take_columns(xtr, cols), ytr, opts.forest);
            acc[f][g] = accuracy(forest_predict(model, take_columns(xte, cols)), yte);
        }
    });

    res.mean_accuracy.assign(res.grid.size(), 0.0);
    for (const auto& row : acc) {
        for (std::size_t g = 0; g < row.size(); ++g) {
            res.mean_accuracy[g] += row[g] / static_cast<double>(folds);
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < res.grid.size(); ++g) {
        if (res.mean_accuracy[g] > res.mean_accuracy[best]) {
            best = g;
        }
    }
    res.chosen_size = res.grid[best];
    res.mask = rfe(train, labels, res.chosen_size, opts);
    return res;
}

} // namespace vitalsel
