#pragma once

// Dual-model fitness. For a mask, one model learns activities from the
// training subjects and is scored on the evaluation group (a_R); a second
// model learns the evaluation group's identities from sitting windows and is
// scored on their lying windows (a_I). The objective triple rewards a_R,
// penalizes a_I and rewards their gap; the suppress-activity mode swaps the
// two roles.

#include <algorithm>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/classifiers/metrics.hpp"
#include "vitalsel/classifiers/model.hpp"
#include "vitalsel/core/error.hpp"
#include "vitalsel/evalproto/split.hpp"
#include "vitalsel/features/feature_matrix.hpp"
#include "vitalsel/fitness/pca.hpp"
#include "vitalsel/nsga2/mask.hpp"
#include "vitalsel/nsga2/nsga2.hpp"
#include "vitalsel/preprocess.hpp"

namespace vitalsel {

// Selection scores recognition and identification on the validation group;
// Report uses the test group. The two are never mixed in one context.
enum class Stage { Selection, Report };

// The forest of the task being suppressed draws a single candidate feature per
// split. With the default sqrt(d) draw, one strongly identifying feature among
// many keeps its accuracy pinned at the ceiling, and the search sees no slope.
struct FitnessOptions {
    ClassifierSpec recognition{ClassifierKind::Forest, ForestConfig{100, 0x5eed, 0, 1}, 3, Metric::Euclidean};
    ClassifierSpec identification{ClassifierKind::Forest, ForestConfig{100, 0x5eed, 1, 1}, 3, Metric::Euclidean};
    bool surrogate = false;
    int pca_dims = 5;
    int surrogate_k = 3;
    int recognition_stride = 1; // keep every n-th training window for the recognition model
    ObjectiveMode objective_mode = ObjectiveMode::SuppressIdentity;
};

// One supervised task: standardized training and evaluation rows.
struct TaskData {
    Eigen::MatrixXd train;
    std::vector<int> train_labels;
    Eigen::MatrixXd test;
    std::vector<int> test_labels;
};

struct TaskAccuracies {
    double recognition = 0.0;
    double identification = 0.0;
};

inline FitnessOptions fitness_options(ObjectiveMode mode)
{
    FitnessOptions o;
    o.objective_mode = mode;
    const bool hide_activity = mode == ObjectiveMode::SuppressActivity;
    o.recognition.forest.max_features = hide_activity ? 1 : 0;
    o.identification.forest.max_features = hide_activity ? 0 : 1;
    return o;
}

inline Objectives objectives_from(double a_r, double a_i, ObjectiveMode mode)
{
    if (mode == ObjectiveMode::SuppressActivity) {
        return {a_i, 1.0 - a_r, a_i - a_r};
    }
    return {a_r, 1.0 - a_i, a_r - a_i};
}

namespace detail {

    inline TaskData make_task(const FeatureMatrix& data, const std::vector<std::size_t>& train_rows,
                              const std::vector<std::size_t>& test_rows, bool identity_labels)
    {
        if (train_rows.empty() || test_rows.empty()) {
            throw DataError("fitness: a task has no training or no evaluation rows");
        }
        auto label_of = [&](std::size_t r) {
            const auto& l = data.labels()[r];
            return identity_labels ? l.subject : static_cast<int>(l.activity);
        };
        TaskData t;
        const Eigen::MatrixXd train = take_rows(data.values(), train_rows);
        const Scaler scaler = fit_scaler(train);
        t.train = apply_scaler(scaler, train);
        t.test = apply_scaler(scaler, take_rows(data.values(), test_rows));
        for (auto r : train_rows) {
            t.train_labels.push_back(label_of(r));
        }
        for (auto r : test_rows) {
            t.test_labels.push_back(label_of(r));
        }
        return t;
    }

} // namespace detail

// Immutable snapshot of the data a fitness call needs; safe to share between threads.
class FitnessContext {
public:
    static FitnessContext build(const FeatureMatrix& data, const SplitSpec& split, Stage stage, FitnessOptions options = {})
    {
        if (!split.disjoint()) {
            throw InvalidArgument("FitnessContext: train, validation and test subjects overlap");
        }
        require(options.recognition_stride >= 1, "FitnessContext: recognition_stride must be >= 1");
        require(options.pca_dims >= 1, "FitnessContext: pca_dims must be >= 1");
        const auto& group = stage == Stage::Selection ? split.validation_subjects : split.test_subjects;
        const std::set<int> train_set(split.train_subjects.begin(), split.train_subjects.end());
        const std::set<int> group_set(group.begin(), group.end());

        std::vector<std::size_t> recog_train;
        std::vector<std::size_t> recog_test;
        std::vector<std::size_t> ident_train;
        std::vector<std::size_t> ident_test;
        std::size_t seen_train = 0;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const auto& l = data.labels()[r];
            if (train_set.contains(l.subject)) {
                if (seen_train++ % static_cast<std::size_t>(options.recognition_stride) == 0) {
                    recog_train.push_back(r);
                }
            } else if (group_set.contains(l.subject)) {
                recog_test.push_back(r);
                (l.position == Position::Sitting ? ident_train : ident_test).push_back(r);
            }
        }
        FitnessContext ctx;
        ctx.names_ = data.names();
        ctx.options_ = options;
        ctx.stage_ = stage;
        ctx.recognition_ = std::make_shared<const TaskData>(detail::make_task(data, recog_train, recog_test, false));
        ctx.identification_ = std::make_shared<const TaskData>(detail::make_task(data, ident_train, ident_test, true));
        return ctx;
    }

    [[nodiscard]] const TaskData& recognition() const { return *recognition_; }
    [[nodiscard]] const TaskData& identification() const { return *identification_; }
    [[nodiscard]] const FitnessOptions& options() const { return options_; }
    [[nodiscard]] Stage stage() const { return stage_; }
    [[nodiscard]] std::size_t n_features() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    FitnessOptions options_;
    Stage stage_ = Stage::Selection;
    std::shared_ptr<const TaskData> recognition_;
    std::shared_ptr<const TaskData> identification_;
};

namespace detail {

    inline std::vector<std::size_t> checked_columns(const FeatureMask& mask, const FitnessContext& ctx)
    {
        if (mask.size() != ctx.n_features()) {
            throw InvalidArgument("fitness: mask has " + std::to_string(mask.size()) + " bits but the catalog has " +
                                  std::to_string(ctx.n_features()) + " features");
        }
        return mask.indices();
    }

    inline double task_accuracy(const TaskData& t, std::span<const std::size_t> cols, const ClassifierSpec& spec)
    {
        const auto pred = fit_predict(spec, take_columns(t.train, cols), t.train_labels, take_columns(t.test, cols));
        return accuracy(pred, t.test_labels);
    }

    // PCA fitted on the task's training rows, then k-NN in the reduced space.
    inline double surrogate_accuracy(const TaskData& t, std::span<const std::size_t> cols, int pca_dims, int k)
    {
        const Eigen::MatrixXd train = take_columns(t.train, cols);
        const int dims = std::min({pca_dims, static_cast<int>(cols.size()), static_cast<int>(train.rows())});
        const PcaModel pca = pca_fit(train, dims);
        const ClassifierSpec knn{ClassifierKind::Knn, {}, k, Metric::Euclidean};
        const auto pred = fit_predict(knn, pca_transform(pca, train), t.train_labels, pca_transform(pca, take_columns(t.test, cols)));
        return accuracy(pred, t.test_labels);
    }

} // namespace detail

// Accuracies of the full (forest) models on the masked columns.
inline TaskAccuracies accuracies(const FeatureMask& mask, const FitnessContext& ctx)
{
    const auto cols = detail::checked_columns(mask, ctx);
    require(!cols.empty(), "fitness: empty mask");
    return {detail::task_accuracy(ctx.recognition(), cols, ctx.options().recognition),
            detail::task_accuracy(ctx.identification(), cols, ctx.options().identification)};
}

inline TaskAccuracies surrogate_accuracies(const FeatureMask& mask, const FitnessContext& ctx)
{
    const auto cols = detail::checked_columns(mask, ctx);
    require(!cols.empty(), "fitness: empty mask");
    const auto& o = ctx.options();
    return {detail::surrogate_accuracy(ctx.recognition(), cols, o.pca_dims, o.surrogate_k),
            detail::surrogate_accuracy(ctx.identification(), cols, o.pca_dims, o.surrogate_k)};
}

inline const Objectives& penalty_objectives()
{
    static const Objectives p{0.0, 0.0, -1.0};
    return p;
}

inline Objectives evaluate(const FeatureMask& mask, const FitnessContext& ctx)
{
    if (detail::checked_columns(mask, ctx).empty()) {
        return penalty_objectives();
    }
    const auto a = accuracies(mask, ctx);
    return objectives_from(a.recognition, a.identification, ctx.options().objective_mode);
}

inline Objectives evaluate_surrogate(const FeatureMask& mask, const FitnessContext& ctx)
{
    if (detail::checked_columns(mask, ctx).empty()) {
        return penalty_objectives();
    }
    const auto a = surrogate_accuracies(mask, ctx);
    return objectives_from(a.recognition, a.identification, ctx.options().objective_mode);
}

// The fitness the GA calls: surrogate or full, as configured.
inline FitnessFunction make_fitness(const FitnessContext& ctx)
{
    if (ctx.options().surrogate) {
        return [&ctx](const FeatureMask& m) { return evaluate_surrogate(m, ctx); };
    }
    return [&ctx](const FeatureMask& m) { return evaluate(m, ctx); };
}

} // namespace vitalsel
