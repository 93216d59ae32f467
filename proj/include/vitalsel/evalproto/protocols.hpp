#pragma once

// Evaluation protocols: a single 42/4/4 split, leave-one-group-out with
// repeated random 4-subject groups, leave-one-subject-out, and the GA
// parameter sweep. Each protocol trains its own models from the raw rows and
// shares no code with the fitness path, so the two can be checked against
// each other.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vitalsel/classifiers/metrics.hpp"
#include "vitalsel/classifiers/model.hpp"
#include "vitalsel/core/error.hpp"
#include "vitalsel/core/format.hpp"
#include "vitalsel/core/parallel.hpp"
#include "vitalsel/core/random.hpp"
#include "vitalsel/evalproto/split.hpp"
#include "vitalsel/features/feature_matrix.hpp"
#include "vitalsel/fitness/fitness.hpp"
#include "vitalsel/nsga2/mask.hpp"
#include "vitalsel/nsga2/nsga2.hpp"
#include "vitalsel/preprocess.hpp"

namespace vitalsel {

enum class Protocol { Logo, Loso, Split };

inline std::string_view to_string(Protocol p)
{
    switch (p) {
    case Protocol::Logo:
        return "logo";
    case Protocol::Loso:
        return "loso";
    case Protocol::Split:
        return "split";
    }
    return "?";
}

inline Protocol parse_protocol(std::string_view s)
{
    if (s == "logo") {
        return Protocol::Logo;
    }
    if (s == "loso") {
        return Protocol::Loso;
    }
    if (s == "split") {
        return Protocol::Split;
    }
    throw InvalidArgument("unknown protocol '" + std::string(s) + "' (expected logo, loso or split)");
}

struct EvalOptions {
    ClassifierSpec recognition;
    ClassifierSpec identification;
    int recognition_stride = 1;
    int repeats = 20;
    int group_size = 4;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Same models and row thinning the fitness uses, so reported numbers are comparable.
inline EvalOptions eval_options(const FitnessOptions& f)
{
    EvalOptions o;
    o.recognition = f.recognition;
    o.identification = f.identification;
    o.recognition_stride = f.recognition_stride;
    return o;
}

struct RunResult {
    std::vector<int> group;
    double recognition = 0.0;
    double identification = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
    Protocol protocol = Protocol::Logo;
    std::size_t n_features = 0;
    std::vector<RunResult> runs;
    double recognition_accuracy = 0.0;
    std::optional<double> identification_accuracy;
    ConfusionMatrix recognition_confusion;
    std::optional<ConfusionMatrix> identification_confusion;
    double wall_seconds = 0.0;
};

namespace detail {

    struct GroupOutcome {
        double recognition = 0.0;
        double identification = std::numeric_limits<double>::quiet_NaN();
        ConfusionMatrix recognition_cm;
        std::optional<ConfusionMatrix> identification_cm;
    };

    inline std::vector<int> activity_labels()
    {
        return {0, 1, 2, 3};
    }

    inline std::vector<int> standardized_predict(const ClassifierSpec& spec, const Eigen::MatrixXd& train, const std::vector<int>& y,
                                                 const Eigen::MatrixXd& test)
    {
        const Scaler s = fit_scaler(train);
        return fit_predict(spec, apply_scaler(s, train), y, apply_scaler(s, test));
    }

    // Recognition: train subjects -> group. Identification: group sitting -> group lying.
    inline GroupOutcome evaluate_group(const FeatureMatrix& data, const Eigen::MatrixXd& x, const std::vector<int>& train_subjects,
                                       const std::vector<int>& group, const std::vector<int>& all_subjects, const EvalOptions& opts,
                                       bool with_identification)
    {
        const std::set<int> train_set(train_subjects.begin(), train_subjects.end());
        const std::set<int> group_set(group.begin(), group.end());
        for (int s : group) {
            if (train_set.contains(s)) {
                throw std::logic_error("evaluation: subject " + std::to_string(s) + " is in both train and test");
            }
        }
        std::vector<std::size_t> tr;
        std::vector<std::size_t> te;
        std::vector<std::size_t> sit;
        std::vector<std::size_t> lie;
        std::size_t seen = 0;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const auto& l = data.labels()[r];
            if (train_set.contains(l.subject)) {
                if (seen++ % static_cast<std::size_t>(opts.recognition_stride) == 0) {
                    tr.push_back(r);
                }
            } else if (group_set.contains(l.subject)) {
                te.push_back(r);
                (l.position == Position::Sitting ? sit : lie).push_back(r);
            }
        }
        if (tr.empty() || te.empty()) {
            throw DataError("evaluation: no training or no test rows");
        }
        auto activities = [&](const std::vector<std::size_t>& rows) {
            std::vector<int> y;
            y.reserve(rows.size());
            for (auto r : rows) {
                y.push_back(static_cast<int>(data.labels()[r].activity));
            }
            return y;
        };
        auto subjects = [&](const std::vector<std::size_t>& rows) {
            std::vector<int> y;
            y.reserve(rows.size());
            for (auto r : rows) {
                y.push_back(data.labels()[r].subject);
            }
            return y;
        };

        GroupOutcome out;
        const auto y_te = activities(te);
        const auto pred = standardized_predict(opts.recognition, take_rows(x, tr), activities(tr), take_rows(x, te));
        out.recognition = accuracy(pred, y_te);
        out.recognition_cm = confusion(pred, y_te, activity_labels());

        if (with_identification) {
            if (sit.empty() || lie.empty()) {
                throw DataError("evaluation: held-out group lacks sitting or lying rows");
            }
            const auto y_lie = subjects(lie);
            const auto ipred = standardized_predict(opts.identification, take_rows(x, sit), subjects(sit), take_rows(x, lie));
            out.identification = accuracy(ipred, y_lie);
            out.identification_cm = confusion(ipred, y_lie, all_subjects);
        }
        return out;
    }

    inline Eigen::MatrixXd masked_values(const FeatureMatrix& data, const std::optional<FeatureMask>& mask)
    {
        if (!mask) {
            return data.values();
        }
        if (mask->size() != data.cols()) {
            throw InvalidArgument("evaluation: mask has " + std::to_string(mask->size()) + " bits but the data has " +
                                  std::to_string(data.cols()) + " features");
        }
        if (mask->none()) {
            throw InvalidArgument("evaluation: empty mask");
        }
        return take_columns(data.values(), mask->indices());
    }

    inline ExperimentReport aggregate(Protocol protocol, std::size_t n_features, std::vector<std::vector<int>> groups,
                                      std::vector<GroupOutcome> outcomes, bool with_identification)
    {
        ExperimentReport rep;
        rep.protocol = protocol;
        rep.n_features = n_features;
        double r_sum = 0.0;
        double i_sum = 0.0;
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
            auto& o = outcomes[k];
            rep.runs.push_back({std::move(groups[k]), o.recognition, o.identification});
            r_sum += o.recognition;
            if (k == 0) {
                rep.recognition_confusion = o.recognition_cm;
            } else {
                rep.recognition_confusion += o.recognition_cm;
            }
            if (with_identification) {
                i_sum += o.identification;
                if (k == 0) {
                    rep.identification_confusion = *o.identification_cm;
                } else {
                    *rep.identification_confusion += *o.identification_cm;
                }
            }
        }
        const auto n = static_cast<double>(outcomes.size());
        rep.recognition_accuracy = r_sum / n;
        if (with_identification) {
            rep.identification_accuracy = i_sum / n;
        }
        return rep;
    }

    inline double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

} // namespace detail

// Leave-one-group-out: each repeat shuffles the subjects, holds out one group
// and trains recognition on everyone else.
inline ExperimentReport run_logo(const FeatureMatrix& data, const std::optional<FeatureMask>& mask, const EvalOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    require(opts.repeats >= 1, "run_logo: repeats must be >= 1");
    require(opts.group_size >= 1, "run_logo: group_size must be >= 1");
    require(opts.recognition_stride >= 1, "run_logo: recognition_stride must be >= 1");
    const auto subjects = data.subjects();
    if (subjects.size() < 2 * static_cast<std::size_t>(opts.group_size)) {
        throw InvalidArgument("run_logo: need at least two groups of " + std::to_string(opts.group_size) + " subjects, have " +
                              std::to_string(subjects.size()));
    }
    const Eigen::MatrixXd x = detail::masked_values(data, mask);
    const auto reps = static_cast<std::size_t>(opts.repeats);
    std::vector<std::vector<int>> groups(reps);
    std::vector<std::vector<int>> trains(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        auto ids = subjects;
        auto rng = make_rng(opts.seed, {0x6c6f676fULL, r});
        std::shuffle(ids.begin(), ids.end(), rng);
        groups[r].assign(ids.begin(), ids.begin() + opts.group_size);
        trains[r].assign(ids.begin() + opts.group_size, ids.end());
        std::sort(groups[r].begin(), groups[r].end());
        std::sort(trains[r].begin(), trains[r].end());
    }
    std::vector<detail::GroupOutcome> outcomes(reps);
    parallel_for(reps, opts.threads, [&](std::size_t r) {
        outcomes[r] = detail::evaluate_group(data, x, trains[r], groups[r], subjects, opts, true);
    });
    auto rep = detail::aggregate(Protocol::Logo, static_cast<std::size_t>(x.cols()), std::move(groups), std::move(outcomes), true);
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

// One fold per subject; recognition only, since a lone subject has no identity task.
inline ExperimentReport run_loso(const FeatureMatrix& data, const std::optional<FeatureMask>& mask, const EvalOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    require(opts.recognition_stride >= 1, "run_loso: recognition_stride must be >= 1");
    const auto subjects = data.subjects();
    if (subjects.size() < 2) {
        throw InvalidArgument("run_loso: need at least two subjects");
    }
    const Eigen::MatrixXd x = detail::masked_values(data, mask);
    std::vector<std::vector<int>> groups(subjects.size());
    std::vector<std::vector<int>> trains(subjects.size());
    for (std::size_t k = 0; k < subjects.size(); ++k) {
        groups[k] = {subjects[k]};
        for (int s : subjects) {
            if (s != subjects[k]) {
                trains[k].push_back(s);
            }
        }
    }
    std::vector<detail::GroupOutcome> outcomes(subjects.size());
    parallel_for(subjects.size(), opts.threads, [&](std::size_t k) {
        outcomes[k] = detail::evaluate_group(data, x, trains[k], groups[k], subjects, opts, false);
    });
    auto rep = detail::aggregate(Protocol::Loso, static_cast<std::size_t>(x.cols()), std::move(groups), std::move(outcomes), false);
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

// The fixed split: recognition trained on the split's training subjects,
// both tasks scored on its test group.
inline ExperimentReport run_split(const FeatureMatrix& data, const SplitSpec& split, const std::optional<FeatureMask>& mask,
                                  const EvalOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    require(opts.recognition_stride >= 1, "run_split: recognition_stride must be >= 1");
    if (!split.disjoint()) {
        throw InvalidArgument("run_split: split parts overlap");
    }
    const Eigen::MatrixXd x = detail::masked_values(data, mask);
    std::vector<detail::GroupOutcome> outcomes{
        detail::evaluate_group(data, x, split.train_subjects, split.test_subjects, data.subjects(), opts, true)};
    auto rep = detail::aggregate(Protocol::Split, static_cast<std::size_t>(x.cols()), {split.test_subjects}, std::move(outcomes), true);
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

// Highest O3; ties go to the higher O1, then to archive order.
inline const Individual& pick_solution(const ParetoArchive& archive)
{
    if (archive.empty()) {
        throw InvalidArgument("pick_solution: empty archive");
    }
    const auto& m = archive.members();
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.size(); ++i) {
        const auto& a = m[i].objectives;
        const auto& b = m[best].objectives;
        if (a[2] > b[2] || (a[2] == b[2] && a[0] > b[0])) {
            best = i;
        }
    }
    return m[best];
}

struct SweepOptions {
    int repeats = 10;
    int group_size = 4;
    std::uint64_t seed = 0;
    FitnessOptions fitness;
    GaConfig ga;
};

struct SweepRow {
    int population_size = 0;
    int generations = 0;
    double recognition = 0.0;
    double identification = 0.0;
    std::vector<RunResult> runs;
};

// Per cell and repeat: split, evolve on the validation group, pick one member,
// score it on the test group. The GA seed depends on the repeat and population
// size only, so a longer run extends a shorter one.
inline std::vector<SweepRow> sweep_ga(const FeatureMatrix& data, const std::vector<int>& pop_sizes, const std::vector<int>& gen_counts,
                                      const SweepOptions& opts)
{
    require(!pop_sizes.empty() && !gen_counts.empty(), "sweep_ga: empty grid");
    require(opts.repeats >= 1, "sweep_ga: repeats must be >= 1");
    const auto subjects = data.subjects();
    const int g = opts.group_size;
    const int n = static_cast<int>(subjects.size());
    require(g >= 1 && n > 2 * g, "sweep_ga: need more subjects than two groups");
    std::vector<SweepRow> rows;
    for (int pop : pop_sizes) {
        for (int gens : gen_counts) {
            SweepRow row;
            row.population_size = pop;
            row.generations = gens;
            for (int r = 0; r < opts.repeats; ++r) {
                const auto split = split_subjects(subjects, derive_seed(opts.seed, {static_cast<std::uint64_t>(r)}), {n - 2 * g, g, g});
                const auto ctx = FitnessContext::build(data, split, Stage::Selection, opts.fitness);
                GaConfig ga = opts.ga;
                ga.population_size = pop;
                ga.max_generations = gens;
                ga.objective_mode = opts.fitness.objective_mode;
                ga.seed = derive_seed(opts.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(pop)});
                const auto archive = evolve(ga, data.cols(), make_fitness(ctx));
                const auto rep = run_split(data, split, pick_solution(archive).mask, eval_options(opts.fitness));
                row.runs.push_back(rep.runs.front());
                row.recognition += rep.recognition_accuracy / opts.repeats;
                row.identification += *rep.identification_accuracy / opts.repeats;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string out = "pop_size,generations,recognition,identification,runs\n";
    for (const auto& r : rows) {
        out += std::to_string(r.population_size) + "," + std::to_string(r.generations) + "," + format_double(r.recognition) + "," +
               format_double(r.identification) + "," + std::to_string(r.runs.size()) + "\n";
    }
    return out;
}

struct ComparisonRow {
    std::string method;
    std::size_t n_features = 0;
    double recognition = 0.0;
    double identification = 0.0;
};

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows)
{
    std::string out = "method,n_features,recognition,identification,gap\n";
    for (const auto& r : rows) {
        out += r.method + "," + std::to_string(r.n_features) + "," + format_double(r.recognition) + "," + format_double(r.identification) +
               "," + format_double(r.recognition - r.identification) + "\n";
    }
    return out;
}

inline nlohmann::json confusion_json(const ConfusionMatrix& cm)
{
    return {{"labels", cm.labels}, {"counts", cm.counts}};
}

// Wall time is left out unless asked for, so reruns produce identical files.
inline nlohmann::json report_json(const ExperimentReport& rep, bool with_wall_time = false)
{
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : rep.runs) {
        nlohmann::json j{{"group", r.group}, {"recognition", r.recognition}};
        j["identification"] = std::isnan(r.identification) ? nlohmann::json(nullptr) : nlohmann::json(r.identification);
        runs.push_back(j);
    }
    nlohmann::json j{{"protocol", to_string(rep.protocol)},
                     {"n_features", rep.n_features},
                     {"repeats", rep.runs.size()},
                     {"recognition_accuracy", rep.recognition_accuracy},
                     {"recognition_confusion", confusion_json(rep.recognition_confusion)},
                     {"runs", runs}};
    j["identification_accuracy"] = rep.identification_accuracy ? nlohmann::json(*rep.identification_accuracy) : nlohmann::json(nullptr);
    if (rep.identification_confusion) {
        j["identification_confusion"] = confusion_json(*rep.identification_confusion);
    }
    if (rep.protocol == Protocol::Loso) {
        j["recognition_confusion_normalized"] = rep.recognition_confusion.row_normalized();
    }
    if (with_wall_time) {
        j["wall_seconds"] = rep.wall_seconds;
    }
    return j;
}

} // namespace vitalsel
