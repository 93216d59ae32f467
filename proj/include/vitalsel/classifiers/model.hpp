#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/classifiers/forest.hpp"
#include "vitalsel/classifiers/knn.hpp"
#include "vitalsel/core/error.hpp"

namespace vitalsel {

enum class ClassifierKind { Forest, Knn };

inline std::string_view to_string(ClassifierKind k)
{
    return k == ClassifierKind::Forest ? "forest" : "knn";
}

inline ClassifierKind parse_classifier(std::string_view s)
{
    if (s == "forest" || s == "rf") {
        return ClassifierKind::Forest;
    }
    if (s == "knn") {
        return ClassifierKind::Knn;
    }
    throw InvalidArgument("unknown classifier '" + std::string(s) + "'");
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Forest;
    ForestConfig forest;
    int knn_k = 3;
    Metric metric = Metric::Euclidean;
};

// Trains on (train, labels) and predicts every row of test.
inline std::vector<int> fit_predict(const ClassifierSpec& spec, const Eigen::MatrixXd& train, std::span<const int> labels,
                                    const Eigen::MatrixXd& test)
{
    if (spec.kind == ClassifierKind::Forest) {
        return forest_predict(forest_fit(train, labels, spec.forest), test);
    }
    const int k = std::min<int>(spec.knn_k, static_cast<int>(train.rows()));
    return knn_predict(knn_fit(train, {labels.begin(), labels.end()}, k, spec.metric), test);
}

// Copies the listed columns, in order.
inline Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, std::span<const std::size_t> cols)
{
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        require(cols[j] < static_cast<std::size_t>(m.cols()), "take_columns: column index out of range");
        out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
    }
    return out;
}

// Copies the listed rows, in order.
inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < static_cast<std::size_t>(m.rows()), "take_rows: row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

} // namespace vitalsel
