#pragma once

#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/labels.hpp"

namespace vitalsel {

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> names;
    RowLabels labels;
};

// Rows are windows, columns are named features. Every row carries its
// subject / activity / position labels.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::vector<std::string> names, Eigen::MatrixXd values, std::vector<RowLabels> labels)
        : names_(std::move(names)), values_(std::move(values)), labels_(std::move(labels))
    {
        if (static_cast<std::size_t>(values_.cols()) != names_.size()) {
            throw InvalidArgument("FeatureMatrix: " + std::to_string(values_.cols()) + " columns but " +
                                  std::to_string(names_.size()) + " names");
        }
        if (static_cast<std::size_t>(values_.rows()) != labels_.size()) {
            throw InvalidArgument("FeatureMatrix: row count and label count differ");
        }
        std::set<std::string_view> seen;
        for (const auto& n : names_) {
            if (!seen.insert(n).second) {
                throw InvalidArgument("FeatureMatrix: duplicate feature name '" + n + "'");
            }
        }
    }

    static FeatureMatrix from_rows(std::span<const FeatureVector> rows)
    {
        if (rows.empty()) {
            return {};
        }
        const auto& names = rows.front().names;
        Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
        std::vector<RowLabels> labels;
        labels.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].names != names || rows[i].values.size() != names.size()) {
                throw InvalidArgument("FeatureMatrix: rows do not share one feature catalog");
            }
            for (std::size_t j = 0; j < names.size(); ++j) {
                values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
            }
            labels.push_back(rows[i].labels);
        }
        return FeatureMatrix(names, std::move(values), std::move(labels));
    }

    [[nodiscard]] std::size_t rows() const { return labels_.size(); }
    [[nodiscard]] std::size_t cols() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
    [[nodiscard]] Eigen::MatrixXd& values() { return values_; }
    [[nodiscard]] const std::vector<RowLabels>& labels() const { return labels_; }

    [[nodiscard]] std::ptrdiff_t column_index(std::string_view name) const
    {
        for (std::size_t j = 0; j < names_.size(); ++j) {
            if (names_[j] == name) {
                return static_cast<std::ptrdiff_t>(j);
            }
        }
        return -1;
    }

    [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> idx) const
    {
        Eigen::MatrixXd v(static_cast<Eigen::Index>(idx.size()), values_.cols());
        std::vector<RowLabels> l;
        l.reserve(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            v.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(idx[i]));
            l.push_back(labels_[idx[i]]);
        }
        return FeatureMatrix(names_, std::move(v), std::move(l));
    }

    [[nodiscard]] std::vector<int> subjects() const
    {
        std::set<int> s;
        for (const auto& l : labels_) {
            s.insert(l.subject);
        }
        return {s.begin(), s.end()};
    }

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b)
    {
        return a.names_ == b.names_ && a.labels_ == b.labels_ && a.values_.rows() == b.values_.rows() &&
               a.values_.cols() == b.values_.cols() &&
               std::equal(a.values_.data(), a.values_.data() + a.values_.size(), b.values_.data(), [](double x, double y) {
                   return x == y || (std::isnan(x) && std::isnan(y));
               });
    }

private:
    std::vector<std::string> names_;
    Eigen::MatrixXd values_;
    std::vector<RowLabels> labels_;
};

} // namespace vitalsel
