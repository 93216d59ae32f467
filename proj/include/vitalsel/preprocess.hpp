#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vitalsel/core/error.hpp"
#include "vitalsel/features/feature_matrix.hpp"

namespace vitalsel {

// Column-wise gap filling. Non-finite entries take the preceding valid value,
// then the succeeding one, then the column mean of valid entries; a column
// with no valid entry becomes all zeros.
inline Eigen::MatrixXd impute(const Eigen::MatrixXd& in)
{
    Eigen::MatrixXd out = in;
    const Eigen::Index rows = out.rows();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        auto col = out.col(j);
        std::vector<bool> valid(static_cast<std::size_t>(rows));
        double sum = 0.0;
        Eigen::Index n_valid = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            valid[static_cast<std::size_t>(i)] = std::isfinite(col(i));
            if (valid[static_cast<std::size_t>(i)]) {
                sum += col(i);
                ++n_valid;
            }
        }
        if (n_valid == rows) {
            continue;
        }
        if (n_valid == 0) {
            col.setZero();
            continue;
        }
        std::vector<bool> filled = valid;
        for (Eigen::Index i = 1; i < rows; ++i) {
            if (!filled[static_cast<std::size_t>(i)] && filled[static_cast<std::size_t>(i - 1)]) {
                col(i) = col(i - 1);
                filled[static_cast<std::size_t>(i)] = true;
            }
        }
        for (Eigen::Index i = rows - 1; i-- > 0;) {
            if (!filled[static_cast<std::size_t>(i)] && filled[static_cast<std::size_t>(i + 1)]) {
                col(i) = col(i + 1);
                filled[static_cast<std::size_t>(i)] = true;
            }
        }
        const double mean = sum / static_cast<double>(n_valid);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (!filled[static_cast<std::size_t>(i)]) {
                col(i) = mean;
            }
        }
    }
    return out;
}

inline FeatureMatrix impute(const FeatureMatrix& m)
{
    return FeatureMatrix(m.names(), impute(m.values()), m.labels());
}

// Per-column standardization fitted on training rows only (population std).
struct Scaler {
    std::vector<double> mean;
    std::vector<double> std;
    std::size_t fitted_on = 0;

    friend bool operator==(const Scaler&, const Scaler&) = default;
};

inline Scaler fit_scaler(const Eigen::MatrixXd& train)
{
    if (train.rows() == 0) {
        throw InvalidArgument("fit_scaler: empty training matrix");
    }
    Scaler s;
    s.fitted_on = static_cast<std::size_t>(train.rows());
    const double n = static_cast<double>(train.rows());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        const double mean = train.col(j).sum() / n;
        const double var = (train.col(j).array() - mean).square().sum() / n;
        s.mean.push_back(mean);
        s.std.push_back(std::sqrt(var));
    }
    return s;
}

inline Scaler fit_scaler(const FeatureMatrix& train)
{
    return fit_scaler(train.values());
}

// Constant training columns (std below a relative epsilon) map to 0.
inline Eigen::MatrixXd apply_scaler(const Scaler& s, const Eigen::MatrixXd& m)
{
    if (static_cast<std::size_t>(m.cols()) != s.mean.size()) {
        throw InvalidArgument("apply_scaler: column count does not match the fitted scaler");
    }
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double mean = s.mean[static_cast<std::size_t>(j)];
        const double sd = s.std[static_cast<std::size_t>(j)];
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            out.col(j).setZero();
        } else {
            out.col(j) = (m.col(j).array() - mean) / sd;
        }
    }
    return out;
}

inline FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& m)
{
    return FeatureMatrix(m.names(), apply_scaler(s, m.values()), m.labels());
}

inline void to_json(nlohmann::json& j, const Scaler& s)
{
    j = nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"fitted_on", s.fitted_on}};
}

inline void from_json(const nlohmann::json& j, Scaler& s)
{
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.std);
    j.at("fitted_on").get_to(s.fitted_on);
    if (s.mean.size() != s.std.size()) {
        throw DataError("Scaler JSON: mean and std lengths differ");
    }
}

} // namespace vitalsel
