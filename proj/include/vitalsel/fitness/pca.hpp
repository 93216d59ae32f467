#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

struct PcaModel {
    Eigen::RowVectorXd mean;
    Eigen::MatrixXd components; // d x dims, one unit-norm component per column
    std::vector<double> explained_ratio;

    [[nodiscard]] int dims() const { return static_cast<int>(components.cols()); }
};

// Top `dims` eigenvectors of the sample covariance, by descending eigenvalue.
// Each component is flipped so that its largest-magnitude loading is positive.
inline PcaModel pca_fit(const Eigen::MatrixXd& x, int dims = 5)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (dims < 1 || dims > std::min(n, d)) {
        throw InvalidArgument("pca_fit: dims=" + std::to_string(dims) + " must be in [1, min(rows, cols)=" +
                              std::to_string(std::min(n, d)) + "]");
    }
    PcaModel model;
    model.mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - model.mean;
    const Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw DataError("pca_fit: eigendecomposition failed");
    }
    const Eigen::VectorXd& values = eig.eigenvalues(); // ascending
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        total += std::max(0.0, values(i));
    }
    model.components.resize(d, dims);
    for (int c = 0; c < dims; ++c) {
        const Eigen::Index src = d - 1 - c;
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        model.components.col(c) = v;
        model.explained_ratio.push_back(total > 0.0 ? std::max(0.0, values(src)) / total : 0.0);
    }
    return model;
}

inline Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& rows)
{
    if (rows.cols() != model.mean.size()) {
        throw InvalidArgument("pca_transform: expected " + std::to_string(model.mean.size()) + " columns, got " +
                              std::to_string(rows.cols()));
    }
    return (rows.rowwise() - model.mean) * model.components;
}

} // namespace vitalsel
