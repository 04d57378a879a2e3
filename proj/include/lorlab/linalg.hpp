#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace lorlab {

// Small dense types with fixed capacity 4: chart dimensions are 2..4, so
// everything lives on the stack.
inline constexpr int kMaxDim = 4;

using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline VecN sym_eigenvalues(const MatN& m) {
    Eigen::SelfAdjointEigenSolver<MatN> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Symmetric positive-definite square root via eigendecomposition.
inline MatN sym_sqrt(const MatN& m) {
    Eigen::SelfAdjointEigenSolver<MatN> es(m);
    VecN ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < 0.0) throw std::domain_error("sym_sqrt: matrix not positive semidefinite");
        ev[i] = std::sqrt(ev[i]);
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace lorlab
