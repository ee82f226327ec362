#pragma once

#include <Eigen/Dense>

#include "lcvx/errors.hpp"

namespace lcvx {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// cond(Q) above this means we refuse to treat the matrix as diagonalizable.
inline constexpr double kDiagonalizabilityCondLimit = 1e12;

struct EigenDecomposition {
    CVec eigenvalues;         // length n, conjugate pairs adjacent for real input
    CMat eigenvectors;        // columns are eigenvectors, A * V = V * diag(eigenvalues)
    double condition_estimate = 0.0;  // 2-norm condition number of the eigenvector matrix
    bool diagonalizable = true;       // false when condition_estimate exceeds the limit
};

// exp(M) for square M with finite entries (scaling-and-squaring with Pade approximant).
Mat matrix_exponential(const Mat& m);

// Zero-order-hold discretization of x' = A_c x + B_c u + w over one step of length dt.
// A, B and the drift are computed jointly from the exponential of the augmented
// block matrix [[A_c, B_c, w], [0, 0, 0]], which is exact for LTI systems.
struct ZohResult {
    Mat a;
    Mat b;
    Vec drift;
};
ZohResult discretize_zoh(const Mat& a_c, const Mat& b_c, const Vec& drift_c, double dt);

// Numerical rank of (B, AB, ..., A^{n-1}B) via singular values.
Eigen::Index controllability_rank(const Mat& a, const Mat& b);

// Numerical rank with threshold n * sigma_max * machine_eps * 64.
Eigen::Index numerical_rank(const Mat& m);

EigenDecomposition eigendecompose(const Mat& a);

}  // namespace lcvx
