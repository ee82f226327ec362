#include "lcvx/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <limits>
#include <string>

namespace lcvx {

namespace {

void require_finite(const Mat& m, const char* who) {
    if (!m.allFinite()) {
        throw invalid_argument_error(std::string(who) + ": matrix has non-finite entries");
    }
}

void require_square(const Mat& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw invalid_argument_error(std::string(who) + ": matrix must be square, got " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

}  // namespace

Mat matrix_exponential(const Mat& m) {
    require_square(m, "matrix_exponential");
    require_finite(m, "matrix_exponential");
    return m.exp();
}

ZohResult discretize_zoh(const Mat& a_c, const Mat& b_c, const Vec& drift_c, double dt) {
    require_square(a_c, "discretize_zoh");
    if (b_c.rows() != a_c.rows()) {
        throw invalid_argument_error("discretize_zoh: B_c row count must match A_c");
    }
    if (drift_c.size() != a_c.rows()) {
        throw invalid_argument_error("discretize_zoh: drift length must match state dimension");
    }
    if (!(dt > 0.0)) {
        throw invalid_argument_error("discretize_zoh: dt must be positive");
    }
    const Eigen::Index n = a_c.rows();
    const Eigen::Index m = b_c.cols();

    // Augmented system [[A_c, B_c, w], [0, 0, 0]]; its exponential carries
    // exp(A_c dt) together with the control and drift integrals.
    Mat aug = Mat::Zero(n + m + 1, n + m + 1);
    aug.topLeftCorner(n, n) = a_c;
    aug.block(0, n, n, m) = b_c;
    aug.block(0, n + m, n, 1) = drift_c;
    Mat e = matrix_exponential(aug * dt);

    ZohResult out;
    out.a = e.topLeftCorner(n, n);
    out.b = e.block(0, n, n, m);
    out.drift = e.block(0, n + m, n, 1);
    return out;
}

Eigen::Index numerical_rank(const Mat& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double tau =
        static_cast<double>(std::max(m.rows(), m.cols())) * sv(0) *
        std::numeric_limits<double>::epsilon() * 64.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tau) ++rank;
    }
    return rank;
}

Eigen::Index controllability_rank(const Mat& a, const Mat& b) {
    require_square(a, "controllability_rank");
    if (b.rows() != a.rows()) {
        throw invalid_argument_error("controllability_rank: B row count must match A");
    }
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Mat ctrl(n, n * m);
    Mat block = b;
    for (Eigen::Index k = 0; k < n; ++k) {
        ctrl.middleCols(k * m, m) = block;
        if (k + 1 < n) block = a * block;
    }
    return numerical_rank(ctrl);
}

EigenDecomposition eigendecompose(const Mat& a) {
    require_square(a, "eigendecompose");
    require_finite(a, "eigendecompose");

    Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) {
        throw invalid_argument_error("eigendecompose: eigenvalue iteration failed to converge");
    }

    EigenDecomposition out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();

    Eigen::JacobiSVD<CMat> svd(out.eigenvectors);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0) {
        out.condition_estimate = std::numeric_limits<double>::infinity();
    } else {
        out.condition_estimate = sv(0) / sv(sv.size() - 1);
    }
    out.diagonalizable = out.condition_estimate <= kDiagonalizabilityCondLimit;
    return out;
}

}  // namespace lcvx
