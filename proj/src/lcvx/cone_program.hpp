#pragma once

#include <Eigen/Sparse>

#include <vector>

#include "lcvx/linalg.hpp"

namespace lcvx {

using SpMat = Eigen::SparseMatrix<double>;

// Cone block kinds. A NonNeg block of dimension k is k independent scalar
// inequalities. Soc(d): s0 >= ||s_{1:}||. Rsoc(d): s0 * s1 >= ||s_{2:}||^2 with
// s0, s1 >= 0.
enum class ConeKind { NonNeg, Soc, Rsoc };

struct ConeBlock {
    ConeKind kind = ConeKind::NonNeg;
    Eigen::Index offset = 0;  // first row of the block in (cone, cone_rhs)
    Eigen::Index dim = 0;
};

enum class EqRowKind { Dynamics, Initial, Boundary };

// Ties an equality row back to its origin so equality duals can be sliced
// into per-step costates and boundary multipliers.
struct EqRowLabel {
    EqRowKind kind = EqRowKind::Dynamics;
    Eigen::Index step = 0;  // dynamics step in [1, N]; 0 for initial/boundary rows
    Eigen::Index comp = 0;  // component within the row group
};

// Standard form:
//   minimize    c'z + objective_offset
//   subject to  eq * z = eq_rhs
//               cone_rhs - cone * z  in  K
// where K is the ordered product of `blocks`.
struct ConeProgram {
    Eigen::Index num_vars = 0;
    Vec c;
    double objective_offset = 0.0;

    SpMat eq;
    Vec eq_rhs;
    std::vector<EqRowLabel> eq_labels;

    SpMat cone;
    Vec cone_rhs;
    std::vector<ConeBlock> blocks;

    Eigen::Index num_eq_rows() const { return eq.rows(); }
    Eigen::Index num_cone_rows() const { return cone.rows(); }
};

}  // namespace lcvx
