#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lcvx/cone_program.hpp"

namespace lcvx {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIter, Numerical };

const char* to_string(SolveStatus s);

struct SolverSettings {
    double tol_p = 1e-9;   // relative primal residual
    double tol_d = 1e-9;   // relative dual residual
    double tol_g = 1e-9;   // relative duality gap
    int max_iter = 200;
    // advanced knobs
    int refine_rounds = 5;      // iterative refinement passes per KKT solve
    double static_reg = 1e-10;  // signed diagonal regularization of the KKT matrix
    int equilibrate_rounds = 10;
    bool verbose = false;
    std::function<void(const Vec&)> verbose_probe;  // called with the de-homogenized primal
};

struct ConeSolution {
    Vec z;               // primal point in program variables
    Vec equality_duals;  // one per equality row; convention: c + E'y + G'w = 0
    Vec cone_duals;      // one per cone row, in the original (pre-transform) cone blocks
    SolveStatus status = SolveStatus::Numerical;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;        // relative duality gap of the returned iterate
    double objective = 0.0;  // includes the program's constant offset
    int iterations = 0;
};

// Bundled primal-dual interior-point method on the homogeneous self-dual
// embedding. Returns equality-row duals and certifies infeasibility.
ConeSolution solve_cone_program(const ConeProgram& program, const SolverSettings& settings = {});

using SolverBackend = std::function<ConeSolution(const ConeProgram&, const SolverSettings&)>;

// In-process backend registry. "bundled" (the interior-point method) and
// "firstorder" (an operator-splitting cross-check solver) are pre-registered.
void register_backend(const std::string& name, SolverBackend backend);
std::vector<std::string> backend_names();
ConeSolution solve_with_backend(const ConeProgram& program, const std::string& backend,
                                const SolverSettings& settings = {});

// Operator-splitting solver used as an independent cross-check of the bundled
// method; slower and typically run at looser tolerances.
ConeSolution solve_cone_program_firstorder(const ConeProgram& program,
                                           const SolverSettings& settings = {});

}  // namespace lcvx
