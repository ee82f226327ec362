#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcvx/conic.hpp"
#include "lcvx/linalg.hpp"

namespace lcvx {

// Continuous-time plant x' = A_c x + B_c u + drift.
struct ContinuousPlant {
    Mat a_c;
    Mat b_c;
    Vec drift;  // constant forcing, e.g. gravity

    Eigen::Index state_dim() const { return a_c.rows(); }
    Eigen::Index input_dim() const { return b_c.cols(); }
};

enum class MagnitudeKind { Norm2, Norm2Squared };

const char* to_string(MagnitudeKind k);

// g(u): the convex input-magnitude function bounded below by rho_min.
double magnitude(MagnitudeKind kind, const Vec& u);

// Running cost is linear in the slack with positive coefficient; terminal cost
// is affine in the final state. This covers every catalogued instance while
// keeping the slack cost strictly increasing.
struct CostSpec {
    double running = 1.0;
    Vec terminal_linear;  // length n_x; zero vector for pure fuel problems
    double terminal_constant = 0.0;
};

struct BoundaryMap {
    Mat g_matrix;  // n_G x n_x
    Vec g_vector;  // length n_G
};

// Drops linearly dependent boundary rows. Dependent-but-inconsistent rows mean
// an empty boundary set and raise an error.
BoundaryMap deduplicate_boundary(const BoundaryMap& boundary, Eigen::Index* dropped = nullptr);

struct DiscreteProblem {
    Mat a;
    Mat b;
    Vec drift;
    Eigen::Index num_steps = 0;  // N
    Vec x_init;
    double rho_min = 0.0;
    double rho_max = 0.0;
    MagnitudeKind g_kind = MagnitudeKind::Norm2;
    CostSpec cost;
    BoundaryMap boundary;  // full row rank after make_problem
    double dt = 1.0;
    std::optional<ContinuousPlant> source_plant;  // present when built by discretization

    Eigen::Index state_dim() const { return a.rows(); }
    Eigen::Index input_dim() const { return b.cols(); }
};

// Validates dimensions and 0 < rho_min < rho_max, deduplicates the boundary.
DiscreteProblem make_problem(DiscreteProblem p);

// ZOH-discretizes a plant over t_f / num_steps and assembles the instance.
DiscreteProblem discretize_problem(const ContinuousPlant& plant, double t_f,
                                   Eigen::Index num_steps, const Vec& x_init, double rho_min,
                                   double rho_max, MagnitudeKind g_kind, const CostSpec& cost,
                                   const BoundaryMap& boundary);

struct SlaterProbe {
    bool feasible = false;
    SolveStatus status = SolveStatus::Numerical;
};

struct ValidationReport {
    Eigen::Index controllability_rank = 0;
    Eigen::Index state_dim = 0;
    bool controllable = false;
    Eigen::Index boundary_rows_kept = 0;
    Eigen::Index boundary_rows_dropped = 0;
    SlaterProbe slater;
    bool cost_monotone = false;
    std::vector<std::string> notes;
};

// Assumption probes: controllability rank, boundary row independence, a
// feasibility probe with rho_max tightened by 1e-6 (evidence for a strictly
// interior point, not a proof), and the increasing-cost check.
ValidationReport validate_problem(const DiscreteProblem& problem);

// x_{i+1} = A x_i + B u_i + drift from x_init; returns N+1 states.
std::vector<Vec> propagate(const DiscreteProblem& problem, const std::vector<Vec>& inputs);
std::vector<Vec> propagate_with(const Mat& a, const Mat& b, const Vec& drift, const Vec& x_init,
                                const std::vector<Vec>& inputs);

struct NonconvexEvaluation {
    double cost = 0.0;
    double boundary_residual = 0.0;
    std::vector<double> magnitudes;  // g(u_i) per node
};

// Objective and constraint data of the unrelaxed problem at a given control
// sequence (magnitude bounds are reported, not enforced).
NonconvexEvaluation evaluate_nonconvex_cost(const DiscreteProblem& problem,
                                            const std::vector<Vec>& inputs);

}  // namespace lcvx
