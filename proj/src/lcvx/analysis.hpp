#pragma once

#include <optional>
#include <vector>

#include "lcvx/model.hpp"
#include "lcvx/transcribe.hpp"

namespace lcvx {

enum class NodeStatus { Valid, Violating, UpperViolating };

const char* to_string(NodeStatus s);

struct NodeValidity {
    double magnitude = 0.0;  // g(u_i)
    double slack = 0.0;      // sigma_i
    NodeStatus status = NodeStatus::Valid;
    double dual_gate = 0.0;  // ||B' costate_i||; zero gate removes the validity guarantee
};

struct ValidityReport {
    std::vector<NodeValidity> nodes;
    Eigen::Index violation_count = 0;        // lower-bound violations only
    Eigen::Index upper_violation_count = 0;
    Eigen::Index bound = 0;                  // n_x - 1
};

ValidityReport check_validity(const LcvxSolution& sol, const DiscreteProblem& problem,
                              double tol_v = 1e-6);

enum class CaseKind { Normal, LongHorizon };

const char* to_string(CaseKind k);

struct CaseLabel {
    CaseKind kind = CaseKind::Normal;
    double max_slack_gap = 0.0;           // max_i sigma_i - rho_min
    double terminal_kkt_residual = 0.0;   // stationarity defect of the boundary-only problem
    double costate_terminal_norm = 0.0;   // corroborating evidence only
};

// Long-horizon iff every slack sits at rho_min and the final state is optimal
// for the boundary-only problem; decided on primal evidence.
CaseLabel classify_case(const LcvxSolution& sol, const DiscreteProblem& problem,
                        double tol_c = 1e-6);

// min over mu of ||terminal_linear + G' mu|| / (1 + ||terminal_linear||); zero
// for fixed-final-state problems.
double terminal_kkt_residual(const CostSpec& cost, const BoundaryMap& boundary);

// Optimal value of the boundary-only problem (terminal cost over G x = g);
// empty when that problem is unbounded.
std::optional<double> boundary_only_optimum(const CostSpec& cost, const BoundaryMap& boundary,
                                            double tol = 1e-9);

struct DualChainReport {
    double max_relative_residual = 0.0;      // max_i ||A' eta_{i+1} - eta_i|| / (1+||eta_N||)
    std::vector<double> gates;               // ||B' eta_i|| per node
    std::vector<Eigen::Index> closed_gates;  // 1-based nodes where the gate is below threshold
    double gate_threshold = 0.0;
};

DualChainReport dual_chain_check(const LcvxSolution& sol, const Mat& a, const Mat& b,
                                 double tol = 1e-6);

// Rank of (A^{N-P_1} B, ..., A^{N-P_k} B) over the given nodes; simultaneous
// violation at those nodes requires this to be rank deficient.
Eigen::Index final_state_influence_rank(const Mat& a, const Mat& b,
                                        const std::vector<Eigen::Index>& nodes,
                                        Eigen::Index num_steps);

struct CorrectionResult {
    std::vector<Vec> inputs;   // corrected controls
    std::vector<Vec> states;   // propagation under the true dynamics
    double deviation = 0.0;    // final-state deviation
    std::optional<double> bound;  // requires the continuous plant
    bool zero_input_warning = false;
};

// Radially rescales every below-threshold control onto the rho_min level set;
// the deviation bound is evaluated when the problem carries its plant.
CorrectionResult correct_controls(const LcvxSolution& sol, const DiscreteProblem& problem);

// (n_x - 1) * C0 * (e^{||A_c|| t_f / N} - 1) with
// C0 = e^{||A_c|| t_f} ||B_c|| rho_min / ||A_c||; the ||A_c|| -> 0 limit is
// (n_x - 1) * ||B_c|| * rho_min * t_f / N.
double correction_deviation_bound(const ContinuousPlant& plant, double rho_min, double t_f,
                                  Eigen::Index num_steps);

}  // namespace lcvx
