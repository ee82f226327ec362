#include "lcvx/analysis.hpp"

#include <cmath>

namespace lcvx {

const char* to_string(NodeStatus s) {
    switch (s) {
        case NodeStatus::Valid: return "VALID";
        case NodeStatus::Violating: return "VIOLATING";
        case NodeStatus::UpperViolating: return "UPPER_VIOLATING";
    }
    return "UNKNOWN";
}

const char* to_string(CaseKind k) { return k == CaseKind::Normal ? "NORMAL" : "LONG_HORIZON"; }

ValidityReport check_validity(const LcvxSolution& sol, const DiscreteProblem& problem,
                              double tol_v) {
    ValidityReport report;
    report.bound = problem.state_dim() - 1;
    const double lower = problem.rho_min - tol_v * std::max(1.0, problem.rho_min);
    const double upper = problem.rho_max + tol_v * std::max(1.0, problem.rho_max);
    const Mat bt = problem.b.transpose();
    for (Eigen::Index i = 0; i < problem.num_steps; ++i) {
        NodeValidity node;
        node.magnitude = magnitude(problem.g_kind, sol.inputs[i]);
        node.slack = sol.slacks(i);
        if (!sol.costates.empty()) node.dual_gate = (bt * sol.costates[i]).norm();
        if (node.magnitude < lower) {
            node.status = NodeStatus::Violating;
            ++report.violation_count;
        } else if (node.magnitude > upper) {
            node.status = NodeStatus::UpperViolating;
            ++report.upper_violation_count;
        }
        report.nodes.push_back(node);
    }
    return report;
}

double terminal_kkt_residual(const CostSpec& cost, const BoundaryMap& boundary) {
    const double scale = 1.0 + cost.terminal_linear.norm();
    if (boundary.g_matrix.rows() == 0) {
        return cost.terminal_linear.norm() / scale;  // unconstrained terminal problem
    }
    Mat gt = boundary.g_matrix.transpose();
    Vec mu = gt.colPivHouseholderQr().solve(-cost.terminal_linear);
    return (cost.terminal_linear + gt * mu).norm() / scale;
}

std::optional<double> boundary_only_optimum(const CostSpec& cost, const BoundaryMap& boundary,
                                            double tol) {
    if (terminal_kkt_residual(cost, boundary) > tol) return std::nullopt;  // unbounded
    Vec x = boundary.g_matrix.completeOrthogonalDecomposition().solve(boundary.g_vector);
    return cost.terminal_linear.dot(x) + cost.terminal_constant;
}

CaseLabel classify_case(const LcvxSolution& sol, const DiscreteProblem& problem, double tol_c) {
    CaseLabel label;
    label.max_slack_gap = (sol.slacks.array() - problem.rho_min).maxCoeff();
    label.terminal_kkt_residual = terminal_kkt_residual(problem.cost, problem.boundary);
    if (!sol.costates.empty()) label.costate_terminal_norm = sol.costates.back().norm();
    const bool slacks_at_floor = label.max_slack_gap <= tol_c * std::max(1.0, problem.rho_min);
    const bool terminal_optimal = label.terminal_kkt_residual <= tol_c;
    label.kind =
        (slacks_at_floor && terminal_optimal) ? CaseKind::LongHorizon : CaseKind::Normal;
    return label;
}

DualChainReport dual_chain_check(const LcvxSolution& sol, const Mat& a, const Mat& b,
                                 double tol) {
    DualChainReport report;
    if (sol.costates.empty()) return report;
    const double eta_n = sol.costates.back().norm();
    const Mat at = a.transpose();
    const Mat bt = b.transpose();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < sol.costates.size(); ++i) {
        worst = std::max(worst, (at * sol.costates[i + 1] - sol.costates[i]).norm());
    }
    report.max_relative_residual = worst / (1.0 + eta_n);
    report.gate_threshold = tol * (1.0 + eta_n);
    for (std::size_t i = 0; i < sol.costates.size(); ++i) {
        const double gate = (bt * sol.costates[i]).norm();
        report.gates.push_back(gate);
        if (gate <= report.gate_threshold) {
            report.closed_gates.push_back(static_cast<Eigen::Index>(i) + 1);
        }
    }
    return report;
}

Eigen::Index final_state_influence_rank(const Mat& a, const Mat& b,
                                        const std::vector<Eigen::Index>& nodes,
                                        Eigen::Index num_steps) {
    if (nodes.empty()) throw invalid_argument_error("influence rank needs at least one node");
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Mat stacked(n, static_cast<Eigen::Index>(nodes.size()) * m);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Eigen::Index node = nodes[k];
        if (node < 1 || node > num_steps) {
            throw invalid_argument_error("influence rank: node index out of range");
        }
        Mat power = Mat::Identity(n, n);
        for (Eigen::Index j = 0; j < num_steps - node; ++j) power = a * power;
        stacked.middleCols(static_cast<Eigen::Index>(k) * m, m) = power * b;
    }
    return numerical_rank(stacked);
}

double correction_deviation_bound(const ContinuousPlant& plant, double rho_min, double t_f,
                                  Eigen::Index num_steps) {
    const Eigen::Index nx = plant.state_dim();
    const double a_norm = plant.a_c.operatorNorm();
    const double b_norm = plant.b_c.operatorNorm();
    const double h = t_f / static_cast<double>(num_steps);
    if (a_norm < 1e-300) {
        return static_cast<double>(nx - 1) * b_norm * rho_min * h;
    }
    const double c0 = std::exp(a_norm * t_f) * b_norm * rho_min / a_norm;
    return static_cast<double>(nx - 1) * c0 * (std::exp(a_norm * h) - 1.0);
}

CorrectionResult correct_controls(const LcvxSolution& sol, const DiscreteProblem& problem) {
    CorrectionResult out;
    const double target_norm = problem.g_kind == MagnitudeKind::Norm2
                                   ? problem.rho_min
                                   : std::sqrt(problem.rho_min);
    out.inputs.reserve(sol.inputs.size());
    for (const Vec& u : sol.inputs) {
        const double g = magnitude(problem.g_kind, u);
        if (g >= problem.rho_min) {
            out.inputs.push_back(u);
            continue;
        }
        const double norm = u.norm();
        if (norm == 0.0) {
            // Any direction satisfies the magnitude constraint; pick the first axis.
            Vec fixed = Vec::Zero(u.size());
            fixed(0) = target_norm;
            out.inputs.push_back(fixed);
            out.zero_input_warning = true;
        } else {
            out.inputs.push_back(u * (target_norm / norm));
        }
    }
    out.states = propagate(problem, out.inputs);
    out.deviation = (out.states.back() - sol.states.back()).norm();
    if (problem.source_plant) {
        out.bound = correction_deviation_bound(
            *problem.source_plant, problem.rho_min,
            problem.dt * static_cast<double>(problem.num_steps), problem.num_steps);
    }
    return out;
}

}  // namespace lcvx
