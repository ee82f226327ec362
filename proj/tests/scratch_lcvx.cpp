// Bring-up harness: the artificial 3-state instance and the moon-landing
// instance, checked against their published violation patterns.
#include <cstdio>

#include "lcvx/model.hpp"
#include "lcvx/transcribe.hpp"

using namespace lcvx;

namespace {

DiscreteProblem artificial_n3() {
    DiscreteProblem p;
    p.a = Mat::Zero(3, 3);
    p.a.diagonal() << 1.2, -2.2, 1.0;
    p.b = Mat(3, 1);
    p.b << 0.4, 0.3, 0.2;
    p.num_steps = 10;
    p.x_init = Vec::Zero(3);
    p.rho_min = 1.0;
    p.rho_max = 2.0;
    p.g_kind = MagnitudeKind::Norm2Squared;
    p.cost.running = 1.0;
    p.cost.terminal_linear = Vec::Zero(3);
    p.cost.terminal_linear(2) = 1.0;
    p.boundary.g_matrix = Mat::Zero(2, 3);
    p.boundary.g_matrix(0, 0) = 1.0;
    p.boundary.g_matrix(1, 1) = 1.0;
    p.boundary.g_vector = Vec(2);
    p.boundary.g_vector << 0.5, 1.0;
    return make_problem(std::move(p));
}

DiscreteProblem moon60() {
    ContinuousPlant plant;
    plant.a_c = Mat::Zero(6, 6);
    plant.a_c.topRightCorner(3, 3) = Mat::Identity(3, 3);
    plant.b_c = Mat::Zero(6, 3);
    plant.b_c.bottomRows(3) = Mat::Identity(3, 3);
    plant.drift = Vec::Zero(6);
    plant.drift(5) = -1.62;
    Vec x0(6);
    x0 << 0, 0, 5000, 0, 3, -50;
    Vec target(6);
    target << 0, 0, 100, 0, 0, -5;
    CostSpec cost;
    cost.running = 1.0;
    cost.terminal_linear = Vec::Zero(6);
    BoundaryMap boundary{Mat::Identity(6, 6), target};
    return discretize_problem(plant, 60.0, 10, x0, 0.3 * 7.5, 0.8 * 7.5, MagnitudeKind::Norm2,
                              cost, boundary);
}

void analyze(const char* name, const DiscreteProblem& prob, double tol) {
    Transcription t = transcribe_relaxed(prob);
    SolverSettings st;
    st.tol_p = st.tol_d = st.tol_g = tol;
    st.max_iter = 500;
    ConeSolution sol = solve_cone_program(t.program, st);
    std::printf("%s: status=%s iters=%d obj=%.12e pres=%.2e dres=%.2e gap=%.2e\n", name,
                to_string(sol.status), sol.iterations, sol.objective, sol.primal_residual,
                sol.dual_residual, sol.gap);
    if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIter) return;
    LcvxSolution s = extract_solution(t, sol);
    int violations = 0;
    for (Eigen::Index i = 0; i < prob.num_steps; ++i) {
        const double g = magnitude(prob.g_kind, s.inputs[i]);
        const double gate = (prob.b.transpose() * s.costates[i]).norm();
        const bool viol = g < prob.rho_min - 1e-6 * std::max(1.0, prob.rho_min);
        if (viol) ++violations;
        std::printf("  node %2d: g=%.9f sigma=%.9f gate=%.3e %s\n", static_cast<int>(i + 1), g,
                    s.slacks(i), gate, viol ? "VIOLATING" : "");
    }
    std::printf("  violations=%d  ||eta_N||=%.3e\n", violations, s.costates.back().norm());
    // chain residual
    double chain = 0.0;
    for (Eigen::Index i = 0; i + 1 < prob.num_steps; ++i) {
        chain = std::max(chain,
                         (prob.a.transpose() * s.costates[i + 1] - s.costates[i]).norm());
    }
    std::printf("  chain residual=%.3e (rel %.3e)\n", chain,
                chain / (1.0 + s.costates.back().norm()));
}

}  // namespace

void analyze_perturbed(const char* name, const DiscreteProblem& prob, const Mat& a_tilde,
                       double tol) {
    Transcription t = transcribe_perturbed(prob, a_tilde);
    SolverSettings st;
    st.tol_p = st.tol_d = st.tol_g = tol;
    st.max_iter = 500;
    ConeSolution sol = solve_cone_program(t.program, st);
    std::printf("%s: status=%s iters=%d obj=%.12e pres=%.2e dres=%.2e gap=%.2e\n", name,
                to_string(sol.status), sol.iterations, sol.objective, sol.primal_residual,
                sol.dual_residual, sol.gap);
    LcvxSolution s = extract_solution(t, sol);
    int violations = 0;
    double worst_boundary_node = 0.0;
    for (Eigen::Index i = 0; i < prob.num_steps; ++i) {
        const double g = magnitude(prob.g_kind, s.inputs[i]);
        const bool viol = g < prob.rho_min - 1e-6 * std::max(1.0, prob.rho_min);
        if (viol) ++violations;
        if (!viol && g < prob.rho_min) {
            worst_boundary_node = std::max(worst_boundary_node, prob.rho_min - g);
        }
        std::printf("  node %2d: g=%.12f %s\n", static_cast<int>(i + 1), g,
                    viol ? "VIOLATING" : "");
    }
    // propagate through TRUE dynamics
    std::vector<Vec> traj = propagate(prob, s.inputs);
    const double res =
        (prob.boundary.g_matrix * traj.back() - prob.boundary.g_vector).norm();
    std::printf("  violations=%d  true-dynamics boundary residual=%.3e  worst near-boundary gap=%.3e\n",
                violations, res, worst_boundary_node);
}

int main() {
    analyze("artificial_n3 (1e-9)", artificial_n3(), 1e-9);
    analyze("artificial_n3 (1e-12)", artificial_n3(), 1e-12);
    analyze("moon60", moon60(), 1e-9);

    DiscreteProblem art = artificial_n3();
    Mat a_tilde = art.a;
    a_tilde(0, 0) += 1e-7;
    analyze_perturbed("artificial_n3 perturbed 1e-7 (tol 1e-9)", art, a_tilde, 1e-9);
    analyze_perturbed("artificial_n3 perturbed 1e-7 (tol 1e-11)", art, a_tilde, 1e-11);
    return 0;
}
