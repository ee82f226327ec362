#include "lcvx/transcribe.hpp"

namespace lcvx {

std::vector<Vec> VariableLayout::states(const Vec& z) const {
    std::vector<Vec> out;
    out.reserve(num_steps + 1);
    for (Eigen::Index i = 1; i <= num_steps + 1; ++i) {
        out.push_back(z.segment(x_index(i, 0), state_dim));
    }
    return out;
}

std::vector<Vec> VariableLayout::inputs(const Vec& z) const {
    std::vector<Vec> out;
    out.reserve(num_steps);
    for (Eigen::Index i = 1; i <= num_steps; ++i) {
        out.push_back(z.segment(u_index(i, 0), input_dim));
    }
    return out;
}

Vec VariableLayout::slacks(const Vec& z) const { return z.segment(sigma_offset(), num_steps); }

namespace {

Transcription transcribe_with_dynamics(const DiscreteProblem& problem, const Mat& a_dyn) {
    const Eigen::Index n = problem.state_dim();
    const Eigen::Index m = problem.input_dim();
    const Eigen::Index steps = problem.num_steps;
    const Eigen::Index n_g = problem.boundary.g_matrix.rows();

    Transcription t;
    t.layout = {n, m, steps};
    ConeProgram& p = t.program;
    p.num_vars = t.layout.total();

    // objective: running coefficient on every slack, terminal over x_{N+1}
    p.c = Vec::Zero(p.num_vars);
    for (Eigen::Index i = 1; i <= steps; ++i) {
        p.c(t.layout.sigma_index(i)) = problem.cost.running;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        p.c(t.layout.x_index(steps + 1, r)) = problem.cost.terminal_linear(r);
    }
    p.objective_offset = problem.cost.terminal_constant;

    // equalities: A x_i + B u_i - x_{i+1} = -drift, then x_1 = x_init, then boundary
    const Eigen::Index eq_rows = steps * n + n + n_g;
    std::vector<Eigen::Triplet<double>> te;
    te.reserve(static_cast<std::size_t>(steps * n * (n + m + 1) + n + n_g * n));
    p.eq_rhs = Vec::Zero(eq_rows);
    p.eq_labels.resize(eq_rows);
    Eigen::Index row = 0;
    for (Eigen::Index i = 1; i <= steps; ++i) {
        for (Eigen::Index r = 0; r < n; ++r, ++row) {
            for (Eigen::Index cc = 0; cc < n; ++cc) {
                if (a_dyn(r, cc) != 0.0) te.emplace_back(row, t.layout.x_index(i, cc), a_dyn(r, cc));
            }
            for (Eigen::Index cc = 0; cc < m; ++cc) {
                if (problem.b(r, cc) != 0.0) {
                    te.emplace_back(row, t.layout.u_index(i, cc), problem.b(r, cc));
                }
            }
            te.emplace_back(row, t.layout.x_index(i + 1, r), -1.0);
            p.eq_rhs(row) = -problem.drift(r);
            p.eq_labels[row] = {EqRowKind::Dynamics, i, r};
        }
    }
    for (Eigen::Index r = 0; r < n; ++r, ++row) {
        te.emplace_back(row, t.layout.x_index(1, r), 1.0);
        p.eq_rhs(row) = problem.x_init(r);
        p.eq_labels[row] = {EqRowKind::Initial, 0, r};
    }
    for (Eigen::Index r = 0; r < n_g; ++r, ++row) {
        for (Eigen::Index cc = 0; cc < n; ++cc) {
            const double v = problem.boundary.g_matrix(r, cc);
            if (v != 0.0) te.emplace_back(row, t.layout.x_index(steps + 1, cc), v);
        }
        p.eq_rhs(row) = problem.boundary.g_vector(r);
        p.eq_labels[row] = {EqRowKind::Boundary, 0, r};
    }
    p.eq.resize(eq_rows, p.num_vars);
    p.eq.setFromTriplets(te.begin(), te.end());
    p.eq.makeCompressed();

    // cone rows per node: sigma - rho_min >= 0, rho_max - sigma >= 0, then the
    // magnitude block (s = cone_rhs - cone * z must land in the cone)
    const bool rotated = problem.g_kind == MagnitudeKind::Norm2Squared;
    const Eigen::Index mag_dim = rotated ? m + 2 : m + 1;
    const Eigen::Index cone_rows = steps * (2 + mag_dim);
    std::vector<Eigen::Triplet<double>> tc;
    tc.reserve(static_cast<std::size_t>(cone_rows));
    p.cone_rhs = Vec::Zero(cone_rows);
    Eigen::Index crow = 0;
    for (Eigen::Index i = 1; i <= steps; ++i) {
        p.blocks.push_back({ConeKind::NonNeg, crow, 2});
        tc.emplace_back(crow, t.layout.sigma_index(i), -1.0);
        p.cone_rhs(crow) = -problem.rho_min;
        ++crow;
        tc.emplace_back(crow, t.layout.sigma_index(i), 1.0);
        p.cone_rhs(crow) = problem.rho_max;
        ++crow;

        p.blocks.push_back({rotated ? ConeKind::Rsoc : ConeKind::Soc, crow, mag_dim});
        tc.emplace_back(crow, t.layout.sigma_index(i), -1.0);  // s0 = sigma_i
        ++crow;
        if (rotated) {
            p.cone_rhs(crow) = 1.0;  // s1 pinned to the constant 1
            ++crow;
        }
        for (Eigen::Index cc = 0; cc < m; ++cc, ++crow) {
            tc.emplace_back(crow, t.layout.u_index(i, cc), -1.0);
        }
    }
    p.cone.resize(cone_rows, p.num_vars);
    p.cone.setFromTriplets(tc.begin(), tc.end());
    p.cone.makeCompressed();
    return t;
}

}  // namespace

Transcription transcribe_relaxed(const DiscreteProblem& problem) {
    return transcribe_with_dynamics(problem, problem.a);
}

Transcription transcribe_perturbed(const DiscreteProblem& problem, const Mat& a_tilde) {
    if (a_tilde.rows() != problem.a.rows() || a_tilde.cols() != problem.a.cols()) {
        throw invalid_argument_error("transcribe_perturbed: perturbed dynamics shape mismatch");
    }
    return transcribe_with_dynamics(problem, a_tilde);
}

RecoveredDuals recover_duals(const ConeProgram& program, const Vec& equality_duals) {
    if (equality_duals.size() != program.num_eq_rows()) {
        throw invalid_argument_error("recover_duals: dual vector length mismatch");
    }
    Eigen::Index max_step = 0;
    Eigen::Index init_rows = 0, boundary_rows = 0, state_dim = 0;
    for (const EqRowLabel& l : program.eq_labels) {
        switch (l.kind) {
            case EqRowKind::Dynamics:
                max_step = std::max(max_step, l.step);
                state_dim = std::max(state_dim, l.comp + 1);
                break;
            case EqRowKind::Initial: init_rows = std::max(init_rows, l.comp + 1); break;
            case EqRowKind::Boundary: boundary_rows = std::max(boundary_rows, l.comp + 1); break;
        }
    }
    RecoveredDuals out;
    out.costates.assign(max_step, Vec::Zero(state_dim));
    out.initial_dual = Vec::Zero(init_rows);
    out.boundary_dual = Vec::Zero(boundary_rows);
    for (Eigen::Index r = 0; r < equality_duals.size(); ++r) {
        const EqRowLabel& l = program.eq_labels[r];
        switch (l.kind) {
            case EqRowKind::Dynamics: out.costates[l.step - 1](l.comp) = equality_duals(r); break;
            case EqRowKind::Initial: out.initial_dual(l.comp) = equality_duals(r); break;
            case EqRowKind::Boundary: out.boundary_dual(l.comp) = equality_duals(r); break;
        }
    }
    return out;
}

LcvxSolution extract_solution(const Transcription& transcription, const ConeSolution& solution) {
    LcvxSolution out;
    out.stats = solution;
    out.objective = solution.objective;
    if (solution.z.size() == transcription.layout.total()) {
        out.states = transcription.layout.states(solution.z);
        out.inputs = transcription.layout.inputs(solution.z);
        out.slacks = transcription.layout.slacks(solution.z);
    }
    if (solution.equality_duals.size() == transcription.program.num_eq_rows()) {
        RecoveredDuals d = recover_duals(transcription.program, solution.equality_duals);
        out.costates = std::move(d.costates);
        out.initial_dual = std::move(d.initial_dual);
        out.boundary_dual = std::move(d.boundary_dual);
    }
    return out;
}

}  // namespace lcvx
