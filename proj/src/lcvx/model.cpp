#include "lcvx/model.hpp"

#include <cmath>

#include "lcvx/transcribe.hpp"

namespace lcvx {

const char* to_string(MagnitudeKind k) {
    return k == MagnitudeKind::Norm2 ? "NORM2" : "NORM2_SQ";
}

double magnitude(MagnitudeKind kind, const Vec& u) {
    const double n = u.norm();
    return kind == MagnitudeKind::Norm2 ? n : n * n;
}

BoundaryMap deduplicate_boundary(const BoundaryMap& boundary, Eigen::Index* dropped) {
    const Eigen::Index rows = boundary.g_matrix.rows();
    if (boundary.g_vector.size() != rows) {
        throw invalid_argument_error("boundary: vector length must match matrix rows");
    }
    if (dropped) *dropped = 0;
    if (rows == 0) return boundary;

    // Row-rank-revealing pass over the augmented rows keeps a maximal
    // independent subset in original order and rejects inconsistent duplicates.
    const Eigen::Index n = boundary.g_matrix.cols();
    Mat kept(rows, n + 1);
    Eigen::Index kept_count = 0;
    std::vector<Eigen::Index> kept_rows;
    for (Eigen::Index r = 0; r < rows; ++r) {
        Mat trial_g(kept_count + 1, n);
        for (Eigen::Index k = 0; k < kept_count; ++k) trial_g.row(k) = kept.row(k).head(n);
        trial_g.row(kept_count) = boundary.g_matrix.row(r);
        if (numerical_rank(trial_g) == kept_count + 1) {
            kept.row(kept_count).head(n) = boundary.g_matrix.row(r);
            kept(kept_count, n) = boundary.g_vector(r);
            ++kept_count;
            kept_rows.push_back(r);
        } else {
            // Dependent row: verify the right-hand side is consistent.
            Mat g_kept(kept_count, n);
            Vec v_kept(kept_count);
            for (Eigen::Index k = 0; k < kept_count; ++k) {
                g_kept.row(k) = kept.row(k).head(n);
                v_kept(k) = kept(k, n);
            }
            Vec coeffs = g_kept.transpose()
                             .colPivHouseholderQr()
                             .solve(boundary.g_matrix.row(r).transpose());
            const double rhs = coeffs.dot(v_kept);
            const double scale = 1.0 + std::abs(boundary.g_vector(r));
            if (std::abs(rhs - boundary.g_vector(r)) > 1e-9 * scale) {
                throw invalid_argument_error(
                    "boundary: dependent row " + std::to_string(r) +
                    " has an inconsistent right-hand side (empty boundary set)");
            }
            if (dropped) ++(*dropped);
        }
    }
    BoundaryMap out;
    out.g_matrix = kept.topRows(kept_count).leftCols(n);
    out.g_vector = kept.topRows(kept_count).col(n);
    return out;
}

DiscreteProblem make_problem(DiscreteProblem p) {
    const Eigen::Index n = p.a.rows();
    if (p.a.cols() != n) throw invalid_argument_error("problem: A must be square");
    if (p.b.rows() != n) throw invalid_argument_error("problem: B row count must match A");
    if (p.drift.size() == 0) p.drift = Vec::Zero(n);
    if (p.drift.size() != n) throw invalid_argument_error("problem: drift length must match state dim");
    if (p.x_init.size() != n) throw invalid_argument_error("problem: x_init length must match state dim");
    if (p.num_steps < 1) throw invalid_argument_error("problem: N must be at least 1");
    if (!(p.rho_min > 0.0)) {
        throw invalid_argument_error("problem: rho_min must be strictly positive");
    }
    if (!(p.rho_min < p.rho_max)) {
        throw invalid_argument_error("problem: rho_min must be strictly below rho_max");
    }
    if (!(p.cost.running > 0.0)) {
        throw invalid_argument_error("problem: running cost coefficient must be positive");
    }
    if (p.cost.terminal_linear.size() == 0) p.cost.terminal_linear = Vec::Zero(n);
    if (p.cost.terminal_linear.size() != n) {
        throw invalid_argument_error("problem: terminal cost length must match state dim");
    }
    if (p.boundary.g_matrix.cols() != n) {
        throw invalid_argument_error("problem: boundary matrix column count must match state dim");
    }
    if (!(p.dt > 0.0)) throw invalid_argument_error("problem: dt must be positive");
    p.boundary = deduplicate_boundary(p.boundary);
    return p;
}

DiscreteProblem discretize_problem(const ContinuousPlant& plant, double t_f,
                                   Eigen::Index num_steps, const Vec& x_init, double rho_min,
                                   double rho_max, MagnitudeKind g_kind, const CostSpec& cost,
                                   const BoundaryMap& boundary) {
    if (num_steps < 1) throw invalid_argument_error("discretize_problem: N must be at least 1");
    if (!(t_f > 0.0)) throw invalid_argument_error("discretize_problem: t_f must be positive");
    const double dt = t_f / static_cast<double>(num_steps);
    ZohResult zoh = discretize_zoh(plant.a_c, plant.b_c, plant.drift, dt);
    DiscreteProblem p;
    p.a = zoh.a;
    p.b = zoh.b;
    p.drift = zoh.drift;
    p.num_steps = num_steps;
    p.x_init = x_init;
    p.rho_min = rho_min;
    p.rho_max = rho_max;
    p.g_kind = g_kind;
    p.cost = cost;
    p.boundary = boundary;
    p.dt = dt;
    p.source_plant = plant;
    return make_problem(std::move(p));
}

ValidationReport validate_problem(const DiscreteProblem& problem) {
    ValidationReport r;
    r.state_dim = problem.state_dim();
    r.controllability_rank = controllability_rank(problem.a, problem.b);
    r.controllable = r.controllability_rank == r.state_dim;
    if (!r.controllable) r.notes.push_back("dynamics pair is not controllable");

    Eigen::Index dropped = 0;
    BoundaryMap dedup = deduplicate_boundary(problem.boundary, &dropped);
    r.boundary_rows_kept = dedup.g_matrix.rows();
    r.boundary_rows_dropped = dropped;

    r.cost_monotone = problem.cost.running > 0.0;

    // Feasibility probe with the upper magnitude bound tightened; an interior
    // point of the original problem survives the tightening.
    DiscreteProblem tightened = problem;
    tightened.rho_max = problem.rho_max * (1.0 - 1e-6);
    if (tightened.rho_max <= tightened.rho_min) {
        tightened.rho_max = 0.5 * (problem.rho_min + problem.rho_max);
    }
    Transcription t = transcribe_relaxed(tightened);
    SolverSettings probe_settings;
    probe_settings.tol_p = probe_settings.tol_d = probe_settings.tol_g = 1e-8;
    ConeSolution sol = solve_cone_program(t.program, probe_settings);
    r.slater.status = sol.status;
    r.slater.feasible = sol.status == SolveStatus::Optimal;
    if (sol.status == SolveStatus::PrimalInfeasible) {
        r.notes.push_back("tightened relaxation is infeasible; Slater probe failed");
    } else if (sol.status != SolveStatus::Optimal) {
        r.notes.push_back(std::string("Slater probe inconclusive: ") + to_string(sol.status));
    }
    return r;
}

std::vector<Vec> propagate_with(const Mat& a, const Mat& b, const Vec& drift, const Vec& x_init,
                                const std::vector<Vec>& inputs) {
    std::vector<Vec> states;
    states.reserve(inputs.size() + 1);
    states.push_back(x_init);
    for (const Vec& u : inputs) {
        states.push_back(a * states.back() + b * u + drift);
    }
    return states;
}

std::vector<Vec> propagate(const DiscreteProblem& problem, const std::vector<Vec>& inputs) {
    if (static_cast<Eigen::Index>(inputs.size()) != problem.num_steps) {
        throw invalid_argument_error("propagate: control count must equal N");
    }
    for (const Vec& u : inputs) {
        if (u.size() != problem.input_dim()) {
            throw invalid_argument_error("propagate: control dimension mismatch");
        }
    }
    return propagate_with(problem.a, problem.b, problem.drift, problem.x_init, inputs);
}

NonconvexEvaluation evaluate_nonconvex_cost(const DiscreteProblem& problem,
                                            const std::vector<Vec>& inputs) {
    std::vector<Vec> states = propagate(problem, inputs);
    NonconvexEvaluation out;
    out.magnitudes.reserve(inputs.size());
    double running = 0.0;
    for (const Vec& u : inputs) {
        const double g = magnitude(problem.g_kind, u);
        out.magnitudes.push_back(g);
        running += problem.cost.running * g;
    }
    const Vec& xf = states.back();
    out.cost = running + problem.cost.terminal_linear.dot(xf) + problem.cost.terminal_constant;
    out.boundary_residual = (problem.boundary.g_matrix * xf - problem.boundary.g_vector).norm();
    return out;
}

}  // namespace lcvx
