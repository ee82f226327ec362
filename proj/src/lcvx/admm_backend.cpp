#include <Eigen/SparseCholesky>

#include <cmath>

#include "lcvx/cone_transform.hpp"
#include "lcvx/conic.hpp"

namespace lcvx {

namespace {

// Splits the problem as f(v) = c'x + indicator{Ev = rhs} over v = (x, s) and
// g(v) = indicator{s in K}; alternates an equality-constrained quadratic step
// with a cone projection. Slower than the interior-point method but shares no
// code path with it past the block transform, which is the point.
struct AdmmWorkspace {
    Eigen::Index n, m, p;
    SpMat e, g;
    Vec f, h, c;
    std::vector<detail::SolverBlock> blocks;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
    double rho = 1.0;
};

}  // namespace

ConeSolution solve_cone_program_firstorder(const ConeProgram& program,
                                           const SolverSettings& settings) {
    AdmmWorkspace ws;
    ws.n = program.num_vars;
    ws.m = program.num_eq_rows();
    ws.p = program.num_cone_rows();
    ws.e = program.eq;
    ws.f = program.eq_rhs;
    ws.c = program.c;
    detail::SolverCone cone = detail::transform_rotated(program);
    ws.g = std::move(cone.g);
    ws.h = std::move(cone.h);
    ws.blocks = std::move(cone.blocks);

    const Eigen::Index nv = ws.n + ws.p;      // stacked (x, s)
    const Eigen::Index nr = ws.m + ws.p;      // stacked equality rows
    const double delta = 1e-9;

    // KKT of the quadratic step: [[rho I, Etilde'], [Etilde, -delta I]]
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ws.e.nonZeros() + ws.g.nonZeros()) + nv + nr + ws.p);
    for (Eigen::Index i = 0; i < nv; ++i) trip.emplace_back(i, i, ws.rho);
    for (Eigen::Index col = 0; col < ws.e.outerSize(); ++col) {
        for (SpMat::InnerIterator it(ws.e, col); it; ++it) {
            trip.emplace_back(nv + it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index col = 0; col < ws.g.outerSize(); ++col) {
        for (SpMat::InnerIterator it(ws.g, col); it; ++it) {
            trip.emplace_back(nv + ws.m + it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < ws.p; ++i) {
        trip.emplace_back(nv + ws.m + i, ws.n + i, 1.0);  // identity on s
    }
    for (Eigen::Index i = 0; i < nr; ++i) trip.emplace_back(nv + i, nv + i, -delta);
    SpMat kkt(nv + nr, nv + nr);
    kkt.setFromTriplets(trip.begin(), trip.end());
    ws.ldlt.compute(kkt);
    if (ws.ldlt.info() != Eigen::Success) {
        throw solver_error("firstorder backend: KKT factorization failed");
    }

    const double norm_c = std::max(1.0, ws.c.norm());
    const double norm_fh = std::max(1.0, std::sqrt(ws.f.squaredNorm() + ws.h.squaredNorm()));

    Vec w = Vec::Zero(nv);       // consensus iterate (x, s)
    Vec lam = Vec::Zero(nv);     // scaled multipliers
    Vec v(nv), nu(nr);
    Vec rhs(nv + nr);
    rhs.tail(nr) << ws.f, ws.h;

    ConeSolution out;
    out.status = SolveStatus::MaxIter;

    Vec w_snapshot = w;
    Vec lam_snapshot = lam;
    Vec nu_snapshot = Vec::Zero(nr);
    const int check_every = 25;
    int iter = 0;
    for (iter = 0; iter < settings.max_iter; ++iter) {
        // quadratic step
        rhs.head(nv) = ws.rho * (w - lam);
        rhs.head(ws.n) -= ws.c;
        Vec sol = ws.ldlt.solve(rhs);
        v = sol.head(nv);
        nu = sol.tail(nr);

        // projection step
        Vec w_prev = w;
        w = v + lam;
        detail::project_onto_cone(ws.blocks, w.tail(ws.p));
        lam += v - w;

        if (iter % check_every != check_every - 1) continue;

        const Vec x = w.head(ws.n);
        const Vec s = w.tail(ws.p);
        const Vec y = nu.head(ws.m);
        const Vec z = -ws.rho * lam.tail(ws.p);

        const double pres =
            std::max((ws.e * x - ws.f).norm(), (ws.g * x + s - ws.h).norm()) / norm_fh;
        const double dres =
            (ws.c + ws.e.transpose() * y + ws.g.transpose() * z).norm() / norm_c;
        const double pobj = ws.c.dot(x);
        const double dobj = -(ws.f.dot(y) + ws.h.dot(z));
        const double gap = std::abs(pobj - dobj) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
        if (pres <= settings.tol_p && dres <= settings.tol_d && gap <= settings.tol_g) {
            out.status = SolveStatus::Optimal;
            out.z = x;
            out.equality_duals = y;
            out.cone_duals = z;
            out.primal_residual = pres;
            out.dual_residual = dres;
            out.gap = gap;
            break;
        }

        // Infeasibility certificates from iterate differences, which converge
        // to the fixed-point gap vector much faster than the raw multipliers.
        Vec dy = y - nu_snapshot.head(ws.m);
        Vec dz = -ws.rho * (lam.tail(ws.p) - lam_snapshot.tail(ws.p));
        const double dhy = ws.f.dot(dy) + ws.h.dot(dz);
        if (dhy < 0.0) {
            Vec dz_in = dz;
            detail::project_onto_cone(ws.blocks, dz_in);
            const double q = std::max((ws.e.transpose() * dy + ws.g.transpose() * dz).norm() / norm_c,
                                      (dz - dz_in).norm()) /
                             (-dhy);
            if (q <= std::max(settings.tol_p, 1e-7)) {
                out.status = SolveStatus::PrimalInfeasible;
                out.equality_duals = dy / (-dhy);
                out.cone_duals = dz / (-dhy);
                out.z = Vec::Zero(ws.n);
                out.primal_residual = pres;
                out.dual_residual = q;
                out.gap = gap;
                break;
            }
        }
        Vec dx = w.head(ws.n) - w_snapshot.head(ws.n);
        Vec dsv = w.tail(ws.p) - w_snapshot.tail(ws.p);
        const double cdx = ws.c.dot(dx);
        if (cdx < 0.0) {
            Vec ds_in = dsv;
            detail::project_onto_cone(ws.blocks, ds_in);
            const double q = std::max({(ws.e * dx).norm(), (ws.g * dx + dsv).norm(),
                                       (dsv - ds_in).norm()}) /
                             norm_fh / (-cdx);
            if (q <= std::max(settings.tol_d, 1e-7)) {
                out.status = SolveStatus::DualInfeasible;
                out.z = dx / (-cdx);
                out.equality_duals = Vec::Zero(ws.m);
                out.cone_duals = Vec::Zero(ws.p);
                out.primal_residual = q;
                out.dual_residual = 0.0;
                out.gap = 0.0;
                break;
            }
        }
        w_snapshot = w;
        lam_snapshot = lam;
        nu_snapshot = nu;
    }
    out.iterations = iter;

    if (out.status == SolveStatus::MaxIter) {
        const Vec x = w.head(ws.n);
        const Vec s = w.tail(ws.p);
        out.z = x;
        out.equality_duals = nu.head(ws.m);
        out.cone_duals = -ws.rho * lam.tail(ws.p);
        out.primal_residual =
            std::max((ws.e * x - ws.f).norm(), (ws.g * x + s - ws.h).norm()) / norm_fh;
        out.dual_residual = (ws.c + ws.e.transpose() * out.equality_duals +
                             ws.g.transpose() * out.cone_duals)
                                .norm() /
                            norm_c;
        const double pobj = ws.c.dot(x);
        const double dobj = -(ws.f.dot(out.equality_duals) + ws.h.dot(out.cone_duals));
        out.gap = std::abs(pobj - dobj) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
    }
    if (out.cone_duals.size() == program.num_cone_rows()) {
        detail::untransform_cone_duals(program, out.cone_duals);
    }
    if (out.status == SolveStatus::Optimal) {
        out.objective = ws.c.dot(out.z) + program.objective_offset;
    }
    return out;
}

}  // namespace lcvx
