#include "lcvx/conic.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "lcvx/cone_transform.hpp"

namespace lcvx {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "OPTIMAL";
        case SolveStatus::PrimalInfeasible: return "PRIMAL_INFEASIBLE";
        case SolveStatus::DualInfeasible: return "DUAL_INFEASIBLE";
        case SolveStatus::MaxIter: return "MAX_ITER";
        case SolveStatus::Numerical: return "NUMERICAL";
    }
    return "UNKNOWN";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using InternalBlock = detail::SolverBlock;

struct SocScaling {
    double eta = 1.0;
    double w0 = 1.0;
    Vec w1;
};

// Nesterov-Todd scalings: per LP row a scalar, per second-order block the
// hyperbolic Householder representation W = eta [[w0, w1'], [w1, I + w1 w1'/(1+w0)]].
struct Scalings {
    Vec lp_w2;
    std::vector<SocScaling> soc;
};

class InteriorPoint {
  public:
    InteriorPoint(const ConeProgram& program, const SolverSettings& settings);
    ConeSolution run();

  private:
    SolverSettings opts_;
    Eigen::Index n_ = 0, m_ = 0, p_ = 0;
    SpMat e_, g_, et_, gt_;  // equilibrated
    Vec f_, h_, c_;
    std::vector<InternalBlock> blocks_;
    double cone_degree_ = 0.0;
    double norm_c_ = 1.0, norm_fh_ = 1.0;  // of the original data
    Vec dx_, de_, dg_;                     // equilibration diagonals

    Vec x_, y_, z_, s_;
    double tau_ = 1.0, kappa_ = 1.0;
    Scalings w_;
    Vec lambda_;

    // Per SOC block: dense copy of its G rows over the distinct columns it
    // touches, so W^{-1} G can be refreshed cheaply every iteration.
    struct SocRows {
        std::vector<Eigen::Index> cols;
        Mat values;  // dim x cols.size()
    };
    std::vector<SocRows> soc_rows_;
    SpMat gbar_, gbar_t_;  // W^{-1} G, kept current with the scalings
    Vec hbar_;             // W^{-1} h

    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
    double reg_ = 1e-10;
    bool pattern_analyzed_ = false;

    void polish_equalities(Vec& x_scaled) const;
    void equilibrate();
    void collect_soc_rows();
    void update_scalings();
    void refresh_scaled_rows();
    bool factor_kkt();
    void apply_w(const Vec& v, Vec& out) const;
    void apply_winv(const Vec& v, Vec& out) const;
    void kkt_solve(const Vec& rx, const Vec& ry, const Vec& rz, Vec& ox, Vec& oy, Vec& oz) const;

    void jordan_product(const InternalBlock& b, const Vec& u, const Vec& v, Vec& out) const;
    void arrow_inverse(const Vec& lam, const Vec& r, Vec& out) const;
    double max_step(const Vec& v, const Vec& dv) const;
    void shift_into_cone(Vec& v) const;

    struct Direction {
        Vec dx, dy, dz, ds;
        double dtau = 0.0, dkappa = 0.0;
    };
    // Newton direction for residual targets (Rd, Rp, Rc, Rt, Rsz, Rkap) of the
    // homogeneous system, with full-system iterative refinement; xi1 from
    // solve_feasibility_column() must be current.
    Direction newton_direction(const Vec& rd_t, const Vec& rp_t, const Vec& rc_t, double rt_t,
                               const Vec& rsz_t, double rkap_t) const;
    void refresh_feasibility_column();
    Vec x1_, y1_, z1_;  // KKT solve against (-c, f, hbar)
};

InteriorPoint::InteriorPoint(const ConeProgram& program, const SolverSettings& settings)
    : opts_(settings) {
    n_ = program.num_vars;
    m_ = program.num_eq_rows();
    p_ = program.num_cone_rows();

    e_ = program.eq;
    f_ = program.eq_rhs;
    c_ = program.c;

    detail::SolverCone cone = detail::transform_rotated(program);
    g_ = std::move(cone.g);
    h_ = std::move(cone.h);
    blocks_ = std::move(cone.blocks);
    cone_degree_ = cone.degree;
    e_.makeCompressed();

    norm_c_ = std::max(1.0, c_.norm());
    norm_fh_ = std::max(1.0, std::sqrt(f_.squaredNorm() + h_.squaredNorm()));

    reg_ = opts_.static_reg;
    equilibrate();
    et_ = e_.transpose();
    gt_ = g_.transpose();
    collect_soc_rows();
}

void InteriorPoint::collect_soc_rows() {
    // Row-major access to G per block.
    Eigen::SparseMatrix<double, Eigen::RowMajor> g_rm(g_);
    for (const InternalBlock& b : blocks_) {
        if (b.lp) continue;
        SocRows rows;
        std::vector<Eigen::Index> cols;
        for (Eigen::Index r = b.offset; r < b.offset + b.dim; ++r) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g_rm, r); it;
                 ++it) {
                cols.push_back(it.col());
            }
        }
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        rows.cols = cols;
        rows.values = Mat::Zero(b.dim, static_cast<Eigen::Index>(cols.size()));
        for (Eigen::Index r = b.offset; r < b.offset + b.dim; ++r) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g_rm, r); it;
                 ++it) {
                const auto pos = std::lower_bound(cols.begin(), cols.end(), it.col()) - cols.begin();
                rows.values(r - b.offset, pos) = it.value();
            }
        }
        soc_rows_.push_back(std::move(rows));
    }
}

void InteriorPoint::refresh_scaled_rows() {
    // gbar = W^{-1} G; LP rows scale by 1/w, SOC blocks mix rows densely.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g_.nonZeros()) * 2);
    Eigen::SparseMatrix<double, Eigen::RowMajor> g_rm(g_);
    std::size_t si = 0;
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            for (Eigen::Index r = b.offset; r < b.offset + b.dim; ++r) {
                const double inv_w = 1.0 / std::sqrt(w_.lp_w2(r));
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(g_rm, r); it;
                     ++it) {
                    trip.emplace_back(r, it.col(), it.value() * inv_w);
                }
            }
        } else {
            const SocRows& rows = soc_rows_[si];
            const SocScaling& sc = w_.soc[si];
            ++si;
            // W^{-1} block applied column by column of the dense copy
            Mat scaled(b.dim, rows.values.cols());
            for (Eigen::Index ci = 0; ci < rows.values.cols(); ++ci) {
                const Vec v = rows.values.col(ci);
                const double t = sc.w1.dot(v.tail(b.dim - 1));
                scaled(0, ci) = (sc.w0 * v(0) - t) / sc.eta;
                scaled.col(ci).tail(b.dim - 1) =
                    (-v(0) * sc.w1 + v.tail(b.dim - 1) + (t / (1.0 + sc.w0)) * sc.w1) / sc.eta;
            }
            for (Eigen::Index r = 0; r < b.dim; ++r) {
                for (Eigen::Index ci = 0; ci < rows.values.cols(); ++ci) {
                    trip.emplace_back(b.offset + r, rows.cols[static_cast<std::size_t>(ci)],
                                      scaled(r, ci));
                }
            }
        }
    }
    gbar_.resize(p_, n_);
    gbar_.setFromTriplets(trip.begin(), trip.end());
    gbar_.makeCompressed();
    gbar_t_ = gbar_.transpose();
    apply_winv(h_, hbar_);
}

void InteriorPoint::equilibrate() {
    dx_ = Vec::Ones(n_);
    de_ = Vec::Ones(m_);
    dg_ = Vec::Ones(p_);
    for (int round = 0; round < opts_.equilibrate_rounds; ++round) {
        Vec col_max = Vec::Zero(n_);
        Vec row_e = Vec::Zero(m_);
        Vec row_g = Vec::Zero(p_);
        for (Eigen::Index col = 0; col < e_.outerSize(); ++col) {
            for (SpMat::InnerIterator it(e_, col); it; ++it) {
                const double a = std::abs(it.value());
                col_max(it.col()) = std::max(col_max(it.col()), a);
                row_e(it.row()) = std::max(row_e(it.row()), a);
            }
        }
        for (Eigen::Index col = 0; col < g_.outerSize(); ++col) {
            for (SpMat::InnerIterator it(g_, col); it; ++it) {
                const double a = std::abs(it.value());
                col_max(it.col()) = std::max(col_max(it.col()), a);
                row_g(it.row()) = std::max(row_g(it.row()), a);
            }
        }
        // second-order blocks share one scale so the scaled cone is the cone
        for (const InternalBlock& b : blocks_) {
            if (b.lp) continue;
            const double blk = row_g.segment(b.offset, b.dim).maxCoeff();
            row_g.segment(b.offset, b.dim).setConstant(blk);
        }
        auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
        Vec sx = col_max.unaryExpr(inv_sqrt);
        Vec se = row_e.unaryExpr(inv_sqrt);
        Vec sg = row_g.unaryExpr(inv_sqrt);
        for (Eigen::Index col = 0; col < e_.outerSize(); ++col) {
            for (SpMat::InnerIterator it(e_, col); it; ++it) {
                it.valueRef() *= se(it.row()) * sx(it.col());
            }
        }
        for (Eigen::Index col = 0; col < g_.outerSize(); ++col) {
            for (SpMat::InnerIterator it(g_, col); it; ++it) {
                it.valueRef() *= sg(it.row()) * sx(it.col());
            }
        }
        dx_ = dx_.cwiseProduct(sx);
        de_ = de_.cwiseProduct(se);
        dg_ = dg_.cwiseProduct(sg);
    }
    f_ = f_.cwiseProduct(de_);
    h_ = h_.cwiseProduct(dg_);
    c_ = c_.cwiseProduct(dx_);
}

void InteriorPoint::jordan_product(const InternalBlock& b, const Vec& u, const Vec& v,
                                   Vec& out) const {
    if (b.lp) {
        out.segment(b.offset, b.dim) =
            u.segment(b.offset, b.dim).cwiseProduct(v.segment(b.offset, b.dim));
    } else {
        const auto us = u.segment(b.offset, b.dim);
        const auto vs = v.segment(b.offset, b.dim);
        out(b.offset) = us.dot(vs);
        out.segment(b.offset + 1, b.dim - 1) =
            us(0) * vs.tail(b.dim - 1) + vs(0) * us.tail(b.dim - 1);
    }
}

void InteriorPoint::arrow_inverse(const Vec& lam, const Vec& r, Vec& out) const {
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            out.segment(b.offset, b.dim) =
                r.segment(b.offset, b.dim).cwiseQuotient(lam.segment(b.offset, b.dim));
        } else {
            const auto l = lam.segment(b.offset, b.dim);
            const auto rs = r.segment(b.offset, b.dim);
            const double a = l(0);
            const double det = a * a - l.tail(b.dim - 1).squaredNorm();
            const double r0 = (a * rs(0) - l.tail(b.dim - 1).dot(rs.tail(b.dim - 1))) / det;
            out(b.offset) = r0;
            out.segment(b.offset + 1, b.dim - 1) =
                (rs.tail(b.dim - 1) - r0 * l.tail(b.dim - 1)) / a;
        }
    }
}

void InteriorPoint::update_scalings() {
    w_.lp_w2.resize(p_);
    w_.soc.clear();
    lambda_.resize(p_);
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            for (Eigen::Index i = b.offset; i < b.offset + b.dim; ++i) {
                if (s_(i) <= 0.0 || z_(i) <= 0.0) throw solver_error("iterate left the cone");
                w_.lp_w2(i) = s_(i) / z_(i);
                lambda_(i) = std::sqrt(s_(i) * z_(i));
            }
        } else {
            const auto s = s_.segment(b.offset, b.dim);
            const auto z = z_.segment(b.offset, b.dim);
            const double sres = s(0) * s(0) - s.tail(b.dim - 1).squaredNorm();
            const double zres = z(0) * z(0) - z.tail(b.dim - 1).squaredNorm();
            if (sres <= 0.0 || zres <= 0.0 || s(0) <= 0.0 || z(0) <= 0.0) {
                throw solver_error("iterate left the cone");
            }
            const double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
            Vec sbar = s / snorm, zbar = z / znorm;
            const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
            SocScaling sc;
            sc.eta = std::sqrt(snorm / znorm);
            sc.w0 = (sbar(0) + zbar(0)) / (2.0 * gamma);
            sc.w1 = (sbar.tail(b.dim - 1) - zbar.tail(b.dim - 1)) / (2.0 * gamma);
            w_.soc.push_back(sc);
            const double zt = sc.w1.dot(z.tail(b.dim - 1));
            lambda_(b.offset) = sc.eta * (sc.w0 * z(0) + zt);
            lambda_.segment(b.offset + 1, b.dim - 1) =
                sc.eta * (z(0) * sc.w1 + z.tail(b.dim - 1) + (zt / (1.0 + sc.w0)) * sc.w1);
        }
    }
}

void InteriorPoint::apply_w(const Vec& v, Vec& out) const {
    out.resize(p_);
    std::size_t si = 0;
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            out.segment(b.offset, b.dim) =
                v.segment(b.offset, b.dim).cwiseProduct(w_.lp_w2.segment(b.offset, b.dim).cwiseSqrt());
        } else {
            const SocScaling& sc = w_.soc[si++];
            const auto vs = v.segment(b.offset, b.dim);
            const double t = sc.w1.dot(vs.tail(b.dim - 1));
            out(b.offset) = sc.eta * (sc.w0 * vs(0) + t);
            out.segment(b.offset + 1, b.dim - 1) =
                sc.eta * (vs(0) * sc.w1 + vs.tail(b.dim - 1) + (t / (1.0 + sc.w0)) * sc.w1);
        }
    }
}

void InteriorPoint::apply_winv(const Vec& v, Vec& out) const {
    out.resize(p_);
    std::size_t si = 0;
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            out.segment(b.offset, b.dim) =
                v.segment(b.offset, b.dim).cwiseQuotient(w_.lp_w2.segment(b.offset, b.dim).cwiseSqrt());
        } else {
            const SocScaling& sc = w_.soc[si++];
            const auto vs = v.segment(b.offset, b.dim);
            const double t = sc.w1.dot(vs.tail(b.dim - 1));
            out(b.offset) = (sc.w0 * vs(0) - t) / sc.eta;
            out.segment(b.offset + 1, b.dim - 1) =
                (-vs(0) * sc.w1 + vs.tail(b.dim - 1) + (t / (1.0 + sc.w0)) * sc.w1) / sc.eta;
        }
    }
}

bool InteriorPoint::factor_kkt() {
    // K = [[reg, E', Gbar'], [E, -reg, 0], [Gbar, 0, -I - reg]] with
    // Gbar = W^{-1} G; scaling the cone rows keeps the system conditioned
    // like 1/sqrt(mu) instead of 1/mu near convergence.
    refresh_scaled_rows();
    const Eigen::Index dim = n_ + m_ + p_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(e_.nonZeros() + gbar_.nonZeros() + dim));
    for (Eigen::Index i = 0; i < n_; ++i) trip.emplace_back(i, i, reg_);
    for (Eigen::Index col = 0; col < e_.outerSize(); ++col) {
        for (SpMat::InnerIterator it(e_, col); it; ++it) {
            trip.emplace_back(n_ + it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index col = 0; col < gbar_.outerSize(); ++col) {
        for (SpMat::InnerIterator it(gbar_, col); it; ++it) {
            trip.emplace_back(n_ + m_ + it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -reg_);
    for (Eigen::Index i = 0; i < p_; ++i) trip.emplace_back(n_ + m_ + i, n_ + m_ + i, -1.0 - reg_);
    SpMat kkt(dim, dim);
    kkt.setFromTriplets(trip.begin(), trip.end());
    if (!pattern_analyzed_) {
        ldlt_.analyzePattern(kkt);
        pattern_analyzed_ = true;
    }
    ldlt_.factorize(kkt);
    if (ldlt_.info() != Eigen::Success) return false;

    // Quasi-definite LDLT can lose pivots silently near convergence; a cheap
    // probe solve catches a broken factorization before it poisons a step.
    Vec probe = Vec::Ones(dim);
    Vec sol = ldlt_.solve(probe);
    if (!sol.allFinite()) return false;
    Vec res(dim);
    const auto sx = sol.head(n_);
    const auto sy = sol.segment(n_, m_);
    const auto sz = sol.tail(p_);
    res.head(n_) = probe.head(n_) - (et_ * sy + gbar_t_ * sz + reg_ * sx);
    res.segment(n_, m_) = probe.segment(n_, m_) - (e_ * sx - reg_ * sy);
    res.tail(p_) = probe.tail(p_) - (gbar_ * sx - (1.0 + reg_) * sz);
    return res.norm() <= 1e-4 * (1.0 + sol.norm());
}

void InteriorPoint::kkt_solve(const Vec& rx, const Vec& ry, const Vec& rz, Vec& ox, Vec& oy,
                              Vec& oz) const {
    const Eigen::Index dim = n_ + m_ + p_;
    Vec rhs(dim);
    rhs << rx, ry, rz;
    Vec sol = ldlt_.solve(rhs);
    Vec res(dim);
    Vec prev = sol;
    double prev_rn = kInf;
    for (int round = 0; round < opts_.refine_rounds; ++round) {
        const auto sx = sol.head(n_);
        const auto sy = sol.segment(n_, m_);
        const auto sz = sol.tail(p_);
        res.head(n_) = rx - (et_ * sy + gbar_t_ * sz);
        res.segment(n_, m_) = ry - e_ * sx;
        res.tail(p_) = rz - (gbar_ * sx - sz);
        const double rn = res.norm();
        if (rn > prev_rn) {  // refinement diverging; keep the better iterate
            sol = prev;
            break;
        }
        if (rn <= 1e-15 * (1.0 + rhs.norm())) break;
        prev = sol;
        prev_rn = rn;
        sol += ldlt_.solve(res);
    }
    ox = sol.head(n_);
    oy = sol.segment(n_, m_);
    oz = sol.tail(p_);
}

double InteriorPoint::max_step(const Vec& v, const Vec& dv) const {
    double alpha = kInf;
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            for (Eigen::Index i = b.offset; i < b.offset + b.dim; ++i) {
                if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
            }
        } else {
            const auto vs = v.segment(b.offset, b.dim);
            const auto ds = dv.segment(b.offset, b.dim);
            const double c2 = ds(0) * ds(0) - ds.tail(b.dim - 1).squaredNorm();
            const double c1 = vs(0) * ds(0) - vs.tail(b.dim - 1).dot(ds.tail(b.dim - 1));
            const double c0 = vs(0) * vs(0) - vs.tail(b.dim - 1).squaredNorm();
            double root = kInf;
            const double scale = std::abs(c2) + std::abs(c1) + std::abs(c0);
            if (scale > 0.0 && std::abs(c2) <= 1e-14 * scale) {
                if (c1 < 0.0) root = -c0 / (2.0 * c1);
            } else if (c2 != 0.0) {
                const double disc = c1 * c1 - c2 * c0;
                if (c2 < 0.0) {
                    root = (-c1 + std::sqrt(std::max(0.0, disc))) / c2;
                    if (root < 0.0) root = (-c1 - std::sqrt(std::max(0.0, disc))) / c2;
                } else if (disc >= 0.0 && c1 < 0.0) {
                    root = (-c1 - std::sqrt(disc)) / c2;
                }
            }
            if (root >= 0.0) alpha = std::min(alpha, root);
            if (ds(0) < 0.0) alpha = std::min(alpha, -vs(0) / ds(0));
        }
    }
    return alpha;
}

void InteriorPoint::refresh_feasibility_column() { kkt_solve(-c_, f_, hbar_, x1_, y1_, z1_); }

InteriorPoint::Direction InteriorPoint::newton_direction(const Vec& rd_t, const Vec& rp_t,
                                                         const Vec& rc_t, double rt_t,
                                                         const Vec& rsz_t, double rkap_t) const {
    Direction d;
    d.dx = Vec::Zero(n_);
    d.dy = Vec::Zero(m_);
    d.dz = Vec::Zero(p_);
    d.ds = Vec::Zero(p_);

    // Current residual targets; shrunk by each refinement pass.
    Vec rd = rd_t, rp = rp_t, rc = rc_t, rsz = rsz_t;
    double rt = rt_t, rkap = rkap_t;
    const double denom = -kappa_ / tau_ - z1_.squaredNorm();

    Vec bzt(p_), rc_bar(p_), x2, y2, z2, dzt, winv_ds, w_dz, tmp(p_);
    for (int pass = 0; pass < 4; ++pass) {
        arrow_inverse(lambda_, rsz, bzt);
        apply_winv(rc, rc_bar);
        Vec bz_kkt = rc_bar - bzt;
        kkt_solve(rd, rp, bz_kkt, x2, y2, z2);
        const double dot2 =
            x1_.dot(rd) - y1_.dot(rp) - z1_.dot(bz_kkt) - 2.0 * z1_.dot(z2);
        const double dtau_c = (rt - rkap / tau_ - dot2) / denom;
        Vec dx_c = x2 + dtau_c * x1_;
        Vec dy_c = y2 + dtau_c * y1_;
        dzt = z2 + dtau_c * z1_;
        Vec dz_c;
        apply_winv(dzt, dz_c);
        // ds from the cone-residual row directly; recovering it through the
        // scaled space multiplies KKT-solve error by ||W||, which diverges as
        // the barrier parameter vanishes. The complementarity row absorbs the
        // discrepancy instead, where it only perturbs the centering.
        Vec ds_c = rc - g_ * dx_c + h_ * dtau_c;
        const double dkappa_c = (rkap - kappa_ * dtau_c) / tau_;

        d.dx += dx_c;
        d.dy += dy_c;
        d.dz += dz_c;
        d.ds += ds_c;
        d.dtau += dtau_c;
        d.dkappa += dkappa_c;
        if (pass == 3) break;

        // Residuals of the full homogeneous Newton system at the accumulated
        // direction; the tau row cancels catastrophically when computed via
        // the reduced formula, so it is re-measured here and corrected.
        rd = rd_t - (et_ * d.dy + gt_ * d.dz + c_ * d.dtau);
        rp = rp_t - (e_ * d.dx - f_ * d.dtau);
        rc = rc_t - (d.ds + g_ * d.dx - h_ * d.dtau);
        rt = rt_t - (d.dkappa + c_.dot(d.dx) + f_.dot(d.dy) + h_.dot(d.dz));
        apply_winv(d.ds, winv_ds);
        apply_w(d.dz, w_dz);
        Vec sum = winv_ds + w_dz;
        for (const InternalBlock& blk : blocks_) jordan_product(blk, lambda_, sum, tmp);
        rsz = rsz_t - tmp;
        rkap = rkap_t - (kappa_ * d.dtau + tau_ * d.dkappa);
        const double scale = 1.0 + std::sqrt(rd_t.squaredNorm() + rp_t.squaredNorm() +
                                             rc_t.squaredNorm() + rsz_t.squaredNorm() +
                                             rt_t * rt_t + rkap_t * rkap_t);
        const double rn = std::sqrt(rd.squaredNorm() + rp.squaredNorm() + rc.squaredNorm() +
                                    rsz.squaredNorm() + rt * rt + rkap * rkap);
        if (rn <= 1e-14 * scale) break;
    }
    return d;
}

// Least-squares restoration of the equality constraints: the late central-path
// iterates carry the sharpest complementarity information but drift off the
// affine constraints; the minimum-norm correction brings them back without
// disturbing the active-set pattern.
void InteriorPoint::polish_equalities(Vec& x_scaled) const {
    if (m_ == 0) return;
    Vec resid = f_ - e_ * x_scaled;
    if (resid.norm() <= 1e-15 * (1.0 + f_.norm())) return;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(e_.nonZeros() + n_ + m_));
    for (Eigen::Index i = 0; i < n_; ++i) trip.emplace_back(i, i, 1.0);
    for (Eigen::Index col = 0; col < e_.outerSize(); ++col) {
        for (SpMat::InnerIterator it(e_, col); it; ++it) {
            trip.emplace_back(n_ + it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -1e-14);
    SpMat kkt(n_ + m_, n_ + m_);
    kkt.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> solver(kkt);
    if (solver.info() != Eigen::Success) return;
    Vec rhs = Vec::Zero(n_ + m_);
    rhs.tail(m_) = resid;
    Vec sol = solver.solve(rhs);
    for (int round = 0; round < 2; ++round) {
        Vec res2(n_ + m_);
        res2.head(n_) = -(sol.head(n_) + et_ * sol.tail(m_));
        res2.tail(m_) = resid - e_ * sol.head(n_);
        sol += solver.solve(res2);
    }
    x_scaled += sol.head(n_);
}

void InteriorPoint::shift_into_cone(Vec& v) const {
    double worst = -kInf;
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            worst = std::max(worst, -v.segment(b.offset, b.dim).minCoeff());
        } else {
            worst = std::max(worst, v.segment(b.offset + 1, b.dim - 1).norm() - v(b.offset));
        }
    }
    if (worst >= 0.0) {
        const double bump = 1.0 + worst;
        for (const InternalBlock& b : blocks_) {
            if (b.lp) {
                v.segment(b.offset, b.dim).array() += bump;
            } else {
                v(b.offset) += bump;
            }
        }
    }
}

ConeSolution InteriorPoint::run() {
    ConeSolution out;
    if (p_ == 0) throw invalid_argument_error("cone program has no cone rows");

    s_ = Vec::Zero(p_);
    for (const InternalBlock& b : blocks_) {
        if (b.lp) {
            s_.segment(b.offset, b.dim).setOnes();
        } else {
            s_(b.offset) = 1.0;
        }
    }
    z_ = s_;
    update_scalings();  // exact identity at the cone identity point
    if (!factor_kkt()) {
        reg_ *= 100.0;
        if (!factor_kkt()) throw solver_error("initial KKT factorization failed");
    }
    Vec x0, y0, z0;
    kkt_solve(Vec::Zero(n_), f_, h_, x0, y0, z0);
    x_ = x0;
    y_ = y0;
    s_ = -z0;
    shift_into_cone(s_);
    Vec xd, yd, zd;
    kkt_solve(-c_, Vec::Zero(m_), Vec::Zero(p_), xd, yd, zd);
    z_ = zd;
    shift_into_cone(z_);
    tau_ = 1.0;
    kappa_ = 1.0;

    double best_metric = kInf;
    Vec bx = x_, by = y_, bz = z_, bs = s_;
    double btau = tau_, bkappa = kappa_;
    double bpres = kInf, bdres = kInf, bgap = kInf;
    int best_iter = 0;
    constexpr int kStallLimit = 12;

    int iter = 0;
    SolveStatus status = SolveStatus::MaxIter;
    for (iter = 0; iter <= opts_.max_iter; ++iter) {
        Vec rd = et_ * y_ + gt_ * z_ + c_ * tau_;
        Vec rp = e_ * x_ - f_ * tau_;
        Vec rc = s_ + g_ * x_ - h_ * tau_;
        const double rt = kappa_ + c_.dot(x_) + f_.dot(y_) + h_.dot(z_);
        const double st_gap = s_.dot(z_);
        const double mu = (st_gap + tau_ * kappa_) / (cone_degree_ + 1.0);

        // Convergence is judged on the original (unequilibrated) data.
        const double pres = std::max(rp.cwiseQuotient(de_).norm(), rc.cwiseQuotient(dg_).norm()) /
                            (tau_ * norm_fh_);
        const double dres = rd.cwiseQuotient(dx_).norm() / (tau_ * norm_c_);
        const double pobj = c_.dot(x_) / tau_;
        const double dobj = -(f_.dot(y_) + h_.dot(z_)) / tau_;
        const double gap_abs = st_gap / (tau_ * tau_);
        const double relgap = gap_abs / std::max({1.0, std::abs(pobj), std::abs(dobj)});

        if (opts_.verbose) {
            std::printf("it %3d  mu %9.2e  pres %9.2e  dres %9.2e  relgap %9.2e  tau %9.2e  kappa %9.2e",
                        iter, mu, pres, dres, relgap, tau_, kappa_);
            if (opts_.verbose_probe) opts_.verbose_probe(x_.cwiseProduct(dx_) / tau_);
            std::printf("\n");
        }

        // Distance to the requested tolerances decides both the iterate we
        // keep and termination; tight gap requests keep the solver grinding
        // into the sharp-complementarity regime even as primal feasibility
        // saturates (restored by the final polish).
        const double metric =
            std::max({pres / opts_.tol_p, dres / opts_.tol_d, relgap / opts_.tol_g});
        if (metric < best_metric) {
            best_metric = metric;
            best_iter = iter;
            bx = x_; by = y_; bz = z_; bs = s_;
            btau = tau_; bkappa = kappa_;
            bpres = pres; bdres = dres; bgap = relgap;
        }

        if (metric <= 1.0) {
            status = SolveStatus::Optimal;
            break;
        }
        if (iter - best_iter >= kStallLimit) {
            status = SolveStatus::MaxIter;
            break;
        }

        const double hy = f_.dot(y_) + h_.dot(z_);
        if (hy < 0.0) {
            const double pinfres =
                (et_ * y_ + gt_ * z_).cwiseQuotient(dx_).norm() / norm_c_ / (-hy);
            if (pinfres <= opts_.tol_p) {
                status = SolveStatus::PrimalInfeasible;
                by = y_ / (-hy);
                bz = z_ / (-hy);
                bx.setZero();
                bs.setZero();
                btau = bkappa = 1.0;
                bpres = pres; bdres = pinfres; bgap = relgap;
                break;
            }
        }
        const double cx = c_.dot(x_);
        if (cx < 0.0) {
            const double dinfres = std::max((e_ * x_).cwiseQuotient(de_).norm(),
                                            (g_ * x_ + s_).cwiseQuotient(dg_).norm()) /
                                   norm_fh_ / (-cx);
            if (dinfres <= opts_.tol_d) {
                status = SolveStatus::DualInfeasible;
                bx = x_ / (-cx);
                bs = s_ / (-cx);
                by.setZero();
                bz.setZero();
                btau = bkappa = 1.0;
                bpres = dinfres; bdres = dres; bgap = relgap;
                break;
            }
        }

        if (iter == opts_.max_iter) {
            status = SolveStatus::MaxIter;
            break;
        }

        try {
            update_scalings();
        } catch (const Error&) {
            status = SolveStatus::Numerical;
            break;
        }
        bool ok = factor_kkt();
        for (int bump = 0; bump < 4 && !ok; ++bump) {
            reg_ *= 100.0;  // sticky; precision is recovered by refinement
            ok = factor_kkt();
        }
        if (!ok) {
            status = SolveStatus::Numerical;
            break;
        }

        refresh_feasibility_column();

        // Affine direction: full residual annihilation, no centering.
        Vec lam_sq(p_);
        for (const InternalBlock& blk : blocks_) jordan_product(blk, lambda_, lambda_, lam_sq);
        Direction aff = newton_direction(-rd, -rp, -rc, -rt, -lam_sq, -tau_ * kappa_);
        if (!aff.dx.allFinite() || !aff.ds.allFinite() || !aff.dz.allFinite() ||
            !std::isfinite(aff.dtau)) {
            status = SolveStatus::Numerical;
            break;
        }

        double alpha_a = std::min({max_step(s_, aff.ds), max_step(z_, aff.dz),
                                   aff.dtau < 0.0 ? -tau_ / aff.dtau : kInf,
                                   aff.dkappa < 0.0 ? -kappa_ / aff.dkappa : kInf});
        alpha_a = std::min(alpha_a, 1.0);
        const double sigma = std::pow(1.0 - alpha_a, 3.0);

        // Combined direction with Mehrotra correction.
        Vec winv_ds_a, w_dz_a;
        apply_winv(aff.ds, winv_ds_a);
        apply_w(aff.dz, w_dz_a);
        Vec corr(p_);
        for (const InternalBlock& blk : blocks_) jordan_product(blk, winv_ds_a, w_dz_a, corr);
        Vec rhs_sz = -lam_sq - corr;
        const double smu = sigma * mu;
        for (const InternalBlock& blk : blocks_) {
            rhs_sz(blk.offset) += smu;
            if (blk.lp) {
                for (Eigen::Index i = 1; i < blk.dim; ++i) rhs_sz(blk.offset + i) += smu;
            }
        }
        const double one_minus = 1.0 - sigma;
        Direction dir = newton_direction(-one_minus * rd, -one_minus * rp, Vec(-one_minus * rc),
                                         -one_minus * rt, rhs_sz,
                                         -tau_ * kappa_ + smu - aff.dtau * aff.dkappa);
        Vec& dx = dir.dx;
        Vec& dy = dir.dy;
        Vec& dz = dir.dz;
        Vec& ds = dir.ds;
        const double dtau = dir.dtau;
        const double dkappa = dir.dkappa;

        double alpha = std::min({max_step(s_, ds), max_step(z_, dz),
                                 dtau < 0.0 ? -tau_ / dtau : kInf,
                                 dkappa < 0.0 ? -kappa_ / dkappa : kInf});
        alpha = std::min(0.99 * alpha, 1.0);
        if (opts_.verbose) {
            std::printf(
                "      |dx| %8.1e |dy| %8.1e |dz| %8.1e dtau %+8.1e sigma %8.1e "
                "alpha_a %8.1e alpha %8.1e\n",
                dx.norm(), dy.norm(), dz.norm(), dtau, sigma, alpha_a, alpha);
        }
        if (!std::isfinite(alpha) || alpha <= 0.0) {
            status = SolveStatus::Numerical;
            break;
        }

        // The boundary-step computation cancels badly near convergence; verify
        // the stepped point is strictly interior and back off if rounding
        // pushed it out.
        auto strictly_interior = [&](const Vec& sv, const Vec& zv, double tv, double kv) {
            if (!std::isfinite(tv) || !std::isfinite(kv) || tv <= 0.0 || kv <= 0.0) return false;
            if (!sv.allFinite() || !zv.allFinite()) return false;
            for (const InternalBlock& b : blocks_) {
                if (b.lp) {
                    for (Eigen::Index i = b.offset; i < b.offset + b.dim; ++i) {
                        if (sv(i) <= 0.0 || zv(i) <= 0.0) return false;
                    }
                } else {
                    const auto ss = sv.segment(b.offset, b.dim);
                    const auto zs = zv.segment(b.offset, b.dim);
                    if (ss(0) <= 0.0 || zs(0) <= 0.0) return false;
                    if (ss(0) * ss(0) - ss.tail(b.dim - 1).squaredNorm() <= 0.0) return false;
                    if (zs(0) * zs(0) - zs.tail(b.dim - 1).squaredNorm() <= 0.0) return false;
                }
            }
            return true;
        };
        bool stepped = false;
        for (int backoff = 0; backoff < 30; ++backoff) {
            Vec s_new = s_ + alpha * ds;
            Vec z_new = z_ + alpha * dz;
            const double tau_new = tau_ + alpha * dtau;
            const double kappa_new = kappa_ + alpha * dkappa;
            if (strictly_interior(s_new, z_new, tau_new, kappa_new)) {
                x_ += alpha * dx;
                y_ += alpha * dy;
                z_ = std::move(z_new);
                s_ = std::move(s_new);
                tau_ = tau_new;
                kappa_ = kappa_new;
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!stepped) {
            status = SolveStatus::Numerical;
            break;
        }
    }

    out.status = status;
    out.iterations = iter;
    out.primal_residual = bpres;
    out.dual_residual = bdres;
    out.gap = bgap;
    if (status == SolveStatus::PrimalInfeasible || status == SolveStatus::DualInfeasible) {
        out.z = bx.cwiseProduct(dx_);
        out.equality_duals = by.cwiseProduct(de_);
        out.cone_duals = bz.cwiseProduct(dg_);
        out.objective = 0.0;
        return out;
    }

    // De-homogenize the kept iterate, restore equality feasibility, then
    // measure the delivered point honestly on the original data.
    Vec xs = bx / btau;
    polish_equalities(xs);
    Vec ys = by / btau;
    Vec zs = bz / btau;

    const Vec eq_res = (e_ * xs - f_).cwiseQuotient(de_);
    Vec s_orig = (h_ - g_ * xs).cwiseQuotient(dg_);
    Vec s_proj = s_orig;
    detail::project_onto_cone(blocks_, s_proj);
    const double cone_res = (s_orig - s_proj).norm();
    const double pres = std::max(eq_res.norm(), cone_res) / norm_fh_;
    const double dres =
        (et_ * ys + gt_ * zs + c_).cwiseQuotient(dx_).norm() / norm_c_;
    const double pobj = c_.dot(xs);
    const double dobj = -(f_.dot(ys) + h_.dot(zs));
    // complementarity gap of the delivered pair (s'z is invariant under the
    // block-uniform equilibration)
    const double gap =
        std::abs(s_orig.cwiseProduct(dg_).dot(zs)) /
        std::max({1.0, std::abs(pobj), std::abs(dobj)});

    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    out.status = (pres <= opts_.tol_p && dres <= opts_.tol_d && gap <= opts_.tol_g)
                     ? SolveStatus::Optimal
                     : (status == SolveStatus::Optimal ? SolveStatus::MaxIter : status);
    out.z = xs.cwiseProduct(dx_);
    out.equality_duals = ys.cwiseProduct(de_);
    out.cone_duals = zs.cwiseProduct(dg_);
    out.objective = out.z.dot(c_.cwiseQuotient(dx_));
    return out;
}

std::map<std::string, SolverBackend>& backend_registry() {
    static std::map<std::string, SolverBackend> registry{
        {"bundled",
         [](const ConeProgram& p, const SolverSettings& s) { return solve_cone_program(p, s); }},
        {"firstorder",
         [](const ConeProgram& p, const SolverSettings& s) {
             return solve_cone_program_firstorder(p, s);
         }},
    };
    return registry;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

ConeSolution solve_cone_program(const ConeProgram& program, const SolverSettings& settings) {
    if (program.c.size() != program.num_vars || program.eq.cols() != program.num_vars ||
        program.cone.cols() != program.num_vars) {
        throw invalid_argument_error("cone program dimensions are inconsistent");
    }
    InteriorPoint ip(program, settings);
    ConeSolution sol = ip.run();
    if (sol.cone_duals.size() == program.num_cone_rows()) {
        detail::untransform_cone_duals(program, sol.cone_duals);
    }
    sol.objective += program.objective_offset;
    return sol;
}

void register_backend(const std::string& name, SolverBackend backend) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    backend_registry()[name] = std::move(backend);
}

std::vector<std::string> backend_names() {
    std::lock_guard<std::mutex> lock(registry_mutex());
    std::vector<std::string> names;
    for (const auto& [k, v] : backend_registry()) names.push_back(k);
    return names;
}

ConeSolution solve_with_backend(const ConeProgram& program, const std::string& backend,
                                const SolverSettings& settings) {
    SolverBackend fn;
    {
        std::lock_guard<std::mutex> lock(registry_mutex());
        auto it = backend_registry().find(backend);
        if (it == backend_registry().end()) {
            throw invalid_argument_error("unknown solver backend: " + backend);
        }
        fn = it->second;
    }
    return fn(program, settings);
}

}  // namespace lcvx
