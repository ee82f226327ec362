// Temporary bring-up harness for the bundled solver; replaced by the real
// test suites once the solver is trusted.
#include <cstdio>

#include "lcvx/conic.hpp"

using namespace lcvx;

namespace {

ConeProgram lp_min_x_ge_1() {
    // min x  s.t.  x >= 1   (no equalities)
    ConeProgram p;
    p.num_vars = 1;
    p.c = Vec::Constant(1, 1.0);
    p.eq.resize(0, 1);
    p.eq_rhs = Vec::Zero(0);
    // s = h - Gx = x - 1 >= 0  ->  G = [-1], h = [-1]
    std::vector<Eigen::Triplet<double>> t{{0, 0, -1.0}};
    p.cone.resize(1, 1);
    p.cone.setFromTriplets(t.begin(), t.end());
    p.cone_rhs = Vec::Constant(1, -1.0);
    p.blocks.push_back({ConeKind::NonNeg, 0, 1});
    return p;
}

ConeProgram soc_min_t_norm34() {
    // min t  s.t.  ||(3,4)|| <= t  with x = (t, a, b), a = 3, b = 4 equalities
    ConeProgram p;
    p.num_vars = 3;
    p.c = Vec::Zero(3);
    p.c(0) = 1.0;
    std::vector<Eigen::Triplet<double>> te{{0, 1, 1.0}, {1, 2, 1.0}};
    p.eq.resize(2, 3);
    p.eq.setFromTriplets(te.begin(), te.end());
    p.eq_rhs = Vec(2);
    p.eq_rhs << 3.0, 4.0;
    p.eq_labels.resize(2);
    // s = h - Gx = (t, a, b) in SOC
    std::vector<Eigen::Triplet<double>> tg{{0, 0, -1.0}, {1, 1, -1.0}, {2, 2, -1.0}};
    p.cone.resize(3, 3);
    p.cone.setFromTriplets(tg.begin(), tg.end());
    p.cone_rhs = Vec::Zero(3);
    p.blocks.push_back({ConeKind::Soc, 0, 3});
    return p;
}

ConeProgram rsoc_min_sigma() {
    // min sigma  s.t.  ||u||^2 <= sigma * 1, u = (1.5, -0.5) fixed
    // vars: (sigma, u1, u2)
    ConeProgram p;
    p.num_vars = 3;
    p.c = Vec::Zero(3);
    p.c(0) = 1.0;
    std::vector<Eigen::Triplet<double>> te{{0, 1, 1.0}, {1, 2, 1.0}};
    p.eq.resize(2, 3);
    p.eq.setFromTriplets(te.begin(), te.end());
    p.eq_rhs = Vec(2);
    p.eq_rhs << 1.5, -0.5;
    // block (sigma, 1, u): rows s = h - Gx
    std::vector<Eigen::Triplet<double>> tg{{0, 0, -1.0}, {2, 1, -1.0}, {3, 2, -1.0}};
    p.cone.resize(4, 3);
    p.cone.setFromTriplets(tg.begin(), tg.end());
    p.cone_rhs = Vec::Zero(4);
    p.cone_rhs(1) = 1.0;
    p.blocks.push_back({ConeKind::Rsoc, 0, 4});
    return p;
}

ConeProgram infeasible_lp() {
    // x >= 1 and x <= 0
    ConeProgram p;
    p.num_vars = 1;
    p.c = Vec::Constant(1, 1.0);
    p.eq.resize(0, 1);
    p.eq_rhs = Vec::Zero(0);
    std::vector<Eigen::Triplet<double>> t{{0, 0, -1.0}, {1, 0, 1.0}};
    p.cone.resize(2, 1);
    p.cone.setFromTriplets(t.begin(), t.end());
    p.cone_rhs = Vec(2);
    p.cone_rhs << -1.0, 0.0;
    p.blocks.push_back({ConeKind::NonNeg, 0, 2});
    return p;
}

ConeProgram unbounded_lp() {
    // min x s.t. x <= 0
    ConeProgram p;
    p.num_vars = 1;
    p.c = Vec::Constant(1, 1.0);
    p.eq.resize(0, 1);
    p.eq_rhs = Vec::Zero(0);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}};
    p.cone.resize(1, 1);
    p.cone.setFromTriplets(t.begin(), t.end());
    p.cone_rhs = Vec::Zero(1);
    p.blocks.push_back({ConeKind::NonNeg, 0, 1});
    return p;
}

void report(const char* name, const ConeSolution& s) {
    std::printf("%-22s status=%-18s iters=%3d obj=%+.12e pres=%.2e dres=%.2e gap=%.2e\n", name,
                to_string(s.status), s.iterations, s.objective, s.primal_residual,
                s.dual_residual, s.gap);
}

}  // namespace

int main() {
    {
        auto s = solve_cone_program(lp_min_x_ge_1());
        report("lp x>=1", s);
        std::printf("   x = %.12f (expect 1), eqduals none, cone dual = %.6f (expect 1)\n",
                    s.z(0), s.cone_duals(0));
    }
    {
        auto s = solve_cone_program(soc_min_t_norm34());
        report("soc |(3,4)|<=t", s);
        std::printf("   t = %.12f (expect 5); eq duals = (%.6f, %.6f)\n", s.z(0),
                    s.equality_duals(0), s.equality_duals(1));
    }
    {
        auto s = solve_cone_program(rsoc_min_sigma());
        report("rsoc |u|^2<=sigma", s);
        std::printf("   sigma = %.12f (expect 2.5)\n", s.z(0));
    }
    {
        auto s = solve_cone_program(infeasible_lp());
        report("infeasible lp", s);
    }
    {
        auto s = solve_cone_program(unbounded_lp());
        report("unbounded lp", s);
    }
    {
        SolverSettings fo;
        fo.tol_p = fo.tol_d = fo.tol_g = 1e-8;
        fo.max_iter = 200000;
        auto s = solve_with_backend(soc_min_t_norm34(), "firstorder", fo);
        report("firstorder soc", s);
        std::printf("   t = %.10f\n", s.z(0));
        auto si = solve_with_backend(infeasible_lp(), "firstorder", fo);
        report("firstorder infeas", si);
        auto su = solve_with_backend(unbounded_lp(), "firstorder", fo);
        report("firstorder unbounded", su);
    }
    return 0;
}
