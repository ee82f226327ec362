#include <cstdio>
#include "lcvx/model.hpp"
#include "lcvx/transcribe.hpp"
using namespace lcvx;
int main() {
    DiscreteProblem p;
    p.a = Mat::Zero(3, 3);
    p.a.diagonal() << 1.2, -2.2, 1.0;
    p.a(0,0) += 1e-7;
    p.b = Mat(3, 1); p.b << 0.4, 0.3, 0.2;
    p.num_steps = 10;
    p.x_init = Vec::Zero(3);
    p.rho_min = 1.0; p.rho_max = 2.0;
    p.g_kind = MagnitudeKind::Norm2Squared;
    p.cost.running = 1.0;
    p.cost.terminal_linear = Vec::Zero(3); p.cost.terminal_linear(2) = 1.0;
    p.boundary.g_matrix = Mat::Zero(2, 3);
    p.boundary.g_matrix(0,0) = 1.0; p.boundary.g_matrix(1,1) = 1.0;
    p.boundary.g_vector = Vec(2); p.boundary.g_vector << 0.5, 1.0;
    p = make_problem(std::move(p));
    Transcription t = transcribe_relaxed(p);
    SolverSettings st;
    st.tol_p = st.tol_d = st.tol_g = 1e-13;
    st.max_iter = 60;
    st.verbose = true;
    st.verbose_probe = [&](const Vec& z) {
        VariableLayout lay = t.layout;
        int nv = 0; double third = 1e9;
        for (Eigen::Index i = 1; i <= p.num_steps; ++i) {
            Vec u = z.segment(lay.u_index(i,0), 1);
            double g = u(0)*u(0);
            if (g < p.rho_min - 1e-6) ++nv;
        }
        std::printf("  cur-viol=%d g={", nv);
        for (int i : {1,3,4}) std::printf("%.8f ", std::pow(z(lay.u_index(i,0)),2));
        std::printf("}");
    };
    ConeSolution sol = solve_cone_program(t.program, st);
    std::printf("final: %s obj=%.15e\n", to_string(sol.status), sol.objective);
    LcvxSolution s = extract_solution(t, sol);
    for (Eigen::Index i = 0; i < p.num_steps; ++i) {
        const double g = magnitude(p.g_kind, s.inputs[i]);
        std::printf("  node %2d: g=%.14f gate=%.3e%s\n", (int)(i+1), g,
                    (p.b.transpose() * s.costates[i]).norm(),
                    g < p.rho_min - 1e-6 ? " VIOLATING" : "");
    }
    return 0;
}
