#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "lcvx/analysis.hpp"
#include "lcvx/model.hpp"

namespace lcvx {

enum class PerturbationMode { Eigen, UserStructure };

struct PerturbationSpec {
    double epsilon = 1e-7;  // cube half-width for the eigenvalue shifts
    std::uint64_t seed = 0;
    PerturbationMode mode = PerturbationMode::Eigen;
};

// Explicit A = Q J Q^{-1} factorization supplied by the caller for defective
// matrices, where the numerical eigendecomposition refuses to act.
struct JordanStructure {
    Mat q;
    Mat j;
};

struct PerturbedDynamics {
    Mat a_tilde;
    Vec q;  // one entry per distinct eigenvalue group
    std::vector<std::complex<double>> distinct_eigenvalues;
    double max_imag_leak = 0.0;  // largest imaginary part discarded on re-realization
};

// Number of distinct eigenvalue groups of A (conjugate pairs count once),
// which is the length of the shift vector q.
Eigen::Index distinct_eigenvalue_count(const Mat& a, double tol = 1e-8);
Eigen::Index distinct_eigenvalue_count(const JordanStructure& structure, double tol = 1e-8);

// Shifts each distinct eigenvalue of A by the matching entry of q while
// preserving the eigenvector (or user Jordan) structure. Conjugate pairs
// share one real shift so the result stays real.
PerturbedDynamics perturb_dynamics(const Mat& a, const Vec& q,
                                   const std::optional<JordanStructure>& structure = {});

// Deterministic i.i.d. uniform samples on [-epsilon, epsilon].
Vec sample_q(const PerturbationSpec& spec, Eigen::Index d);

// Fixed-split derivation of per-trial seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial);

struct PerturbationImpact {
    Vec q;
    double boundary_residual = 0.0;   // ||G x~ - g|| after true-dynamics propagation
    double objective_unperturbed = 0.0;
    double objective_perturbed = 0.0;
    double cost_delta = 0.0;
    double nonconvex_cost = 0.0;      // m(x~) + sum l(g(u_i(q)))
    Eigen::Index violations_before = 0;
    Eigen::Index violations_after = 0;
};

// Propagates the perturbed controls through the true dynamics and summarizes
// boundary drift, cost drift, and the violation counts on both sides.
PerturbationImpact perturbation_report(const DiscreteProblem& problem,
                                       const LcvxSolution& unperturbed,
                                       const LcvxSolution& perturbed, const Vec& q,
                                       double tol_v = 1e-6);

}  // namespace lcvx
