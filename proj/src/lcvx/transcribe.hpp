#pragma once

#include <vector>

#include "lcvx/cone_program.hpp"
#include "lcvx/conic.hpp"
#include "lcvx/model.hpp"

namespace lcvx {

// Variable order: all states x_1..x_{N+1}, then inputs u_1..u_N, then slacks.
struct VariableLayout {
    Eigen::Index state_dim = 0;
    Eigen::Index input_dim = 0;
    Eigen::Index num_steps = 0;

    Eigen::Index x_offset() const { return 0; }
    Eigen::Index u_offset() const { return (num_steps + 1) * state_dim; }
    Eigen::Index sigma_offset() const { return u_offset() + num_steps * input_dim; }
    Eigen::Index total() const { return sigma_offset() + num_steps; }

    // step is 1-based to match the discrete recursion indexing
    Eigen::Index x_index(Eigen::Index step, Eigen::Index comp) const {
        return (step - 1) * state_dim + comp;
    }
    Eigen::Index u_index(Eigen::Index step, Eigen::Index comp) const {
        return u_offset() + (step - 1) * input_dim + comp;
    }
    Eigen::Index sigma_index(Eigen::Index step) const { return sigma_offset() + (step - 1); }

    std::vector<Vec> states(const Vec& z) const;
    std::vector<Vec> inputs(const Vec& z) const;
    Vec slacks(const Vec& z) const;
};

struct Transcription {
    ConeProgram program;
    VariableLayout layout;
};

// Problem 4 as a standard-form cone program: dynamics/initial/boundary
// equalities, two bound rows and one magnitude block per node.
Transcription transcribe_relaxed(const DiscreteProblem& problem);

// Same program with the dynamics matrix replaced in the dynamics rows only.
Transcription transcribe_perturbed(const DiscreteProblem& problem, const Mat& a_tilde);

struct RecoveredDuals {
    std::vector<Vec> costates;  // one per dynamics step, sign such that costate_{i-1} = A' costate_i
    Vec initial_dual;
    Vec boundary_dual;
};

RecoveredDuals recover_duals(const ConeProgram& program, const Vec& equality_duals);

// Full solved-instance view used by the analysis layer.
struct LcvxSolution {
    std::vector<Vec> states;    // N+1
    std::vector<Vec> inputs;    // N
    Vec slacks;                 // N
    std::vector<Vec> costates;  // N
    Vec initial_dual;
    Vec boundary_dual;
    double objective = 0.0;
    ConeSolution stats;
};

LcvxSolution extract_solution(const Transcription& transcription, const ConeSolution& solution);

}  // namespace lcvx
