#pragma once

#include <vector>

#include "lcvx/cone_program.hpp"

namespace lcvx::detail {

struct SolverBlock {
    bool lp = false;
    Eigen::Index offset = 0;
    Eigen::Index dim = 0;
};

// Cone data as seen by the solver cores: rotated blocks (a, b, w) with
// a*b >= ||w||^2 are rewritten as second-order rows (a+b, a-b, 2w).
struct SolverCone {
    SpMat g;
    Vec h;
    std::vector<SolverBlock> blocks;
    double degree = 0.0;  // barrier degree: one per LP row, one per SOC block
};

inline SolverCone transform_rotated(const ConeProgram& program) {
    SolverCone out;
    const Eigen::Index p = program.num_cone_rows();
    const Eigen::Index n = program.num_vars;

    enum class RowRole { Plain, RsocA, RsocB, RsocTail };
    std::vector<RowRole> roles(static_cast<std::size_t>(p), RowRole::Plain);
    for (const ConeBlock& b : program.blocks) {
        if (b.kind == ConeKind::NonNeg) {
            out.blocks.push_back({true, b.offset, b.dim});
            out.degree += static_cast<double>(b.dim);
        } else if (b.kind == ConeKind::Soc) {
            out.blocks.push_back({false, b.offset, b.dim});
            out.degree += 1.0;
        } else {
            roles[static_cast<std::size_t>(b.offset)] = RowRole::RsocA;
            roles[static_cast<std::size_t>(b.offset) + 1] = RowRole::RsocB;
            for (Eigen::Index i = 2; i < b.dim; ++i) {
                roles[static_cast<std::size_t>(b.offset + i)] = RowRole::RsocTail;
            }
            out.blocks.push_back({false, b.offset, b.dim});
            out.degree += 1.0;
        }
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(program.cone.nonZeros()) * 2);
    for (Eigen::Index col = 0; col < program.cone.outerSize(); ++col) {
        for (SpMat::InnerIterator it(program.cone, col); it; ++it) {
            const Eigen::Index r = it.row();
            switch (roles[static_cast<std::size_t>(r)]) {
                case RowRole::Plain:
                    trip.emplace_back(r, it.col(), it.value());
                    break;
                case RowRole::RsocA:
                    trip.emplace_back(r, it.col(), it.value());
                    trip.emplace_back(r + 1, it.col(), it.value());
                    break;
                case RowRole::RsocB:
                    trip.emplace_back(r - 1, it.col(), it.value());
                    trip.emplace_back(r, it.col(), -it.value());
                    break;
                case RowRole::RsocTail:
                    trip.emplace_back(r, it.col(), 2.0 * it.value());
                    break;
            }
        }
    }
    out.g.resize(p, n);
    out.g.setFromTriplets(trip.begin(), trip.end());
    out.g.makeCompressed();

    out.h = program.cone_rhs;
    for (const ConeBlock& b : program.blocks) {
        if (b.kind != ConeKind::Rsoc) continue;
        const double ha = out.h(b.offset), hb = out.h(b.offset + 1);
        out.h(b.offset) = ha + hb;
        out.h(b.offset + 1) = ha - hb;
        out.h.segment(b.offset + 2, b.dim - 2) *= 2.0;
    }
    return out;
}

// Pull solver-space cone duals back to the original rotated blocks (transpose
// of the forward map, so complementarity products are preserved).
inline void untransform_cone_duals(const ConeProgram& program, Vec& cone_duals) {
    for (const ConeBlock& b : program.blocks) {
        if (b.kind != ConeKind::Rsoc) continue;
        const auto o = b.offset;
        const double d0 = cone_duals(o), d1 = cone_duals(o + 1);
        cone_duals(o) = d0 + d1;
        cone_duals(o + 1) = d0 - d1;
        cone_duals.segment(o + 2, b.dim - 2) *= 2.0;
    }
}

// Euclidean projection of v onto the solver-space cone (LP rows + SOC blocks).
inline void project_onto_cone(const std::vector<SolverBlock>& blocks, Eigen::Ref<Vec> v) {
    for (const SolverBlock& b : blocks) {
        if (b.lp) {
            v.segment(b.offset, b.dim) = v.segment(b.offset, b.dim).cwiseMax(0.0);
        } else {
            const double t = v(b.offset);
            const double nw = v.segment(b.offset + 1, b.dim - 1).norm();
            if (nw <= t) continue;
            if (nw <= -t) {
                v.segment(b.offset, b.dim).setZero();
            } else {
                const double scale = (t + nw) / (2.0 * nw);
                v(b.offset) = (t + nw) / 2.0;
                v.segment(b.offset + 1, b.dim - 1) *= scale;
            }
        }
    }
}

}  // namespace lcvx::detail
