#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "wielab/common.hpp"

namespace wielab {

using DynVec = Eigen::VectorXd;

struct CgResult {
    DynVec x;
    int iterations = 0;
    double rel_residual = 0.0;
    std::vector<double> residual_history;
};

// Plain conjugate gradient on a symmetric positive-(semi)definite operator,
// with optional deflation: seed, right-hand side and every operator output are
// projected onto the orthogonal complement of the given orthonormal basis.
// Deterministic: sequential loops, no reordering.
inline CgResult cg_solve(const std::function<DynVec(const DynVec&)>& apply_a, const DynVec& b,
                         double rel_tol, int max_iter,
                         const std::vector<DynVec>& deflation_basis = {}) {
    const auto project = [&](DynVec v) {
        for (const DynVec& k : deflation_basis) v -= k.dot(v) * k;
        return v;
    };

    CgResult out;
    const DynVec pb = project(b);
    const double bnorm = pb.norm();
    out.x = DynVec::Zero(b.size());
    if (bnorm == 0.0) return out;

    DynVec r = pb;
    DynVec p = r;
    double rs = r.squaredNorm();
    out.residual_history.push_back(std::sqrt(rs) / bnorm);
    for (int it = 0; it < max_iter; ++it) {
        const DynVec ap = project(apply_a(p));
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            if (std::sqrt(rs) / bnorm <= rel_tol) break;
            throw NumericalError("cg_solve: operator lost positive-definiteness (p'Ap = " +
                                     std::to_string(pap) + ")",
                                 out.residual_history);
        }
        const double alpha = rs / pap;
        out.x += alpha * p;
        r -= alpha * ap;
        const double rs_new = r.squaredNorm();
        ++out.iterations;
        out.rel_residual = std::sqrt(rs_new) / bnorm;
        out.residual_history.push_back(out.rel_residual);
        if (out.rel_residual <= rel_tol) return out;
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    out.rel_residual = std::sqrt(rs) / bnorm;
    if (out.rel_residual > rel_tol)
        throw NumericalError("cg_solve: no convergence in " + std::to_string(max_iter) +
                                 " iterations (relative residual " + std::to_string(out.rel_residual) + ")",
                             out.residual_history);
    return out;
}

}  // namespace wielab
