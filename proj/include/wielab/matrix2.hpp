#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <utility>

#include "wielab/common.hpp"

namespace wielab {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline bool is_symmetric(const Mat2& m, double tol = 1e-12) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return std::abs(m(0, 1) - m(1, 0)) <= tol * scale;
}

// Eigenvalues of a symmetric 2x2, ascending.
inline Vec2 sym_eigenvalues(const Mat2& m) {
    const double tr = m.trace();
    const double diff = m(0, 0) - m(1, 1);
    const double disc = std::sqrt(diff * diff + 4.0 * m(0, 1) * m(1, 0));
    return Vec2(0.5 * (tr - disc), 0.5 * (tr + disc));
}

// Symmetric positive-definite square root, closed form:
//   sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
inline Mat2 sqrt_spd(const Mat2& m) {
    if (!is_symmetric(m))
        throw std::domain_error("sqrt_spd: matrix is not symmetric (m01=" +
                                std::to_string(m(0, 1)) + ", m10=" + std::to_string(m(1, 0)) + ")");
    const Vec2 ev = sym_eigenvalues(m);
    if (!(ev(0) > 0.0))
        throw std::domain_error("sqrt_spd: matrix is not positive-definite (eigenvalue " +
                                std::to_string(ev(0)) + ")");
    const double s = std::sqrt(m.determinant());
    const double t = std::sqrt(m.trace() + 2.0 * s);
    return (m + s * Mat2::Identity()) / t;
}

struct SoProjection {
    double distance;  // Frobenius distance to SO(2)
    Mat2 nearest;     // attaining rotation, det = +1
};

// Frobenius distance of A to SO(2) and the nearest rotation, via SVD with the
// determinant correction. Degenerate A is handled; ties follow Eigen's
// JacobiSVD convention (largest singular value first, deterministic signs).
inline SoProjection dist_to_so(const Mat2& a) {
    Eigen::JacobiSVD<Mat2> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat2 u = svd.matrixU();
    const Mat2 v = svd.matrixV();
    const double sign = ((u * v.transpose()).determinant() < 0.0) ? -1.0 : 1.0;
    Mat2 c = Mat2::Identity();
    c(1, 1) = sign;
    SoProjection out;
    out.nearest = u * c * v.transpose();
    out.distance = (a - out.nearest).norm();
    return out;
}

inline bool is_special_orthogonal(const Mat2& q, double tol = 1e-10) {
    return (q.transpose() * q - Mat2::Identity()).norm() <= tol && q.determinant() > 0.0;
}

struct QuadraticModel {
    double w_exact;  // dist^2(Q + tB, SO(2))
    double w_model;  // t^2 |sym(B Q^T)|^2, the second-order model
};

// Second-order expansion of the squared distance around a rotation: the first
// variation vanishes and the exact value deviates from the model by O(t^3|B|^3).
inline QuadraticModel quadratic_model_check(const Mat2& q, const Mat2& b, double t) {
    if (!is_special_orthogonal(q))
        throw std::domain_error("quadratic_model_check: Q is not special orthogonal");
    QuadraticModel out;
    const double d = dist_to_so(q + t * b).distance;
    out.w_exact = d * d;
    const Mat2 sym_bqt = 0.5 * (b * q.transpose() + q * b.transpose());
    out.w_model = t * t * sym_bqt.squaredNorm();
    return out;
}

// Solves P X + X P = H for symmetric P > 0 and symmetric H (X symmetric).
inline Mat2 sylvester_sym(const Mat2& p, const Mat2& h) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(p);
    const Mat2 q = es.eigenvectors();
    const Vec2 lam = es.eigenvalues();
    const Mat2 hh = q.transpose() * h * q;
    Mat2 x;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) x(i, j) = hh(i, j) / (lam(i) + lam(j));
    return q * x * q.transpose();
}

// Leading-order term of (s^{-1/2} (s + eps h)^{1/2} - Id)/eps as eps -> 0:
// xi = s^{-1/2} X with sqrt(s) X + X sqrt(s) = h. Satisfies the isometry-bundle
// expansion identity h = s xi + (s xi)^T exactly.
inline Mat2 xi_limit(const Mat2& s, const Mat2& h) {
    const Mat2 p = sqrt_spd(s);
    const Mat2 x = sylvester_sym(p, h);
    return p.inverse() * x;
}

}  // namespace wielab
