#pragma once

#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "wielab/cg.hpp"
#include "wielab/fields.hpp"
#include "wielab/stencil.hpp"

namespace wielab {

using SparseMat = Eigen::SparseMatrix<double>;

// Stencil widths. First derivatives: width 3 is the 2nd-order scheme used by
// the tensor calculus; width 5 the 4th-order scheme used for configuration
// differentials; width 7 serves as a higher-order oracle.
constexpr int kWidthOrder2 = 3;
constexpr int kWidthOrder4 = 5;
constexpr int kWidthOrder6 = 7;

// --- scalar-field derivatives ------------------------------------------------

// Second derivatives widen the shifted boundary windows by one point so the
// one-sided formulas stay second-order.
inline int stencil_width_at(int n, int i, int m, int width) {
    if (m < 2 || width != kWidthOrder2) return width;
    return (i == 0 || i == n - 1) ? width + 1 : width;
}

inline ScalarField d_u(const ScalarField& f, int m = 1, int width = kWidthOrder2) {
    ScalarField out = ScalarField::zeros(f.grid);
    for (int i = 0; i < f.grid.nu; ++i) {
        const auto st =
            deriv_stencil(f.grid.nu, i, f.grid.du(), m, stencil_width_at(f.grid.nu, i, m, width));
        for (int j = 0; j < f.grid.nv; ++j) {
            double acc = 0.0;
            for (const auto& e : st) acc += e.coeff * f.at(e.index, j);
            out.at(i, j) = acc;
        }
    }
    return out;
}

inline ScalarField d_v(const ScalarField& f, int m = 1, int width = kWidthOrder2) {
    ScalarField out = ScalarField::zeros(f.grid);
    for (int j = 0; j < f.grid.nv; ++j) {
        const auto st =
            deriv_stencil(f.grid.nv, j, f.grid.dv(), m, stencil_width_at(f.grid.nv, j, m, width));
        for (int i = 0; i < f.grid.nu; ++i) {
            double acc = 0.0;
            for (const auto& e : st) acc += e.coeff * f.at(i, e.index);
            out.at(i, j) = acc;
        }
    }
    return out;
}

// --- configuration differential ----------------------------------------------

// Raw finite-difference Jacobian of kappa o f at a node: the two ambient
// column vectors d(kappa o f)/du, d(kappa o f)/dv.
inline std::array<Vec3, 2> config_jacobian(const ConfigurationField& f, int i, int j,
                                           int width = kWidthOrder4) {
    std::array<Vec3, 2> cols{Vec3::Zero(), Vec3::Zero()};
    const auto su = deriv_stencil(f.grid.nu, i, f.grid.du(), 1, width);
    for (const auto& e : su) cols[0] += e.coeff * f.at(e.index, j);
    const auto sv = deriv_stencil(f.grid.nv, j, f.grid.dv(), 1, width);
    for (const auto& e : sv) cols[1] += e.coeff * f.at(i, e.index);
    return cols;
}

// F_{ij} = <d_j(kappa o f), e_i(f(node))>: the differential in the chart basis
// of the domain and an orthonormal frame at the image point.
inline Mat2 configuration_differential(const ConfigurationField& f, int i, int j,
                                       const Frame& frame, int width = kWidthOrder4) {
    const auto cols = config_jacobian(f, i, j, width);
    Mat2 out;
    out << frame.e1.dot(cols[0]), frame.e1.dot(cols[1]), frame.e2.dot(cols[0]), frame.e2.dot(cols[1]);
    return out;
}

inline Mat2 configuration_differential(const ConfigurationField& f, int i, int j,
                                       int width = kWidthOrder4) {
    return configuration_differential(f, i, j, orthonormal_frame(f.point(i, j)), width);
}

// --- Christoffel symbols and covariant derivative -----------------------------

// Christoffel symbols of the sampled metric, Gamma[i](j,k), from 2nd-order
// central differences of the metric entries (one-sided at the boundary).
struct ChristoffelField {
    ChartGrid grid;
    std::vector<std::array<Mat2, 2>> values;  // values[node][i](j,k) = Gamma^i_{jk}

    const std::array<Mat2, 2>& at(int i, int j) const { return values[grid.index(i, j)]; }
};

inline ChristoffelField christoffel_symbols(const MetricField& s) {
    ScalarField entry[2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            entry[a][b] = ScalarField::zeros(s.grid);
            for (int n = 0; n < s.grid.num_nodes(); ++n) entry[a][b].values[n] = s.values[n](a, b);
        }
    ScalarField ds[2][2][2];  // ds[c][a][b] = d_c s_{ab}
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            ds[0][a][b] = d_u(entry[a][b]);
            ds[1][a][b] = d_v(entry[a][b]);
        }
    ChristoffelField out;
    out.grid = s.grid;
    out.values.resize(s.grid.num_nodes());
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        const Mat2& sm = s.values[n];
        if (!(sm.determinant() > 0.0))
            throw std::domain_error("christoffel_symbols: singular metric at node " + std::to_string(n));
        const Mat2 inv = sm.inverse();
        for (int i = 0; i < 2; ++i)
            for (int jj = 0; jj < 2; ++jj)
                for (int k = 0; k < 2; ++k) {
                    double g = 0.0;
                    for (int l = 0; l < 2; ++l)
                        g += 0.5 * inv(i, l) *
                             (ds[jj][l][k].values[n] + ds[k][l][jj].values[n] - ds[l][jj][k].values[n]);
                    out.values[n][i](jj, k) = g;
                }
    }
    return out;
}

// Chart components of a tangent field, as two scalar fields.
inline std::array<ScalarField, 2> vector_chart_components(const VectorField& u) {
    std::array<ScalarField, 2> c{ScalarField::zeros(u.grid), ScalarField::zeros(u.grid)};
    for (int i = 0; i < u.grid.nu; ++i)
        for (int j = 0; j < u.grid.nv; ++j) {
            const Vec2 comp = chart_components(u.grid, i, j, u.at(i, j));
            c[0].at(i, j) = comp(0);
            c[1].at(i, j) = comp(1);
        }
    return c;
}

// (nabla u)^i_j = d_j u^i + Gamma^i_{jk} u^k in the chart basis.
inline MatrixField covariant_derivative(const VectorField& u, const MetricField& s) {
    require_matching_grid(u.grid, s.grid, "covariant_derivative");
    const auto comp = vector_chart_components(u);
    const ChristoffelField gamma = christoffel_symbols(s);
    const ScalarField dcomp[2][2] = {{d_u(comp[0]), d_v(comp[0])}, {d_u(comp[1]), d_v(comp[1])}};
    MatrixField out = MatrixField::zeros(u.grid);
    for (int n = 0; n < u.grid.num_nodes(); ++n) {
        Mat2 m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double val = dcomp[i][j].values[n];
                for (int k = 0; k < 2; ++k) val += gamma.values[n][i](j, k) * comp[k].values[n];
                m(i, j) = val;
            }
        out.values[n] = m;
    }
    return out;
}

// Deformation (Killing) operator: L_u s = s (nabla u) + (s (nabla u))^T.
inline TwoTensorField deformation_operator(const VectorField& u, const MetricField& s) {
    const MatrixField grad = covariant_derivative(u, s);
    TwoTensorField out = TwoTensorField::zeros(u.grid);
    for (int n = 0; n < u.grid.num_nodes(); ++n) {
        const Mat2 flat = s.values[n] * grad.values[n];
        out.values[n] = flat + flat.transpose();
    }
    return out;
}

// Sparse matrix of the deformation operator acting on stacked chart
// components (u^1, u^2 per node) and producing stacked tensor entries
// (L11, L12, L21, L22 per node). Same stencils as covariant_derivative.
inline SparseMat deformation_matrix(const MetricField& s) {
    const ChartGrid& g = s.grid;
    const int n_nodes = g.num_nodes();
    const ChristoffelField gamma = christoffel_symbols(s);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n_nodes) * 40);
    for (int i = 0; i < g.nu; ++i) {
        const auto stu = deriv_stencil(g.nu, i, g.du(), 1, kWidthOrder2);
        for (int j = 0; j < g.nv; ++j) {
            const auto stv = deriv_stencil(g.nv, j, g.dv(), 1, kWidthOrder2);
            const int node = g.index(i, j);
            const Mat2& sm = s.values[node];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const int row = 4 * node + 2 * a + b;
                    // s_{ak} d_b u^k  (derivative along chart direction b)
                    for (int k = 0; k < 2; ++k) {
                        if (b == 0)
                            for (const auto& e : stu)
                                trip.emplace_back(row, 2 * g.index(e.index, j) + k, sm(a, k) * e.coeff);
                        else
                            for (const auto& e : stv)
                                trip.emplace_back(row, 2 * g.index(i, e.index) + k, sm(a, k) * e.coeff);
                        // transpose part: s_{bk} d_a u^k
                        if (a == 0)
                            for (const auto& e : stu)
                                trip.emplace_back(row, 2 * g.index(e.index, j) + k, sm(b, k) * e.coeff);
                        else
                            for (const auto& e : stv)
                                trip.emplace_back(row, 2 * g.index(i, e.index) + k, sm(b, k) * e.coeff);
                    }
                    // Christoffel terms, diagonal in the node
                    for (int m = 0; m < 2; ++m) {
                        double c = 0.0;
                        for (int k = 0; k < 2; ++k)
                            c += sm(a, k) * gamma.values[node][k](b, m) + sm(b, k) * gamma.values[node][k](a, m);
                        trip.emplace_back(row, 2 * node + m, c);
                    }
                }
        }
    }
    SparseMat mat(4 * n_nodes, 2 * n_nodes);
    mat.setFromTriplets(trip.begin(), trip.end());
    mat.makeCompressed();
    return mat;
}

// --- Gaussian curvature (Brioschi formula) ------------------------------------

// Curvature of the sampled chart metric; 2nd-order accurate in the interior,
// 1st-order at the boundary (shifted 3-point second-derivative stencils).
inline ScalarField gauss_curvature(const MetricField& s) {
    ScalarField E = ScalarField::zeros(s.grid), F = E, G = E;
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        E.values[n] = s.values[n](0, 0);
        F.values[n] = s.values[n](0, 1);
        G.values[n] = s.values[n](1, 1);
    }
    const ScalarField Eu = d_u(E), Ev = d_v(E), Evv = d_v(E, 2);
    const ScalarField Fu = d_u(F), Fv = d_v(F), Fuv = d_v(d_u(F));
    const ScalarField Gu = d_u(G), Gv = d_v(G), Guu = d_u(G, 2);

    ScalarField out = ScalarField::zeros(s.grid);
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        const double e = E.values[n], f = F.values[n], g = G.values[n];
        const double det = e * g - f * f;
        if (!(det > 0.0))
            throw std::domain_error("gauss_curvature: singular metric at node " + std::to_string(n));
        Eigen::Matrix3d m1, m2;
        m1 << -0.5 * Evv.values[n] + Fuv.values[n] - 0.5 * Guu.values[n], 0.5 * Eu.values[n],
            Fu.values[n] - 0.5 * Ev.values[n],
            Fv.values[n] - 0.5 * Gu.values[n], e, f,
            0.5 * Gv.values[n], f, g;
        m2 << 0.0, 0.5 * Ev.values[n], 0.5 * Gu.values[n],
            0.5 * Ev.values[n], e, f,
            0.5 * Gu.values[n], f, g;
        out.values[n] = (m1.determinant() - m2.determinant()) / (det * det);
    }
    return out;
}

inline double sup_norm(const std::vector<Mat2>& values) {
    double m = 0.0;
    for (const Mat2& v : values) m = std::max(m, v.norm());
    return m;
}

// Gateaux derivative of the Gaussian curvature in the metric, by central
// differencing gauss_curvature(s + t sigma) with step t = 1e-4 |s| / |sigma|.
inline ScalarField curvature_variation(const TwoTensorField& sigma, const MetricField& s) {
    require_matching_grid(sigma.grid, s.grid, "curvature_variation");
    const double ns = sup_norm(s.values);
    const double nsig = sup_norm(sigma.values);
    if (nsig == 0.0) return ScalarField::zeros(s.grid);
    const double t = 1e-4 * ns / nsig;
    MetricField plus = s, minus = s;
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        plus.values[n] += t * sigma.values[n];
        minus.values[n] -= t * sigma.values[n];
    }
    const ScalarField kp = gauss_curvature(plus), km = gauss_curvature(minus);
    ScalarField out = ScalarField::zeros(s.grid);
    for (int n = 0; n < s.grid.num_nodes(); ++n) out.values[n] = (kp.values[n] - km.values[n]) / (2.0 * t);
    return out;
}

// --- discrete W^{-2,2} surrogate ----------------------------------------------

// Sparse partial-derivative matrices on scalar dof vectors.
inline SparseMat gradient_matrix_u(const ChartGrid& g) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < g.nu; ++i) {
        const auto st = deriv_stencil(g.nu, i, g.du(), 1, kWidthOrder2);
        for (int j = 0; j < g.nv; ++j)
            for (const auto& e : st) trip.emplace_back(g.index(i, j), g.index(e.index, j), e.coeff);
    }
    SparseMat m(g.num_nodes(), g.num_nodes());
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

inline SparseMat gradient_matrix_v(const ChartGrid& g) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < g.nv; ++j) {
        const auto st = deriv_stencil(g.nv, j, g.dv(), 1, kWidthOrder2);
        for (int i = 0; i < g.nu; ++i)
            for (const auto& e : st) trip.emplace_back(g.index(i, j), g.index(i, e.index), e.coeff);
    }
    SparseMat m(g.num_nodes(), g.num_nodes());
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

// Discrete norm ||(Id + Laplace_s)^{-1} v||_{L2}, realized variationally:
// solve (M + A) x = M v with M the trapezoid mass matrix and A = D^T W D the
// metric stiffness form (natural boundary treatment), then return sqrt(x'Mx).
inline double neg2_sobolev_norm(const ScalarField& v, const MetricField& s) {
    require_matching_grid(v.grid, s.grid, "neg2_sobolev_norm");
    const ChartGrid& g = v.grid;
    const int n = g.num_nodes();
    const SparseMat du = gradient_matrix_u(g);
    const SparseMat dv = gradient_matrix_v(g);
    DynVec mass(n);
    std::vector<Mat2> coef(n);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int node = g.index(i, j);
            const double mu = node_measure(s, i, j);
            mass(node) = mu;
            coef[node] = mu * s.at(i, j).inverse();
        }
    const auto apply = [&](const DynVec& x) {
        const DynVec gu = du * x;
        const DynVec gv = dv * x;
        DynVec au(n), av(n);
        for (int k = 0; k < n; ++k) {
            au(k) = coef[k](0, 0) * gu(k) + coef[k](0, 1) * gv(k);
            av(k) = coef[k](1, 0) * gu(k) + coef[k](1, 1) * gv(k);
        }
        DynVec y = du.transpose() * au + dv.transpose() * av;
        for (int k = 0; k < n; ++k) y(k) += mass(k) * x(k);
        return y;
    };
    DynVec rhs(n);
    for (int k = 0; k < n; ++k) rhs(k) = mass(k) * v.values[k];
    const CgResult sol = cg_solve(apply, rhs, 1e-10, 10 * n);
    double q = 0.0;
    for (int k = 0; k < n; ++k) q += mass(k) * sol.x(k) * sol.x(k);
    return std::sqrt(std::max(0.0, q));
}

}  // namespace wielab
