#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wielab/grid.hpp"

namespace wielab {

struct ScalarField {
    ChartGrid grid;
    std::vector<double> values;

    static ScalarField zeros(const ChartGrid& g) { return ScalarField{g, std::vector<double>(g.num_nodes(), 0.0)}; }
    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

// Per-node 2x2 matrix in chart coordinates, no symmetry constraint (covariant
// derivatives, Q_eps sections, transported gradients).
struct MatrixField {
    ChartGrid grid;
    std::vector<Mat2> values;

    static MatrixField zeros(const ChartGrid& g) { return MatrixField{g, std::vector<Mat2>(g.num_nodes(), Mat2::Zero())}; }
    Mat2& at(int i, int j) { return values[grid.index(i, j)]; }
    const Mat2& at(int i, int j) const { return values[grid.index(i, j)]; }
};

// Symmetric (2,0)-tensor field in chart coordinates.
struct TwoTensorField {
    ChartGrid grid;
    std::vector<Mat2> values;

    static TwoTensorField zeros(const ChartGrid& g) { return TwoTensorField{g, std::vector<Mat2>(g.num_nodes(), Mat2::Zero())}; }
    Mat2& at(int i, int j) { return values[grid.index(i, j)]; }
    const Mat2& at(int i, int j) const { return values[grid.index(i, j)]; }

    void validate() const {
        for (const Mat2& m : values) {
            const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * scale)
                throw std::domain_error("TwoTensorField: node value is not symmetric");
        }
    }
};

// Symmetric positive-definite tensor field (a metric).
struct MetricField {
    ChartGrid grid;
    std::vector<Mat2> values;

    Mat2& at(int i, int j) { return values[grid.index(i, j)]; }
    const Mat2& at(int i, int j) const { return values[grid.index(i, j)]; }

    void validate() const {
        for (const Mat2& m : values) {
            const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * scale)
                throw std::domain_error("MetricField: node value is not symmetric");
            if (!(sym_eigenvalues(m)(0) > 0.0))
                throw std::domain_error("MetricField: node value is not positive-definite");
        }
    }
};

// Grid-sampled configuration f: M -> S, one ambient point per node.
struct ConfigurationField {
    ChartGrid grid;
    std::vector<Vec3> values;

    Vec3& at(int i, int j) { return values[grid.index(i, j)]; }
    const Vec3& at(int i, int j) const { return values[grid.index(i, j)]; }
    AmbientPoint point(int i, int j) const { return AmbientPoint{grid.ambient(), at(i, j)}; }

    void validate() const {
        if (grid.ambient() != Ambient::UnitSphere) return;
        for (const Vec3& p : values)
            if (std::abs(p.norm() - 1.0) > 1e-12)
                throw std::domain_error("ConfigurationField: sphere value is not unit norm");
    }
};

// Tangent vector field along the chart inclusion, in ambient coordinates.
struct VectorField {
    ChartGrid grid;
    std::vector<Vec3> values;

    static VectorField zeros(const ChartGrid& g) { return VectorField{g, std::vector<Vec3>(g.num_nodes(), Vec3::Zero())}; }
    Vec3& at(int i, int j) { return values[grid.index(i, j)]; }
    const Vec3& at(int i, int j) const { return values[grid.index(i, j)]; }

    void validate() const {
        if (grid.ambient() != Ambient::UnitSphere) return;
        for (int i = 0; i < grid.nu; ++i)
            for (int j = 0; j < grid.nv; ++j) {
                const Vec3 p = grid.point(i, j).coords;
                const Vec3& w = at(i, j);
                if (std::abs(p.dot(w)) > 1e-10 * std::max(1.0, w.norm()))
                    throw std::domain_error("VectorField: value is not tangent at node " +
                                            std::to_string(grid.index(i, j)));
            }
    }
};

inline MetricField chart_metric_field(const ChartGrid& g) {
    MetricField s;
    s.grid = g;
    s.values.resize(g.num_nodes());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) s.at(i, j) = g.metric(i, j);
    return s;
}

inline ConfigurationField inclusion_field(const ChartGrid& g) {
    ConfigurationField f;
    f.grid = g;
    f.values.resize(g.num_nodes());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) f.at(i, j) = g.point(i, j).coords;
    return f;
}

inline void require_matching_grid(const ChartGrid& a, const ChartGrid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grids do not match");
}

// --- Quadrature ------------------------------------------------------------
// All reductions run row-major with compensated summation; results are
// independent of any evaluation-order concerns by construction.

template <typename NodeFn>
double quad_sum(const ChartGrid& g, NodeFn&& fn) {
    KahanSum acc;
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) acc.add(fn(i, j));
    return acc.value();
}

inline double node_measure(const MetricField& s, int i, int j) {
    return s.grid.cell_weight(i, j) * std::sqrt(s.at(i, j).determinant());
}

inline double volume(const MetricField& s) {
    return quad_sum(s.grid, [&](int i, int j) { return node_measure(s, i, j); });
}

// L2 pairing of (2,0)-tensor fields with both indices raised by s:
//   sum_x w mu s^{ik} s^{jl} a_{ij} b_{kl}.
inline double l2_inner(const TwoTensorField& a, const TwoTensorField& b, const MetricField& s) {
    require_matching_grid(a.grid, b.grid, "l2_inner");
    require_matching_grid(a.grid, s.grid, "l2_inner");
    return quad_sum(s.grid, [&](int i, int j) {
        const Mat2 inv = s.at(i, j).inverse();
        return node_measure(s, i, j) * (inv * a.at(i, j) * inv * b.at(i, j)).trace();
    });
}

inline double l2_norm(const TwoTensorField& a, const MetricField& s) {
    return std::sqrt(std::max(0.0, l2_inner(a, a, s)));
}

inline double l2_inner(const ScalarField& a, const ScalarField& b, const MetricField& s) {
    require_matching_grid(a.grid, b.grid, "l2_inner");
    return quad_sum(s.grid, [&](int i, int j) {
        return node_measure(s, i, j) * a.at(i, j) * b.at(i, j);
    });
}

inline double l2_norm(const ScalarField& a, const MetricField& s) {
    return std::sqrt(std::max(0.0, l2_inner(a, a, s)));
}

// Tangent fields are paired through the ambient inner product; the embedding
// is isometric so this is the s-pairing of the chart components.
inline double l2_inner(const VectorField& a, const VectorField& b, const MetricField& s) {
    require_matching_grid(a.grid, b.grid, "l2_inner");
    return quad_sum(s.grid, [&](int i, int j) {
        return node_measure(s, i, j) * a.at(i, j).dot(b.at(i, j));
    });
}

inline double l2_norm(const VectorField& a, const MetricField& s) {
    return std::sqrt(std::max(0.0, l2_inner(a, a, s)));
}

// Mixed (1,1)-tensor fields (chart matrices M^i_j): |M|^2 = s_{ik} M^i_j M^k_l s^{jl}.
inline double l2_norm(const MatrixField& a, const MetricField& s) {
    require_matching_grid(a.grid, s.grid, "l2_norm");
    const double q = quad_sum(s.grid, [&](int i, int j) {
        const Mat2& m = a.at(i, j);
        const Mat2& sm = s.at(i, j);
        return node_measure(s, i, j) * (m.transpose() * sm * m * sm.inverse()).trace();
    });
    return std::sqrt(std::max(0.0, q));
}

// --- Serialization ----------------------------------------------------------
// Column-oriented text format: one header comment naming the columns, then one
// row per node (row-major), UTF-8, LF newlines, 17-significant-digit floats.

namespace detail {
inline void write_field_header(std::ostream& os, const ChartGrid& g, const char* kind, const char* cols) {
    os << "# wielab field v1 kind=" << kind
       << " chart=" << (g.chart == Chart::Spherical ? "spherical" : "cartesian") << " nu=" << g.nu
       << " nv=" << g.nv << " u_range=[" << fmt17(g.u0) << "," << fmt17(g.u1) << "]"
       << " v_range=[" << fmt17(g.v0) << "," << fmt17(g.v1) << "]\n";
    os << "# columns: node_index u v " << cols << "\n";
}
inline void write_row_prefix(std::ostream& os, const ChartGrid& g, int i, int j) {
    os << g.index(i, j) << " " << fmt17(g.u(i)) << " " << fmt17(g.v(j));
}
}  // namespace detail

inline void write_field(std::ostream& os, const ScalarField& f) {
    detail::write_field_header(os, f.grid, "scalar", "value");
    for (int i = 0; i < f.grid.nu; ++i)
        for (int j = 0; j < f.grid.nv; ++j) {
            detail::write_row_prefix(os, f.grid, i, j);
            os << " " << fmt17(f.at(i, j)) << "\n";
        }
}

inline void write_field(std::ostream& os, const VectorField& f) {
    detail::write_field_header(os, f.grid, "vector", "wx wy wz");
    for (int i = 0; i < f.grid.nu; ++i)
        for (int j = 0; j < f.grid.nv; ++j) {
            detail::write_row_prefix(os, f.grid, i, j);
            const Vec3& w = f.at(i, j);
            os << " " << fmt17(w.x()) << " " << fmt17(w.y()) << " " << fmt17(w.z()) << "\n";
        }
}

inline void write_field(std::ostream& os, const ConfigurationField& f) {
    detail::write_field_header(os, f.grid, "configuration", "px py pz");
    for (int i = 0; i < f.grid.nu; ++i)
        for (int j = 0; j < f.grid.nv; ++j) {
            detail::write_row_prefix(os, f.grid, i, j);
            const Vec3& p = f.at(i, j);
            os << " " << fmt17(p.x()) << " " << fmt17(p.y()) << " " << fmt17(p.z()) << "\n";
        }
}

template <typename TensorLike>
inline void write_tensor_field(std::ostream& os, const TensorLike& f, const char* kind) {
    detail::write_field_header(os, f.grid, kind, "a11 a12 a21 a22");
    for (int i = 0; i < f.grid.nu; ++i)
        for (int j = 0; j < f.grid.nv; ++j) {
            detail::write_row_prefix(os, f.grid, i, j);
            const Mat2& m = f.at(i, j);
            os << " " << fmt17(m(0, 0)) << " " << fmt17(m(0, 1)) << " " << fmt17(m(1, 0)) << " "
               << fmt17(m(1, 1)) << "\n";
        }
}

inline void write_field(std::ostream& os, const TwoTensorField& f) { write_tensor_field(os, f, "tensor2"); }
inline void write_field(std::ostream& os, const MetricField& f) { write_tensor_field(os, f, "metric"); }
inline void write_field(std::ostream& os, const MatrixField& f) { write_tensor_field(os, f, "matrix"); }

}  // namespace wielab
