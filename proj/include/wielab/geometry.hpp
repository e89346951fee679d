#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "wielab/common.hpp"
#include "wielab/matrix2.hpp"

namespace wielab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Ambient { UnitSphere, EuclideanPlane };

constexpr double kAntipodalCutoff = M_PI - 1e-6;

// A point of the ambient space: unit 3-vector on the sphere, 2-vector on the
// plane. Stored as a 3-vector; plane points use z = 0.
struct AmbientPoint {
    Ambient ambient;
    Vec3 coords;

    static AmbientPoint sphere(const Vec3& p) {
        AmbientPoint out{Ambient::UnitSphere, p};
        if (std::abs(p.norm() - 1.0) > 1e-12)
            throw std::domain_error("AmbientPoint: sphere point has |p| = " + std::to_string(p.norm()));
        return out;
    }
    static AmbientPoint plane(double x, double y) {
        return AmbientPoint{Ambient::EuclideanPlane, Vec3(x, y, 0.0)};
    }
};

// Tangent vector at a base point; on the sphere the ambient vector is
// orthogonal to the base.
struct TangentVec {
    AmbientPoint base;
    Vec3 vec;

    static TangentVec at(const AmbientPoint& p, const Vec3& v, double tol = 1e-10) {
        if (p.ambient == Ambient::UnitSphere && std::abs(p.coords.dot(v)) > tol * std::max(1.0, v.norm()))
            throw std::domain_error("TangentVec: vector is not tangent (<v,p> = " +
                                    std::to_string(p.coords.dot(v)) + ")");
        return TangentVec{p, v};
    }
};

inline Vec3 project_tangent(const AmbientPoint& p, const Vec3& v) {
    if (p.ambient == Ambient::UnitSphere) return v - p.coords.dot(v) * p.coords;
    return Vec3(v.x(), v.y(), 0.0);
}

// Deterministic orthonormal tangent frame: Gram-Schmidt of a reference axis
// against the point, reference e_z with fallback e_x when |<p,e_z>| > 0.9.
// Oriented so that e1 x e2 = p on the sphere.
struct Frame {
    Vec3 e1, e2;
};

inline Frame orthonormal_frame(const AmbientPoint& p) {
    if (p.ambient == Ambient::EuclideanPlane) return Frame{Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const Vec3 axis = (std::abs(p.coords.z()) > 0.9) ? Vec3(1, 0, 0) : Vec3(0, 0, 1);
    Vec3 e1 = axis - axis.dot(p.coords) * p.coords;
    e1.normalize();
    return Frame{e1, p.coords.cross(e1)};
}

inline AmbientPoint sphere_exp(const AmbientPoint& p, const Vec3& v) {
    if (p.ambient == Ambient::EuclideanPlane)
        return AmbientPoint{Ambient::EuclideanPlane, p.coords + v};
    const double n = v.norm();
    if (n >= M_PI) throw std::domain_error("sphere_exp: |v| = " + std::to_string(n) + " >= pi");
    if (n == 0.0) return p;
    Vec3 q = std::cos(n) * p.coords + std::sin(n) * (v / n);
    q.normalize();  // guards accumulated rounding
    return AmbientPoint{Ambient::UnitSphere, q};
}

inline AmbientPoint sphere_exp(const TangentVec& v) { return sphere_exp(v.base, v.vec); }

inline double sphere_angle(const AmbientPoint& p, const AmbientPoint& q) {
    const double c = p.coords.dot(q.coords);
    const double s = p.coords.cross(q.coords).norm();
    return std::atan2(s, c);
}

inline TangentVec sphere_log(const AmbientPoint& p, const AmbientPoint& q) {
    if (p.ambient == Ambient::EuclideanPlane)
        return TangentVec{p, q.coords - p.coords};
    const double angle = sphere_angle(p, q);
    if (angle >= kAntipodalCutoff)
        throw std::domain_error("sphere_log: points are nearly antipodal (angle " + std::to_string(angle) + ")");
    if (angle == 0.0) return TangentVec{p, Vec3::Zero()};
    Vec3 dir = q.coords - q.coords.dot(p.coords) * p.coords;
    const double dn = dir.norm();
    if (dn == 0.0) return TangentVec{p, Vec3::Zero()};
    return TangentVec{p, (angle / dn) * dir};
}

// Levi-Civita transport along the minimal geodesic from p to q: the rotation
// in span{p,q} fixing its orthogonal complement,
//   v  |->  v - <v,q>/(1+<p,q>) (p+q).
inline Vec3 parallel_transport(const AmbientPoint& p, const AmbientPoint& q, const Vec3& v) {
    if (p.ambient == Ambient::EuclideanPlane) return v;
    const double c = p.coords.dot(q.coords);
    if (sphere_angle(p, q) >= kAntipodalCutoff)
        throw std::domain_error("parallel_transport: points are nearly antipodal");
    return v - (v.dot(q.coords) / (1.0 + c)) * (p.coords + q.coords);
}

inline TangentVec parallel_transport(const AmbientPoint& p, const AmbientPoint& q, const TangentVec& v) {
    return TangentVec{q, parallel_transport(p, q, v.vec)};
}

struct Holonomy {
    Mat2 map;          // loop transport in the orthonormal frame at the base vertex
    double deviation;  // |map - Id|_F = 2 sqrt(2) |sin(angle/2)|
    double angle;      // rotation angle of the loop transport
};

// Composition of segment transports around a closed vertex loop, expressed in
// the deterministic frame at vertices[0]. The loop is closed implicitly when
// the last vertex differs from the first.
inline Holonomy loop_holonomy(const std::vector<AmbientPoint>& vertices) {
    if (vertices.size() < 2) throw std::domain_error("loop_holonomy: need at least two vertices");
    std::vector<AmbientPoint> loop = vertices;
    if ((loop.front().coords - loop.back().coords).norm() > 0.0) loop.push_back(loop.front());
    for (size_t i = 0; i + 1 < loop.size(); ++i)
        if ((loop[i].coords - loop[i + 1].coords).norm() == 0.0)
            throw std::domain_error("loop_holonomy: repeated consecutive vertex at index " + std::to_string(i));

    const Frame f0 = orthonormal_frame(loop.front());
    Vec3 a = f0.e1, b = f0.e2;
    for (size_t i = 0; i + 1 < loop.size(); ++i) {
        a = parallel_transport(loop[i], loop[i + 1], a);
        b = parallel_transport(loop[i], loop[i + 1], b);
    }
    Holonomy out;
    out.map << f0.e1.dot(a), f0.e1.dot(b), f0.e2.dot(a), f0.e2.dot(b);
    out.deviation = (out.map - Mat2::Identity()).norm();
    out.angle = std::atan2(out.map(1, 0), out.map(0, 0));
    return out;
}

}  // namespace wielab
