// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_GEOMETRY_HPP
#define FEEC_GEOMETRY_HPP

#include <feec/mesh.hpp>
#include <feec/quadrature.hpp>

namespace feec {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Point of M_h given by reference coordinates on one triangle.
struct GeoPoint {
  Vec3 x;
  Mat32 dx;    // [dx/dxi, dx/deta]
  Vec3 nu_h;   // unit normal of M_h
  Mat32 frame; // orthonormal tangent frame E of M_h
  Mat2 a;      // E^T dx
  double det_a = 0.0;
};

namespace detail {

inline Mat32 affine_dx(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  Mat32 d;
  d.col(0) = p1 - p0;
  d.col(1) = p2 - p0;
  return d;
}

}  // namespace detail

/// Evaluates the degree-s (or exact) element map of triangle t at xi.
inline GeoPoint geo_point(const SurfaceMesh& mesh, int t, const Vec2& xi, const ImplicitSurface* surface = nullptr) {
  const auto& tri = mesh.triangles[t];
  const Vec3& p0 = mesh.vertices[tri[0]];
  const Vec3& p1 = mesh.vertices[tri[1]];
  const Vec3& p2 = mesh.vertices[tri[2]];
  const double l1 = xi(0), l2 = xi(1), l0 = 1.0 - l1 - l2;
  GeoPoint g;
  switch (mesh.geometry) {
    case GeometryMode::affine:
      g.x = l0 * p0 + l1 * p1 + l2 * p2;
      g.dx = detail::affine_dx(p0, p1, p2);
      break;
    case GeometryMode::quadratic: {
      const Vec3& m01 = mesh.edge_nodes[mesh.tri_edges[t][0]];
      const Vec3& m12 = mesh.edge_nodes[mesh.tri_edges[t][1]];
      const Vec3& m20 = mesh.edge_nodes[mesh.tri_edges[t][2]];
      g.x = l0 * (2 * l0 - 1) * p0 + l1 * (2 * l1 - 1) * p1 + l2 * (2 * l2 - 1) * p2 + 4 * l0 * l1 * m01 +
            4 * l1 * l2 * m12 + 4 * l2 * l0 * m20;
      // d/dxi: dl0 = -1, dl1 = 1; d/deta: dl0 = -1, dl2 = 1
      g.dx.col(0) = -(4 * l0 - 1) * p0 + (4 * l1 - 1) * p1 + 4 * (l0 - l1) * m01 + 4 * l2 * m12 - 4 * l2 * m20;
      g.dx.col(1) = -(4 * l0 - 1) * p0 + (4 * l2 - 1) * p2 - 4 * l1 * m01 + 4 * l1 * m12 + 4 * (l0 - l2) * m20;
      break;
    }
    case GeometryMode::exact: {
      if (!surface) throw std::invalid_argument("exact geometry needs the surface");
      const Vec3 y = l0 * p0 + l1 * p1 + l2 * p2;
      g.x = surface->project(y);
      g.dx = projection_jacobian(*surface, y) * detail::affine_dx(p0, p1, p2);
      break;
    }
  }
  g.nu_h = g.dx.col(0).cross(g.dx.col(1)).normalized();
  g.frame.col(0) = g.dx.col(0).normalized();
  g.frame.col(1) = g.nu_h.cross(g.frame.col(0));
  g.a = g.frame.transpose() * g.dx;
  g.det_a = g.a.determinant();
  return g;
}

/// The lift of a point of M_h to M through a, with the tangent map in
/// orthonormal frames.
struct LiftPoint {
  Vec3 y;        // a(x)
  double delta = 0.0;
  Vec3 nu;       // normal of M at a(x)
  Mat3 grad_a;   // P + delta S
  Mat32 frame;   // orthonormal tangent frame F of M at a(x)
  Mat2 phi;      // F^T (P + delta S) E
  double det_phi = 0.0;
  Vec2 alpha;    // singular values, descending
  double normal_gap = 0.0;
};

inline LiftPoint lift_point(const ImplicitSurface& surface, const GeoPoint& g) {
  require_in_neighborhood(surface, g.x);
  LiftPoint p;
  p.delta = surface.distance(g.x);
  p.nu = surface.normal(g.x);
  p.y = surface.project(g.x);
  p.grad_a = Mat3::Identity() - p.nu * p.nu.transpose() - p.delta * surface.hessian(g.x);
  const Vec3 pe1 = p.grad_a * g.frame.col(0);
  p.frame = tangent_frame(p.nu, pe1);
  p.phi = p.frame.transpose() * p.grad_a * g.frame;
  p.det_phi = p.phi.determinant();
  if (!(p.det_phi > 0.0)) throw std::domain_error("lift: M_h and M are oppositely oriented");
  Eigen::JacobiSVD<Mat2> svd(p.phi);
  p.alpha = svd.singularValues();
  p.normal_gap = (p.nu - g.nu_h).norm();
  return p;
}

/// Singular values of the tangent map M_h -> M at reference point xi of t.
inline Vec2 singular_values(const ImplicitSurface& surface, const SurfaceMesh& mesh, int t, const Vec2& xi) {
  const LiftPoint p = lift_point(surface, geo_point(mesh, t, xi, &surface));
  if (!(p.alpha(1) > 0.0)) throw std::domain_error("singular_values: degenerate tangent frame");
  return p.alpha;
}

struct GeometryReport {
  double h = 0.0;
  double delta_inf = 0.0;
  double normal_gap_inf = 0.0;
  double sv_min = 1.0;
  double sv_max = 1.0;
  std::array<double, 3> jacobian_bound{0.0, 0.0, 0.0};
};

/// Samples delta, |nu - nu_h| and the singular values at quadrature points
/// and element vertices; jacobian_bound[k] bounds ||I - J_h^k|| through
/// products of singular values (m = 2).
inline GeometryReport geometry_report(const ImplicitSurface& surface, const SurfaceMesh& mesh, int quad_degree = 6) {
  GeometryReport r;
  r.h = mesh.h();
  const TriangleRule rule = triangle_rule(quad_degree);
  std::vector<Vec2> samples = rule.points;
  samples.push_back({0.0, 0.0});
  samples.push_back({1.0, 0.0});
  samples.push_back({0.0, 1.0});
  // sup over samples of L_k = a1..ak (a_{k+1}..a_m)^{-1} and U_k = a1..a_{m-k} (a_{m-k+1}..a_m)^{-1}
  std::array<double, 3> sup_l{0.0, 0.0, 0.0}, sup_u{0.0, 0.0, 0.0};
  r.sv_min = std::numeric_limits<double>::infinity();
  r.sv_max = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (const Vec2& xi : samples) {
      const GeoPoint g = geo_point(mesh, t, xi, &surface);
      const LiftPoint p = lift_point(surface, g);
      r.delta_inf = std::max(r.delta_inf, std::abs(p.delta));
      r.normal_gap_inf = std::max(r.normal_gap_inf, p.normal_gap);
      r.sv_min = std::min(r.sv_min, p.alpha(1));
      r.sv_max = std::max(r.sv_max, p.alpha(0));
      const double a1 = p.alpha(0), a2 = p.alpha(1);
      const std::array<double, 3> l{1.0 / (a1 * a2), a1 / a2, a1 * a2};
      const std::array<double, 3> u{a1 * a2, a1 / a2, 1.0 / (a1 * a2)};
      for (int k = 0; k < 3; ++k) {
        sup_l[k] = std::max(sup_l[k], l[k]);
        sup_u[k] = std::max(sup_u[k], u[k]);
      }
    }
  }
  for (int k = 0; k < 3; ++k)
    r.jacobian_bound[k] = std::max(std::abs(1.0 - 1.0 / sup_l[k]), std::abs(1.0 - sup_u[k]));
  return r;
}

}  // namespace feec

#endif  // FEEC_GEOMETRY_HPP
