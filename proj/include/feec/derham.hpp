// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_DERHAM_HPP
#define FEEC_DERHAM_HPP

#include <feec/crime.hpp>
#include <feec/elements.hpp>

#include <optional>

namespace feec {

/// A differential form on M evaluated at y in M against an orthonormal
/// tangent frame of M at y: one value for k = 0, two frame components for
/// k = 1, one density (with respect to the area form) for k = 2.
struct FormCallback {
  int degree = 0;
  std::function<Vec(const Vec3& y, const Mat32& frame)> eval;

  static FormCallback scalar(int degree, std::function<double(const Vec3&)> fn) {
    return {degree, [fn](const Vec3& y, const Mat32&) { return Vec::Constant(1, fn(y)); }};
  }
  /// One-form with tangent vector proxy v(y).
  static FormCallback vector(std::function<Vec3(const Vec3&)> fn) {
    return {1, [fn](const Vec3& y, const Mat32& f) { return Vec(f.transpose() * fn(y)); }};
  }
  static FormCallback zero(int degree) {
    return {degree, [degree](const Vec3&, const Mat32&) { return Vec::Zero(degree == 1 ? 2 : 1); }};
  }
};

/// Form u together with du (du absent for top forms).
struct ExactForm {
  FormCallback u;
  std::optional<FormCallback> du;
};

struct DofTables {
  std::vector<int> vertex;       // vertex -> 0-form dof
  std::vector<int> edge_node;    // edge -> 0-form dof (lagrange2), -1 otherwise
  std::vector<int> edge;         // edge -> Whitney 1-form dof
  std::vector<int> edge_moment;  // edge -> linear-moment 1-form dof (lagrange2), -1 otherwise
  std::vector<int> triangle;     // triangle -> 2-form dof
};

/// Discrete de Rham complex on M_h.
struct AssembledComplex {
  ComplexRep rep;
  Family family = Family::whitney;
  SurfaceMesh mesh;
  DofTables dofs;
  TriangleRule quad;
  const ImplicitSurface* surface = nullptr;  // needed for exact geometry
};

inline DofTables dof_tables(const SurfaceMesh& m, Family f) {
  DofTables t;
  const int nv = m.num_vertices(), ne = m.num_edges();
  for (int v = 0; v < nv; ++v) t.vertex.push_back(v);
  for (int e = 0; e < ne; ++e) {
    t.edge_node.push_back(f == Family::lagrange2 ? nv + e : -1);
    t.edge.push_back(e);
    t.edge_moment.push_back(f == Family::lagrange2 ? ne + e : -1);
  }
  for (int tr = 0; tr < m.num_triangles(); ++tr) t.triangle.push_back(tr);
  return t;
}

namespace detail {

/// Physical values of the local basis on M_h: k = 0 values (row 0) and
/// frame covectors of the gradients; k = 1 frame covectors and curl
/// densities; k = 2 densities.
struct PhysBasis {
  Eigen::VectorXd scalar;
  Eigen::Matrix<double, 2, Eigen::Dynamic> vec;
  Eigen::VectorXd curl;
};

inline PhysBasis phys_basis(Family f, int k, const Vec2& xi, const GeoPoint& g) {
  const RefBasis r = ref_basis(f, k, xi);
  PhysBasis p;
  const Mat2 ainvt = g.a.inverse().transpose();
  if (k == 0) {
    p.scalar = r.scalar;
    p.vec = ainvt * r.vec;
  } else if (k == 1) {
    p.vec = ainvt * r.vec;
    p.curl = r.curl / g.det_a;
  } else {
    p.scalar = r.scalar / g.det_a;
  }
  return p;
}

inline void require_quadrature(const SurfaceMesh& m, int degree) {
  if (degree < 2 * m.degree())
    throw std::invalid_argument("quadrature degree " + std::to_string(degree) + " below 2s = " +
                                std::to_string(2 * m.degree()));
}

/// Visits every quadrature point of every triangle in order.
template <class Fn>
void for_each_qp(const AssembledComplex& ac, Fn&& fn) {
  const SurfaceMesh& m = ac.mesh;
  for (int t = 0; t < m.num_triangles(); ++t)
    for (std::size_t q = 0; q < ac.quad.size(); ++q) {
      const Vec2& xi = ac.quad.points[q];
      const GeoPoint g = geo_point(m, t, xi, ac.surface);
      fn(t, xi, ac.quad.weights[q], g);
    }
}

inline Vec3 ambient(const FormCallback& cb, const Vec3& y, const Mat32& frame) {
  const Vec v = cb.eval(y, frame);
  if (cb.degree == 1) return frame * v;
  return Vec3(v(0), 0.0, 0.0);
}

/// Gram matrix of level k with integrand weight(t, xi, g) applied to the
/// pairing of physical basis values.
template <class Pairing>
SpMat gram_with(const AssembledComplex& ac, int k, Pairing&& pairing) {
  const Eigen::Index n = global_count(ac.mesh, ac.family, k);
  const int nl = local_count(ac.family, k);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(ac.mesh.num_triangles()) * nl * nl);
  Mat local(nl, nl);
  int current = -1;
  auto flush = [&](int t) {
    if (t < 0) return;
    const auto dofs = local_dofs(ac.mesh, ac.family, k, t);
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < nl; ++b)
        trip.emplace_back(dofs[a].index, dofs[b].index, dofs[a].sign * dofs[b].sign * local(a, b));
  };
  for_each_qp(ac, [&](int t, const Vec2& xi, double w, const GeoPoint& g) {
    if (t != current) {
      flush(current);
      current = t;
      local.setZero();
    }
    const PhysBasis p = phys_basis(ac.family, k, xi, g);
    pairing(local, p, w, g, xi, t);
  });
  flush(current);
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out = 0.5 * (out + SpMat(out.transpose()));
  out.prune(0.0);
  return out;
}

}  // namespace detail

/// Assembles Grams (metric of M_h) and differentials of the family.
inline AssembledComplex assemble(const SurfaceMesh& mesh, Family family, int quad_degree = 6,
                                 const ImplicitSurface* surface = nullptr) {
  detail::require_quadrature(mesh, quad_degree);
  std::vector<int> plus(mesh.edges.size(), 0), minus(mesh.edges.size(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int l = 0; l < 3; ++l) (mesh.tri_edge_signs[t][l] > 0 ? plus : minus)[mesh.tri_edges[t][l]]++;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (plus[e] > 1 || minus[e] > 1) throw std::invalid_argument("assemble: inconsistent orientation");
  AssembledComplex ac;
  ac.family = family;
  ac.mesh = mesh;
  ac.quad = triangle_rule(quad_degree);
  ac.surface = surface;
  ac.dofs = dof_tables(mesh, family);
  std::vector<ComplexLevel> lv(3);
  lv[0].gram = detail::gram_with(ac, 0, [](Mat& l, const detail::PhysBasis& p, double w, const GeoPoint& g, const Vec2&, int) {
    l.noalias() += (w * g.det_a) * p.scalar * p.scalar.transpose();
  });
  lv[1].gram = detail::gram_with(ac, 1, [](Mat& l, const detail::PhysBasis& p, double w, const GeoPoint& g, const Vec2&, int) {
    l.noalias() += (w * g.det_a) * p.vec.transpose() * p.vec;
  });
  lv[2].gram = detail::gram_with(ac, 2, [](Mat& l, const detail::PhysBasis& p, double w, const GeoPoint& g, const Vec2&, int) {
    l.noalias() += (w * g.det_a) * p.scalar * p.scalar.transpose();
  });
  lv[0].diff = differential(mesh, family, 0);
  lv[1].diff = differential(mesh, family, 1);
  ac.rep = ComplexRep(std::move(lv));
  return ac;
}

/// Gram of the lifted basis in the L^2(M) inner product, by change of
/// variables through a.
inline SpMat assemble_true_gram(const AssembledComplex& ac, const ImplicitSurface& surface, int k) {
  return detail::gram_with(ac, k, [&](Mat& l, const detail::PhysBasis& p, double w, const GeoPoint& g, const Vec2&, int) {
    const LiftPoint lp = lift_point(surface, g);
    const double wt = w * g.det_a;
    if (k == 0) {
      l.noalias() += (wt * lp.det_phi) * p.scalar * p.scalar.transpose();
    } else if (k == 1) {
      const Mat2 pinvt = lp.phi.inverse().transpose();
      const Eigen::Matrix<double, 2, Eigen::Dynamic> c = pinvt * p.vec;
      l.noalias() += (wt * lp.det_phi) * c.transpose() * c;
    } else {
      l.noalias() += (wt / lp.det_phi) * p.scalar * p.scalar.transpose();
    }
  });
}

struct TrueGram {
  SpMat gram_hat;
  double deviation = 0.0;
};

inline TrueGram true_gram(const AssembledComplex& ac, const ImplicitSurface& surface, int k) {
  TrueGram out;
  out.gram_hat = assemble_true_gram(ac, surface, k);
  out.deviation = jacobian_deviation(ac.rep.gram(k), out.gram_hat);
  return out;
}

/// (D_h, Ghat) as a complex: the modified problem lives here.
inline ComplexRep true_metric_complex(const AssembledComplex& ac, const ImplicitSurface& surface) {
  std::vector<ComplexLevel> lv(3);
  for (int k = 0; k < 3; ++k) {
    lv[k].gram = assemble_true_gram(ac, surface, k);
    lv[k].diff = ac.rep.diff(k);
  }
  return ComplexRep(std::move(lv));
}

namespace detail {

/// Points along local edge l of triangle t, parametrized from the global
/// tail to the global head: reference coordinate and d xi / ds.
inline std::pair<Vec2, Vec2> edge_param(const SurfaceMesh& m, int t, int l, double s) {
  static const Vec2 corner[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const int i = kLocalEdges[l][0], j = kLocalEdges[l][1];
  Vec2 a = corner[i], b = corner[j];
  if (m.tri_edge_signs[t][l] < 0) std::swap(a, b);
  return {a + s * (b - a), b - a};
}

inline std::vector<std::pair<int, int>> edge_owner(const SurfaceMesh& m) {
  std::vector<std::pair<int, int>> owner(m.edges.size(), {-1, -1});
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int l = 0; l < 3; ++l)
      if (owner[m.tri_edges[t][l]].first < 0) owner[m.tri_edges[t][l]] = {t, l};
  return owner;
}

}  // namespace detail

/// Canonical degrees of freedom of a form on M, evaluated through the
/// closest-point map: vertex (and edge-node) values, edge integrals (and
/// linear edge moments), triangle integrals.
inline Vec canonical_interpolate(const FormCallback& cb, const AssembledComplex& ac, const ImplicitSurface& surface) {
  const int k = cb.degree;
  const SurfaceMesh& m = ac.mesh;
  Vec out = Vec::Zero(global_count(m, ac.family, k));
  auto value_at = [&](const Vec3& x) {
    const Vec3 y = surface.project(x);
    const Mat32 f = tangent_frame(surface.normal(y), Vec3::UnitX());
    return cb.eval(y, f)(0);
  };
  if (k == 0) {
    for (int v = 0; v < m.num_vertices(); ++v) out(v) = value_at(m.vertices[v]);
    if (ac.family == Family::lagrange2) {
      const auto owner = detail::edge_owner(m);
      for (int e = 0; e < m.num_edges(); ++e) {
        const auto [t, l] = owner[e];
        const Vec2 xi = detail::edge_param(m, t, l, 0.5).first;
        out(m.num_vertices() + e) = value_at(geo_point(m, t, xi, ac.surface).x);
      }
    }
  } else if (k == 1) {
    const LineRule gl = gauss_legendre(std::max(4, ac.quad.degree / 2 + 2));
    const auto owner = detail::edge_owner(m);
    for (int e = 0; e < m.num_edges(); ++e) {
      const auto [t, l] = owner[e];
      double c0 = 0.0, c1 = 0.0;
      for (std::size_t q = 0; q < gl.points.size(); ++q) {
        const double s = gl.points[q];
        const auto [xi, dxi] = detail::edge_param(m, t, l, s);
        const GeoPoint g = geo_point(m, t, xi, ac.surface);
        const Vec3 tangent = g.dx * dxi;
        const LiftPoint lp = lift_point(surface, g);
        const Vec3 w = detail::ambient(cb, lp.y, lp.frame);
        const double integrand = w.dot(lp.grad_a * tangent);
        c0 += gl.weights[q] * integrand;
        c1 += gl.weights[q] * 1.5 * (2.0 * s - 1.0) * integrand;
      }
      out(e) = c0;
      if (ac.family == Family::lagrange2) out(m.num_edges() + e) = c1;
    }
  } else {
    detail::for_each_qp(ac, [&](int t, const Vec2&, double w, const GeoPoint& g) {
      const LiftPoint lp = lift_point(surface, g);
      out(t) += w * g.det_a * lp.det_phi * cb.eval(lp.y, lp.frame)(0);
    });
  }
  return out;
}

/// b_a = <a^* f, phi_a> on M_h (the pulled-back load vector).
inline Vec pullback_rhs(const AssembledComplex& ac, const ImplicitSurface& surface, const FormCallback& f) {
  const int k = f.degree;
  Vec b = Vec::Zero(global_count(ac.mesh, ac.family, k));
  detail::for_each_qp(ac, [&](int t, const Vec2& xi, double w, const GeoPoint& g) {
    const LiftPoint lp = lift_point(surface, g);
    const detail::PhysBasis p = detail::phys_basis(ac.family, k, xi, g);
    const auto dofs = local_dofs(ac.mesh, ac.family, k, t);
    const Vec fv = f.eval(lp.y, lp.frame);
    const double wt = w * g.det_a;
    const int nl = local_count(ac.family, k);
    for (int a = 0; a < nl; ++a) {
      double val;
      if (k == 0) {
        val = fv(0) * p.scalar(a);
      } else if (k == 1) {
        const Vec2 pulled = lp.phi.transpose() * Vec2(fv(0), fv(1));  // a^* f in the E frame
        val = pulled.dot(p.vec.col(a));
      } else {
        val = fv(0) * lp.det_phi * p.scalar(a);
      }
      b(dofs[a].index) += dofs[a].sign * wt * val;
    }
  });
  return b;
}

/// b_a = <f, i_h phi_a>_{L^2(M)}; i_h* f = G_h^{-1} b.
inline Vec istar_rhs(const AssembledComplex& ac, const ImplicitSurface& surface, const FormCallback& f) {
  const int k = f.degree;
  Vec b = Vec::Zero(global_count(ac.mesh, ac.family, k));
  detail::for_each_qp(ac, [&](int t, const Vec2& xi, double w, const GeoPoint& g) {
    const LiftPoint lp = lift_point(surface, g);
    const detail::PhysBasis p = detail::phys_basis(ac.family, k, xi, g);
    const auto dofs = local_dofs(ac.mesh, ac.family, k, t);
    const Vec fv = f.eval(lp.y, lp.frame);
    const double wt = w * g.det_a;
    const int nl = local_count(ac.family, k);
    const Mat2 pinvt = lp.phi.inverse().transpose();
    for (int a = 0; a < nl; ++a) {
      double val;
      if (k == 0) {
        val = fv(0) * p.scalar(a) * lp.det_phi;
      } else if (k == 1) {
        val = Vec2(fv(0), fv(1)).dot(pinvt * p.vec.col(a)) * lp.det_phi;
      } else {
        val = fv(0) * p.scalar(a);
      }
      b(dofs[a].index) += dofs[a].sign * wt * val;
    }
  });
  return b;
}

struct PullbackLoad {
  Vec rhs;      // <a^* f, phi_a>_h
  Vec dofs;     // f_h = G_h^{-1} rhs
  double residual = 0.0;
};

/// f_h: the pullback a^* f, L^2(M_h)-projected onto the discrete space.
inline PullbackLoad pullback_load(const AssembledComplex& ac, const ImplicitSurface& surface, const FormCallback& f) {
  PullbackLoad out;
  out.rhs = pullback_rhs(ac, surface, f);
  const SpMat g = ac.rep.gram(f.degree);
  Eigen::SimplicialLLT<SpMat> chol(g);
  if (chol.info() != Eigen::Success) throw std::runtime_error("pullback_load: Gram not SPD");
  out.dofs = chol.solve(out.rhs);
  const double scale = std::max(out.rhs.lpNorm<Eigen::Infinity>(), 1e-300);
  out.residual = (g * out.dofs - out.rhs).lpNorm<Eigen::Infinity>() / scale;
  return out;
}

/// ||f||_{L^2(M)} by change of variables.
inline double norm_on_surface(const AssembledComplex& ac, const ImplicitSurface& surface, const FormCallback& f) {
  double s = 0.0;
  detail::for_each_qp(ac, [&](int, const Vec2&, double w, const GeoPoint& g) {
    const LiftPoint lp = lift_point(surface, g);
    s += w * g.det_a * lp.det_phi * f.eval(lp.y, lp.frame).squaredNorm();
  });
  return std::sqrt(s);
}

struct ErrorNorms {
  double l2 = 0.0;  // ||u - i_h u_h||_{L^2(M)}
  double d = 0.0;   // ||d(u - i_h u_h)||_{L^2(M)}
  double graph() const { return std::sqrt(l2 * l2 + d * d); }
};

/// Errors on M between an exact form and the lift of a discrete one.
inline ErrorNorms error_norms(const AssembledComplex& ac, const ImplicitSurface& surface, const ExactForm& exact,
                              const Vec& dofs, int k) {
  if (dofs.size() != global_count(ac.mesh, ac.family, k))
    throw std::invalid_argument("error_norms: dof vector has wrong length");
  double e0 = 0.0, e1 = 0.0;
  detail::for_each_qp(ac, [&](int t, const Vec2& xi, double w, const GeoPoint& g) {
    const LiftPoint lp = lift_point(surface, g);
    const detail::PhysBasis p = detail::phys_basis(ac.family, k, xi, g);
    const auto ld = local_dofs(ac.mesh, ac.family, k, t);
    const int nl = local_count(ac.family, k);
    Vec c(nl);
    for (int a = 0; a < nl; ++a) c(a) = ld[a].sign * dofs(ld[a].index);
    const double wt = w * g.det_a * lp.det_phi;
    const Vec uex = exact.u.eval(lp.y, lp.frame);
    const Mat2 pinvt = lp.phi.inverse().transpose();
    if (k == 0) {
      e0 += wt * std::pow(uex(0) - p.scalar.dot(c), 2);
      if (exact.du) {
        const Vec2 grad = pinvt * (p.vec * c);
        const Vec dex = exact.du->eval(lp.y, lp.frame);
        e1 += wt * (Vec2(dex(0), dex(1)) - grad).squaredNorm();
      }
    } else if (k == 1) {
      const Vec2 val = pinvt * (p.vec * c);
      e0 += wt * (Vec2(uex(0), uex(1)) - val).squaredNorm();
      if (exact.du) {
        const double curl = p.curl.dot(c) / lp.det_phi;
        e1 += wt * std::pow(exact.du->eval(lp.y, lp.frame)(0) - curl, 2);
      }
    } else {
      e0 += wt * std::pow(uex(0) - p.scalar.dot(c) / lp.det_phi, 2);
    }
  });
  ErrorNorms out;
  out.l2 = std::sqrt(e0);
  out.d = std::sqrt(e1);
  return out;
}

}  // namespace feec

#endif  // FEEC_DERHAM_HPP
