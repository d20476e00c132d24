// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_ELEMENTS_HPP
#define FEEC_ELEMENTS_HPP

#include <feec/geometry.hpp>
#include <feec/linalg.hpp>

#include <string>

namespace feec {

/// whitney: P1- forms (hat functions, Whitney edge forms, constants).
/// lagrange2: P2 scalars, full P1 one-forms, constants.
enum class Family { whitney, lagrange2 };

inline std::string to_string(Family f) { return f == Family::whitney ? "whitney" : "lagrange2"; }

inline int local_count(Family f, int k) {
  if (k == 2) return 1;
  return f == Family::whitney ? 3 : 6;
}

inline Eigen::Index global_count(const SurfaceMesh& m, Family f, int k) {
  switch (k) {
    case 0: return f == Family::whitney ? m.num_vertices() : m.num_vertices() + m.num_edges();
    case 1: return f == Family::whitney ? m.num_edges() : 2 * m.num_edges();
    case 2: return m.num_triangles();
    default: throw std::out_of_range("form degree must be 0, 1 or 2");
  }
}

/// Reference basis at one point. For k = 0: values and gradients; k = 1:
/// covectors (dxi, deta components) and curls; k = 2: densities. Curls and
/// densities are coefficients of dxi ^ deta.
struct RefBasis {
  Eigen::VectorXd scalar;  // k = 0 values, k = 2 densities
  Eigen::Matrix<double, 2, Eigen::Dynamic> vec;  // k = 0 gradients, k = 1 covectors
  Eigen::VectorXd curl;    // k = 1
};

namespace detail {

inline const std::array<Vec2, 3>& bary_grads() {
  static const std::array<Vec2, 3> g{Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  return g;
}

inline constexpr int kLocalEdges[3][2] = {{0, 1}, {1, 2}, {2, 0}};

}  // namespace detail

inline RefBasis ref_basis(Family f, int k, const Vec2& xi) {
  const double lam[3] = {1.0 - xi(0) - xi(1), xi(0), xi(1)};
  const auto& g = detail::bary_grads();
  const int n = local_count(f, k);
  RefBasis b;
  if (k == 0) {
    b.scalar.resize(n);
    b.vec.resize(2, n);
    for (int i = 0; i < 3; ++i) {
      if (f == Family::whitney) {
        b.scalar(i) = lam[i];
        b.vec.col(i) = g[i];
      } else {
        b.scalar(i) = lam[i] * (2.0 * lam[i] - 1.0);
        b.vec.col(i) = (4.0 * lam[i] - 1.0) * g[i];
      }
    }
    if (f == Family::lagrange2) {
      for (int e = 0; e < 3; ++e) {
        const int i = detail::kLocalEdges[e][0], j = detail::kLocalEdges[e][1];
        b.scalar(3 + e) = 4.0 * lam[i] * lam[j];
        b.vec.col(3 + e) = 4.0 * (lam[j] * g[i] + lam[i] * g[j]);
      }
    }
  } else if (k == 1) {
    b.vec.resize(2, n);
    b.curl.resize(n);
    for (int e = 0; e < 3; ++e) {
      const int i = detail::kLocalEdges[e][0], j = detail::kLocalEdges[e][1];
      b.vec.col(e) = lam[i] * g[j] - lam[j] * g[i];
      b.curl(e) = 2.0 * (g[i](0) * g[j](1) - g[i](1) * g[j](0));
      if (f == Family::lagrange2) {
        b.vec.col(3 + e) = -2.0 * (lam[j] * g[i] + lam[i] * g[j]);
        b.curl(3 + e) = 0.0;
      }
    }
  } else if (k == 2) {
    b.scalar.resize(1);
    b.scalar(0) = 2.0;
  } else {
    throw std::out_of_range("form degree must be 0, 1 or 2");
  }
  return b;
}

struct LocalDof {
  int index;
  double sign;
};

/// Global dofs of the local basis functions of triangle t.
inline std::array<LocalDof, 6> local_dofs(const SurfaceMesh& m, Family f, int k, int t) {
  std::array<LocalDof, 6> out{};
  const int nv = m.num_vertices();
  const int ne = m.num_edges();
  if (k == 0) {
    for (int i = 0; i < 3; ++i) out[i] = {m.triangles[t][i], 1.0};
    if (f == Family::lagrange2)
      for (int e = 0; e < 3; ++e) out[3 + e] = {nv + m.tri_edges[t][e], 1.0};
  } else if (k == 1) {
    for (int e = 0; e < 3; ++e) out[e] = {m.tri_edges[t][e], static_cast<double>(m.tri_edge_signs[t][e])};
    if (f == Family::lagrange2)
      for (int e = 0; e < 3; ++e) out[3 + e] = {ne + m.tri_edges[t][e], 1.0};
  } else {
    out[0] = {t, 1.0};
  }
  return out;
}

/// Integer differential matrices of the family.
inline SpMat differential(const SurfaceMesh& m, Family f, int k) {
  std::vector<Triplet> trip;
  const int nv = m.num_vertices();
  const int ne = m.num_edges();
  if (k == 0) {
    for (int e = 0; e < ne; ++e) {
      trip.emplace_back(e, m.edges[e][0], -1.0);
      trip.emplace_back(e, m.edges[e][1], 1.0);
      if (f == Family::lagrange2) {
        trip.emplace_back(ne + e, m.edges[e][0], 1.0);
        trip.emplace_back(ne + e, m.edges[e][1], 1.0);
        trip.emplace_back(ne + e, nv + e, -2.0);
      }
    }
  } else if (k == 1) {
    for (int t = 0; t < m.num_triangles(); ++t)
      for (int l = 0; l < 3; ++l) trip.emplace_back(t, m.tri_edges[t][l], m.tri_edge_signs[t][l]);
  } else {
    return SpMat(0, m.num_triangles());
  }
  SpMat d(global_count(m, f, k + 1), global_count(m, f, k));
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

}  // namespace feec

#endif  // FEEC_ELEMENTS_HPP
