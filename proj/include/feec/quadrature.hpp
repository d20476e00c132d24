// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_QUADRATURE_HPP
#define FEEC_QUADRATURE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace feec {

/// Quadrature on the reference triangle {xi, eta >= 0, xi + eta <= 1};
/// weights sum to its area 1/2.
struct TriangleRule {
  int degree = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

inline LineRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  LineRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;  // P_{j-1}, P_j
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.points[i] = 0.5 * (1.0 - x);
    r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

namespace detail {

inline void add_orbit3(TriangleRule& r, double a, double w) {
  // (a, a, 1-2a) and permutations, barycentric -> (xi, eta) = (l1, l2)
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({a, a});
  r.points.push_back({a, b});
  r.points.push_back({b, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
}

inline void add_orbit6(TriangleRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double bary[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
  for (const auto& p : bary) {
    r.points.push_back({p[0], p[1]});
    r.weights.push_back(0.5 * w);
  }
}

/// Collapsed conical product of Gauss-Legendre rules, exact to `degree`.
inline TriangleRule conical(int degree) {
  const int n = degree / 2 + 1;
  const LineRule g = gauss_legendre(n);
  TriangleRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      // xi = u, eta = (1 - u) v, Jacobian (1 - u)
      const double wgt = g.weights[i] * g.weights[j] * (1.0 - u);
      r.points.push_back({u, (1.0 - u) * v});
      r.weights.push_back(wgt);
    }
  return r;
}

}  // namespace detail

/// Symmetric Dunavant rules up to degree 6; higher degrees use a collapsed
/// Gauss-Legendre product.
inline TriangleRule triangle_rule(int degree) {
  if (degree < 1) degree = 1;
  TriangleRule r;
  r.degree = degree;
  if (degree == 1) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5);
  } else if (degree == 2) {
    detail::add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
  } else if (degree <= 4) {
    r.degree = 4;
    detail::add_orbit3(r, 0.445948490915965, 0.223381589678011);
    detail::add_orbit3(r, 0.091576213509771, 0.109951743655322);
  } else if (degree == 5) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5 * 0.225);
    detail::add_orbit3(r, 0.470142064105115, 0.132394152788506);
    detail::add_orbit3(r, 0.101286507323456, 0.125939180544827);
  } else if (degree == 6) {
    detail::add_orbit3(r, 0.249286745170910, 0.116786275726379);
    detail::add_orbit3(r, 0.063089014491502, 0.050844906370207);
    detail::add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
  } else {
    return detail::conical(degree);
  }
  return r;
}

}  // namespace feec

#endif  // FEEC_QUADRATURE_HPP
