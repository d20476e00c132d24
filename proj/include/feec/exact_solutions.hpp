// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_EXACT_SOLUTIONS_HPP
#define FEEC_EXACT_SOLUTIONS_HPP

#include <feec/derham.hpp>

namespace feec {

/// Homogeneous harmonic polynomial of degree ell whose restriction to the
/// unit sphere is an eigenfunction of -Laplace-Beltrami with eigenvalue
/// ell (ell + 1): x, xy, xyz.
struct SphericalHarmonic {
  int ell = 2;

  double value(const Vec3& y) const {
    switch (ell) {
      case 1: return y.x();
      case 2: return y.x() * y.y();
      case 3: return y.x() * y.y() * y.z();
      default: throw std::invalid_argument("spherical harmonic degree must be 1, 2 or 3");
    }
  }
  Vec3 ambient_gradient(const Vec3& y) const {
    switch (ell) {
      case 1: return Vec3::UnitX();
      case 2: return Vec3(y.y(), y.x(), 0.0);
      case 3: return Vec3(y.y() * y.z(), y.x() * y.z(), y.x() * y.y());
      default: throw std::invalid_argument("spherical harmonic degree must be 1, 2 or 3");
    }
  }
  /// Tangential gradient on the unit sphere.
  Vec3 surface_gradient(const Vec3& y) const {
    const Vec3 n = y.normalized();
    const Vec3 g = ambient_gradient(y);
    return g - n.dot(g) * n;
  }
  double eigenvalue() const { return ell * (ell + 1.0); }
};

/// Closed-form (sigma, u, p = 0) and data f of the Hodge-Laplace problem
/// on the unit sphere for one form degree.
struct Manufactured {
  int k = 0;
  double lambda = 0.0;
  ExactForm u;
  std::optional<ExactForm> sigma;  // absent for k = 0
  FormCallback f;
};

/// k = 0: u = Y; k = 1: u = grad Y, sigma = lambda Y; k = 2: u = Y vol,
/// sigma proxy = grad Y x nu with d sigma = lambda Y. In all cases f = lambda u.
inline Manufactured sphere_solution(int k, int ell = 2) {
  const SphericalHarmonic y{ell};
  const double lam = y.eigenvalue();
  Manufactured m;
  m.k = k;
  m.lambda = lam;
  auto scal = [y](double c) { return [y, c](const Vec3& p) { return c * y.value(p); }; };
  auto grad = [y](double c) { return [y, c](const Vec3& p) { return Vec3(c * y.surface_gradient(p)); }; };
  if (k == 0) {
    m.u = {FormCallback::scalar(0, scal(1.0)), FormCallback::vector(grad(1.0))};
    m.f = FormCallback::scalar(0, scal(lam));
  } else if (k == 1) {
    m.u = {FormCallback::vector(grad(1.0)), FormCallback::zero(2)};
    m.sigma = ExactForm{FormCallback::scalar(0, scal(lam)), FormCallback::vector(grad(lam))};
    m.f = FormCallback::vector(grad(lam));
  } else if (k == 2) {
    m.u = {FormCallback::scalar(2, scal(1.0)), std::nullopt};
    auto rot = [y](const Vec3& p) { return Vec3(y.surface_gradient(p).cross(p.normalized())); };
    m.sigma = ExactForm{FormCallback::vector(rot), FormCallback::scalar(2, scal(lam))};
    m.f = FormCallback::scalar(2, scal(lam));
  } else {
    throw std::out_of_range("form degree must be 0, 1 or 2");
  }
  return m;
}

}  // namespace feec

#endif  // FEEC_EXACT_SOLUTIONS_HPP
