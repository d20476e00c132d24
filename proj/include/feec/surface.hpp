// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_SURFACE_HPP
#define FEEC_SURFACE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace feec {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Signed distance bundle of a closed hypersurface M in R^3 with outward
/// normal: delta, nu = grad delta, and grad^2 delta on the tubular
/// neighborhood |delta| < reach.
class ImplicitSurface {
 public:
  virtual ~ImplicitSurface() = default;
  virtual double distance(const Vec3& x) const = 0;
  virtual Vec3 normal(const Vec3& x) const = 0;
  virtual Mat3 hessian(const Vec3& x) const = 0;
  virtual double reach() const = 0;
  virtual std::string name() const = 0;
  virtual double diameter() const { return 1.0; }

  /// a(x) = x - delta(x) nu(x).
  virtual Vec3 project(const Vec3& x) const { return x - distance(x) * normal(x); }
};

class Sphere final : public ImplicitSurface {
 public:
  explicit Sphere(double radius = 1.0) : r_(radius) {}
  double distance(const Vec3& x) const override { return x.norm() - r_; }
  Vec3 normal(const Vec3& x) const override { return x.normalized(); }
  Mat3 hessian(const Vec3& x) const override {
    const double n = x.norm();
    const Vec3 u = x / n;
    return (Mat3::Identity() - u * u.transpose()) / n;
  }
  Vec3 project(const Vec3& x) const override { return r_ * x.normalized(); }
  double reach() const override { return r_; }
  double diameter() const override { return 2.0 * r_; }
  std::string name() const override { return "sphere"; }
  double radius() const { return r_; }

 private:
  double r_;
};

/// Torus of tube radius rho around the circle of radius R in the xy-plane.
class Torus final : public ImplicitSurface {
 public:
  explicit Torus(double major = 2.0, double minor = 0.5) : big_(major), small_(minor) {}

  double distance(const Vec3& x) const override { return tube_offset(x).norm() - small_; }
  Vec3 normal(const Vec3& x) const override { return tube_offset(x).normalized(); }
  Mat3 hessian(const Vec3& x) const override {
    const Vec3 q = tube_offset(x);
    const double qn = q.norm();
    const Vec3 qh = q / qn;
    const double r = std::hypot(x.x(), x.y());
    const Vec3 ephi(-x.y() / r, x.x() / r, 0.0);
    return (Mat3::Identity() - qh * qh.transpose() - (big_ / r) * ephi * ephi.transpose()) / qn;
  }
  Vec3 project(const Vec3& x) const override {
    const Vec3 q = tube_offset(x);
    return x - q + small_ * q.normalized();
  }
  double reach() const override { return std::min(small_, big_ - small_); }
  double diameter() const override { return 2.0 * (big_ + small_); }
  std::string name() const override { return "torus"; }
  double major_radius() const { return big_; }
  double minor_radius() const { return small_; }

 private:
  Vec3 tube_offset(const Vec3& x) const {
    const double r = std::hypot(x.x(), x.y());
    if (r == 0.0) throw std::domain_error("torus: point on the symmetry axis");
    return x - Vec3(big_ * x.x() / r, big_ * x.y() / r, 0.0);
  }
  double big_, small_;
};

/// Plane n . x = c with unit normal n.
class Plane final : public ImplicitSurface {
 public:
  explicit Plane(const Vec3& n = Vec3::UnitZ(), double offset = 0.0) : n_(n.normalized()), c_(offset) {}
  double distance(const Vec3& x) const override { return n_.dot(x) - c_; }
  Vec3 normal(const Vec3&) const override { return n_; }
  Mat3 hessian(const Vec3&) const override { return Mat3::Zero(); }
  double reach() const override { return std::numeric_limits<double>::infinity(); }
  std::string name() const override { return "plane"; }

 private:
  Vec3 n_;
  double c_;
};

/// Generic level set phi = 0 with outward gradient. Closest points by Newton
/// on x = y + t grad phi(y), phi(y) = 0; Hessian of delta by central
/// differences of nu.
class LevelSetSurface final : public ImplicitSurface {
 public:
  using Scalar = std::function<double(const Vec3&)>;
  using Gradient = std::function<Vec3(const Vec3&)>;

  LevelSetSurface(Scalar phi, Gradient grad, double reach, double diameter, std::string name = "levelset")
      : phi_(std::move(phi)), grad_(std::move(grad)), reach_(reach), diam_(diameter), name_(std::move(name)) {}

  struct Foot {
    Vec3 point;
    double delta = 0.0;
    Vec3 normal;
    int iterations = 0;
    double residual = 0.0;
  };

  Foot foot(const Vec3& x) const {
    Vec3 y = x;
    double t = 0.0;
    Foot f;
    for (int it = 0; it < 50; ++it) {
      const Vec3 g = grad_(y);
      const double p = phi_(y);
      Eigen::Vector4d res;
      res.head<3>() = y + t * g - x;
      res(3) = p;
      f.residual = res.norm();
      f.iterations = it;
      if (f.residual < 1e-13) break;
      const Mat3 hphi = phi_hessian(y);
      Eigen::Matrix4d jac = Eigen::Matrix4d::Zero();
      jac.topLeftCorner<3, 3>() = Mat3::Identity() + t * hphi;
      jac.block<3, 1>(0, 3) = g;
      jac.block<1, 3>(3, 0) = g.transpose();
      const Eigen::Vector4d step = jac.partialPivLu().solve(res);
      y -= step.head<3>();
      t -= step(3);
    }
    if (f.residual >= 1e-10) throw std::domain_error("level set: closest point did not converge");
    const Vec3 g = grad_(y);
    f.point = y;
    f.normal = g.normalized();
    f.delta = t * g.norm();
    return f;
  }

  double distance(const Vec3& x) const override { return foot(x).delta; }
  Vec3 normal(const Vec3& x) const override { return foot(x).normal; }
  Vec3 project(const Vec3& x) const override { return foot(x).point; }
  Mat3 hessian(const Vec3& x) const override {
    const double h = 1e-5 * diam_;
    Mat3 out;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = h;
      out.col(j) = (normal(x + e) - normal(x - e)) / (2.0 * h);
    }
    return 0.5 * (out + out.transpose());
  }
  double reach() const override { return reach_; }
  double diameter() const override { return diam_; }
  std::string name() const override { return name_; }

 private:
  Mat3 phi_hessian(const Vec3& y) const {
    const double h = 1e-5 * diam_;
    Mat3 out;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = h;
      out.col(j) = (grad_(y + e) - grad_(y - e)) / (2.0 * h);
    }
    return 0.5 * (out + out.transpose());
  }
  Scalar phi_;
  Gradient grad_;
  double reach_, diam_;
  std::string name_;
};

inline void require_in_neighborhood(const ImplicitSurface& s, const Vec3& x) {
  const double d = s.distance(x);
  if (!(std::abs(d) < s.reach()))
    throw std::domain_error(s.name() + ": point at distance " + std::to_string(d) +
                            " outside the tubular neighborhood (reach " + std::to_string(s.reach()) + ")");
}

inline Vec3 closest_point(const ImplicitSurface& s, const Vec3& x) {
  require_in_neighborhood(s, x);
  return s.project(x);
}

/// S = -grad^2 delta.
inline Mat3 shape_operator(const ImplicitSurface& s, const Vec3& x) {
  require_in_neighborhood(s, x);
  return -s.hessian(x);
}

/// grad a = P + delta S.
inline Mat3 projection_jacobian(const ImplicitSurface& s, const Vec3& x) {
  const Vec3 n = s.normal(x);
  return Mat3::Identity() - n * n.transpose() - s.distance(x) * s.hessian(x);
}

struct LiftedVector {
  Vec3 value;
  bool was_tangent = true;
};

/// Y_h = P_h (I + delta S) Y for Y tangent to M at a(x), nu_h the normal of M_h at x.
inline LiftedVector tangent_lift(const ImplicitSurface& s, const Vec3& x, const Vec3& nu_h, const Vec3& y) {
  require_in_neighborhood(s, x);
  LiftedVector out;
  const Vec3 n = s.normal(x);
  Vec3 yt = y;
  const double normal_part = n.dot(y);
  if (std::abs(normal_part) > 1e-10 * (y.norm() + 1e-300)) {
    out.was_tangent = false;
    yt = y - normal_part * n;
  }
  const Vec3 lifted = yt - s.distance(x) * (s.hessian(x) * yt);
  out.value = lifted - nu_h.dot(lifted) * nu_h;
  return out;
}

/// Orthonormal frame of the plane orthogonal to nu, first vector along the
/// projection of `hint`.
inline Mat32 tangent_frame(const Vec3& nu, const Vec3& hint) {
  Vec3 f1 = hint - nu.dot(hint) * nu;
  if (f1.norm() < 1e-12 * (hint.norm() + 1e-300)) {
    f1 = std::abs(nu.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    f1 -= nu.dot(f1) * nu;
  }
  f1.normalize();
  Mat32 f;
  f.col(0) = f1;
  f.col(1) = nu.cross(f1);
  return f;
}

inline std::unique_ptr<ImplicitSurface> make_surface(const std::string& name) {
  if (name == "sphere") return std::make_unique<Sphere>();
  if (name == "torus") return std::make_unique<Torus>();
  if (name == "plane") return std::make_unique<Plane>();
  throw std::invalid_argument("unknown surface '" + name + "'");
}

}  // namespace feec

#endif  // FEEC_SURFACE_HPP
