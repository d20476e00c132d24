// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_CRIME_HPP
#define FEEC_CRIME_HPP

#include <feec/hilbert_complex.hpp>

#include <memory>

namespace feec {

/// Linear maps F_k between two complexes, one per level.
struct ComplexMorphism {
  std::shared_ptr<const ComplexRep> source;
  std::shared_ptr<const ComplexRep> target;
  std::vector<Mat> maps;  // F_k : target.dim(k) x source.dim(k)
};

struct MorphismLevel {
  double commutation_defect = 0.0;
  double w_norm = 0.0;
  double v_norm = 0.0;
};

struct MorphismDiagnostics {
  std::vector<MorphismLevel> levels;
  double max_defect = 0.0;
};

namespace detail {

inline void require_shapes(const ComplexMorphism& m) {
  if (!m.source || !m.target) throw std::invalid_argument("morphism without source or target");
  if (m.source->size() != m.target->size() || static_cast<int>(m.maps.size()) != m.source->size())
    throw std::invalid_argument("morphism level count mismatch");
  for (int k = 0; k < m.source->size(); ++k)
    if (m.maps[k].rows() != m.target->dim(k) || m.maps[k].cols() != m.source->dim(k))
      throw std::invalid_argument("morphism map " + std::to_string(k) + " has wrong shape");
}

inline double rel_norm(const Mat& a, double scale) {
  const double n = a.norm();
  return scale > 0.0 ? n / scale : n;
}

}  // namespace detail

/// Commutation defect of D' F_k - F_{k+1} D and operator norms of each F_k.
inline MorphismDiagnostics check_morphism(const ComplexMorphism& m) {
  detail::require_shapes(m);
  const ComplexRep& s = *m.source;
  const ComplexRep& t = *m.target;
  MorphismDiagnostics out;
  out.levels.resize(s.size());
  for (int k = 0; k < s.size(); ++k) {
    MorphismLevel& lv = out.levels[k];
    if (k < s.top()) {
      const Mat lhs = t.dense_diff(k) * m.maps[k];
      const Mat rhs = m.maps[k + 1] * s.dense_diff(k);
      const double scale = t.dense_diff(k).norm() * m.maps[k].norm() + m.maps[k + 1].norm() * s.dense_diff(k).norm();
      lv.commutation_defect = detail::rel_norm(lhs - rhs, scale);
    }
    lv.w_norm = linalg::operator_norm(m.maps[k], s.dense_gram(k), t.dense_gram(k));
    lv.v_norm = linalg::operator_norm(m.maps[k], Mat(s.v_gram(k)), Mat(t.v_gram(k)));
    out.max_defect = std::max(out.max_defect, lv.commutation_defect);
  }
  return out;
}

/// b o a.
inline ComplexMorphism compose(const ComplexMorphism& a, const ComplexMorphism& b) {
  detail::require_shapes(a);
  detail::require_shapes(b);
  if (a.target->size() != b.source->size()) throw std::invalid_argument("compose: level mismatch");
  ComplexMorphism out{a.source, b.target, {}};
  for (int k = 0; k < a.source->size(); ++k) {
    if (a.maps[k].rows() != b.maps[k].cols()) throw std::invalid_argument("compose: shape mismatch");
    out.maps.push_back(b.maps[k] * a.maps[k]);
  }
  return out;
}

/// max over levels of ||P_k I_k - id|| relative.
inline double left_inverse_defect(const ComplexMorphism& inj, const ComplexMorphism& proj) {
  double d = 0.0;
  for (std::size_t k = 0; k < inj.maps.size(); ++k) {
    const Mat pi = proj.maps[k] * inj.maps[k];
    if (pi.size() == 0) continue;
    d = std::max(d, (pi - Mat::Identity(pi.rows(), pi.cols())).cwiseAbs().maxCoeff());
  }
  return d;
}

/// pi_h = pi' o f, provided pi' o (f o i_h) = id.
inline ComplexMorphism compose_projection(const ComplexMorphism& f, const ComplexMorphism& pi_prime,
                                          const ComplexMorphism& injection, double tol = 1e-12) {
  const ComplexMorphism fi = compose(injection, f);
  if (left_inverse_defect(fi, pi_prime) > tol)
    throw std::invalid_argument("compose_projection: pi' o f o i_h is not the identity");
  ComplexMorphism pi = compose(f, pi_prime);
  if (left_inverse_defect(injection, pi) > tol)
    throw std::invalid_argument("compose_projection: composed projection is not a left inverse");
  return pi;
}

/// A true complex, an approximating complex, an injection i_h (approx ->
/// true) and a projection pi_h (true -> approx) with pi_h o i_h = id.
struct CrimePair {
  std::shared_ptr<const ComplexRep> true_complex;
  std::shared_ptr<const ComplexRep> approx_complex;
  ComplexMorphism injection;
  ComplexMorphism projection;

  const ComplexRep& truth() const { return *true_complex; }
  const ComplexRep& approx() const { return *approx_complex; }
  const Mat& inj(int k) const { return injection.maps.at(k); }
  const Mat& proj(int k) const { return projection.maps.at(k); }
  int size() const { return approx_complex->size(); }
};

struct PairDiagnostics {
  bool valid = true;
  double left_inverse_defect = 0.0;
  double injection_defect = 0.0;
  double projection_defect = 0.0;
  std::string message;
};

inline PairDiagnostics check_pair(const CrimePair& pair) {
  PairDiagnostics d;
  std::ostringstream msg;
  d.injection_defect = check_morphism(pair.injection).max_defect;
  d.projection_defect = check_morphism(pair.projection).max_defect;
  d.left_inverse_defect = left_inverse_defect(pair.injection, pair.projection);
  if (d.injection_defect > 1e-12) msg << "injection does not commute; ";
  if (d.projection_defect > 1e-12) msg << "projection does not commute; ";
  if (d.left_inverse_defect > 1e-12) msg << "pi o i != id; ";
  for (int k = 0; k < pair.size(); ++k)
    if (linalg::subspaces(pair.inj(k)).rank < pair.inj(k).cols())
      msg << "injection rank deficient at level " << k << "; ";
  d.message = msg.str();
  d.valid = d.message.empty();
  return d;
}

inline void require_pair(const CrimePair& pair) {
  require_valid(pair.truth());
  require_valid(pair.approx());
  const PairDiagnostics d = check_pair(pair);
  if (!d.valid) throw std::invalid_argument("invalid crime pair: " + d.message);
}

/// J_k = G_{h,k}^{-1} Ghat_k with Ghat_k = I_k^T G_k I_k.
struct JacobianOp {
  Mat gram_hat;
  Mat j;
  double deviation = 0.0;  // ||I - J_k|| in the approximating W-norm
};

/// max |1 - lambda| over the generalized eigenvalues of (g_hat, g_h).
inline double jacobian_deviation(const SpMat& g_h, const SpMat& g_hat) {
  const Eigen::Index n = g_h.rows();
  if (n == 0) return 0.0;
  if (g_hat.nonZeros() == g_h.nonZeros() && SpMat(g_hat - g_h).norm() == 0.0) return 0.0;
  if (n <= kDenseLimit) {
    Mat a = Mat(g_hat);
    a = 0.5 * (a + a.transpose()).eval();
    Mat b = Mat(g_h);
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, b, Eigen::EigenvaluesOnly);
    return (es.eigenvalues().array() - 1.0).abs().maxCoeff();
  }
  const SpMat diff = g_hat - g_h;
  const auto ext = linalg::lanczos_extremes(diff, g_h);
  return std::max(std::abs(ext.min), std::abs(ext.max));
}

inline JacobianOp jacobian(const CrimePair& pair, int k) {
  check_level(pair.approx(), k);
  const Mat& i = pair.inj(k);
  if (linalg::subspaces(i).rank < i.cols())
    throw std::invalid_argument("jacobian: injection rank deficient at level " + std::to_string(k));
  JacobianOp out;
  out.gram_hat = i.transpose() * pair.truth().dense_gram(k) * i;
  out.gram_hat = 0.5 * (out.gram_hat + out.gram_hat.transpose()).eval();
  const Mat gh = pair.approx().dense_gram(k);
  out.j = gh.llt().solve(out.gram_hat);
  out.deviation = jacobian_deviation(pair.approx().gram(k), out.gram_hat.sparseView(0.0, 0.0));
  return out;
}

/// The approximating differentials with the pulled-back Grams Ghat_k.
inline ComplexRep remetrized(const CrimePair& pair) {
  std::vector<ComplexLevel> lv(pair.size());
  for (int k = 0; k < pair.size(); ++k) {
    const Mat& i = pair.inj(k);
    Mat gh = i.transpose() * pair.truth().dense_gram(k) * i;
    gh = 0.5 * (gh + gh.transpose()).eval();
    lv[k].gram = gh.sparseView(0.0, 0.0);
    lv[k].diff = pair.approx().diff(k);
  }
  return ComplexRep(std::move(lv));
}

/// Basis of the modified harmonic space H'_h^k, orthonormal for Ghat_k.
inline Mat modified_harmonic_basis(const CrimePair& pair, int k) {
  require_pair(pair);
  return harmonic_basis(remetrized(pair), k);
}

/// i_h* f = G_{h,k}^{-1} I_k^T G_k f.
inline Vec adjoint_injection(const CrimePair& pair, int k, const Vec& f) {
  check_level(pair.approx(), k);
  if (f.size() != pair.truth().dim(k)) throw std::invalid_argument("adjoint_injection: wrong length");
  const Vec b = pair.inj(k).transpose() * (pair.truth().gram(k) * f);
  return pair.approx().dense_gram(k).llt().solve(b);
}

inline MixedSolution solve_discrete_mixed(const CrimePair& pair, int k, const Vec& f_h) {
  return solve_mixed_hodge(pair.approx(), k, f_h);
}

/// Modified mixed problem: every inner product is <i_h ., i_h .>, data i_h* f.
inline MixedSolution solve_modified_mixed(const CrimePair& pair, int k, const Vec& f) {
  require_pair(pair);
  if (f.size() != pair.truth().dim(k)) throw std::invalid_argument("solve_modified_mixed: wrong length");
  const ComplexRep rep = remetrized(pair);
  const Vec load = pair.inj(k).transpose() * (pair.truth().gram(k) * f);
  return solve_mixed_load(rep, k, load);
}

/// sup over unit harmonic r of ||(I - i_h pi_h) r||.
inline double mu_gap(const CrimePair& pair, int k) {
  const Mat h = harmonic_basis(pair.truth(), k);
  if (h.cols() == 0) return 0.0;
  const Mat resid = h - pair.inj(k) * (pair.proj(k) * h);
  return linalg::operator_norm(resid, Mat::Identity(h.cols(), h.cols()), pair.truth().dense_gram(k));
}

namespace detail {

inline double norm_in(const Mat& g, const Vec& x) { return std::sqrt(std::max(0.0, x.dot(g * x))); }

/// Distance from x to range(basis) in the g-norm.
inline double distance_to_range(const Mat& g, const Mat& basis, const Vec& x) {
  if (basis.cols() == 0) return norm_in(g, x);
  const Mat gb = g * basis;
  const Vec c = (basis.transpose() * gb).ldlt().solve(gb.transpose() * x);
  return norm_in(g, x - basis * c);
}

inline double max_deviation(const CrimePair& pair, int lo, int hi) {
  double e = 0.0;
  for (int j = std::max(lo, 0); j <= std::min(hi, pair.size() - 1); ++j)
    e = std::max(e, jacobian(pair, j).deviation);
  return e;
}

}  // namespace detail

struct CrimeReport {
  double lhs = 0.0;
  double best_approx = 0.0;
  double data_error = 0.0;
  double geometry_error = 0.0;
  double mu = 0.0;
  double ratio = 0.0;
  double intermediate = 0.0;
  double deviation = 0.0;     // max ||I - J_j|| over j = k-1, k, k+1
  double gamma_h = 0.0;       // discrete inf-sup constant
  double audit_bound = 0.0;   // computable bound on `intermediate`
};

/// Solves the true, discrete and modified problems and measures every term
/// of the perturbation estimate. With f_h absent the discrete data is
/// i_h* f.
inline CrimeReport crime_report(const CrimePair& pair, int k, const Vec& f,
                                const Vec* f_h = nullptr) {
  require_pair(pair);
  const ComplexRep& tr = pair.truth();
  const ComplexRep& ap = pair.approx();
  if (f.size() != tr.dim(k)) throw std::invalid_argument("crime_report: f has wrong length");
  if (f_h && f_h->size() != ap.dim(k)) throw std::invalid_argument("crime_report: f_h has wrong length");
  CrimeReport r;

  const MixedSolution exact = solve_mixed_hodge(tr, k, f);
  const Vec ifload = pair.inj(k).transpose() * (tr.gram(k) * f);
  const MixedSolution disc = f_h ? solve_mixed_hodge(ap, k, *f_h) : solve_mixed_load(ap, k, ifload);
  const MixedSolution mod = solve_modified_mixed(pair, k, f);

  const bool has_lo = k > 0;
  const Mat gv_lo = has_lo ? Mat(tr.v_gram(k - 1)) : Mat(0, 0);
  const Mat gv = Mat(tr.v_gram(k));
  const Mat g = tr.dense_gram(k);
  const Mat i_lo = has_lo ? pair.inj(k - 1) : Mat(0, 0);
  const Mat& i_k = pair.inj(k);

  // error against the true solution
  r.lhs = detail::norm_in(gv, exact.u - i_k * disc.u) + detail::norm_in(g, exact.p - i_k * disc.p);
  if (has_lo) r.lhs += detail::norm_in(gv_lo, exact.sigma - i_lo * disc.sigma);

  // best approximation from i_h V_h plus the mu-weighted boundary term
  r.mu = mu_gap(pair, k);
  double best = detail::distance_to_range(gv, i_k, exact.u) + detail::distance_to_range(g, i_k, exact.p);
  if (has_lo) best += detail::distance_to_range(gv_lo, i_lo, exact.sigma);
  const Vec pbu = hodge_decompose(tr, k, exact.u).boundary;
  best += r.mu * detail::distance_to_range(gv, i_k, pbu);
  r.best_approx = best;

  const Mat gh = ap.dense_gram(k);
  const Vec istar_f = gh.llt().solve(ifload);
  r.data_error = f_h ? detail::norm_in(gh, *f_h - istar_f) : 0.0;
  r.deviation = detail::max_deviation(pair, k - 1, k + 1);
  r.geometry_error = r.deviation * detail::norm_in(g, f);
  const double rhs = r.best_approx + r.data_error + r.geometry_error;
  r.ratio = rhs > 0.0 ? r.lhs / rhs : (r.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

  // discrete versus modified solution in the approximating norms
  const Mat ghv_lo = has_lo ? Mat(ap.v_gram(k - 1)) : Mat(0, 0);
  const Mat ghv = Mat(ap.v_gram(k));
  r.intermediate = detail::norm_in(ghv, disc.u - mod.u) + detail::norm_in(gh, disc.p - mod.p);
  if (has_lo) r.intermediate += detail::norm_in(ghv_lo, disc.sigma - mod.sigma);

  // audit: (sqrt(3)/gamma_h + 1) (data + ||P_H u'|| + ||P_B p'|| + 5 eps ||x'||)
  r.gamma_h = infsup_lower_bound(ap, k).gamma;
  const Mat& q = disc.harmonic;
  const Vec ph_u = q.cols() ? Vec(q * (q.transpose() * (gh * mod.u))) : Vec(Vec::Zero(mod.u.size()));
  const Vec ph_p = q.cols() ? Vec(q * (q.transpose() * (gh * mod.p))) : Vec(Vec::Zero(mod.p.size()));
  double xnorm2 = std::pow(detail::norm_in(ghv, mod.u), 2) + std::pow(detail::norm_in(gh, mod.p), 2);
  if (has_lo) xnorm2 += std::pow(detail::norm_in(ghv_lo, mod.sigma), 2);
  const double slack = r.data_error + detail::norm_in(gh, ph_u) + detail::norm_in(gh, mod.p - ph_p) +
                       5.0 * r.deviation * std::sqrt(xnorm2);
  r.audit_bound = r.gamma_h > 0.0 ? (std::sqrt(3.0) / r.gamma_h + 1.0) * slack
                                  : std::numeric_limits<double>::infinity();
  return r;
}

struct ProjectionDataCheck {
  double lhs = 0.0;            // ||Pi f - i_h* f||_h
  double geometry_term = 0.0;  // ||I - J_k|| ||f||
  double best_approx = 0.0;    // dist(f, range i_h)
  double constant = 0.0;       // 2 ||Pi|| + ||i_h*||
  double chain_bound = 0.0;    // ||I-J|| ||Pi|| ||f|| + (||Pi|| + ||i_h*||) dist
  bool violated = false;
};

inline ProjectionDataCheck projection_data(const CrimePair& pair, int k, const Mat& pi, const Vec& f) {
  check_level(pair.approx(), k);
  const Mat& i = pair.inj(k);
  if (pi.rows() != i.cols() || pi.cols() != i.rows())
    throw std::invalid_argument("projection_data: Pi has wrong shape");
  const Mat pii = pi * i;
  if ((pii - Mat::Identity(pii.rows(), pii.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("projection_data: Pi o i_h != id");
  const Mat g = pair.truth().dense_gram(k);
  const Mat gh = pair.approx().dense_gram(k);
  ProjectionDataCheck c;
  const Vec istar = adjoint_injection(pair, k, f);
  c.lhs = detail::norm_in(gh, pi * f - istar);
  const double fn = detail::norm_in(g, f);
  const double dev = jacobian(pair, k).deviation;
  c.geometry_term = dev * fn;
  c.best_approx = detail::distance_to_range(g, i, f);
  const double pi_norm = linalg::operator_norm(pi, g, gh);
  const Mat istar_op = gh.llt().solve(i.transpose() * g);
  const double istar_norm = linalg::operator_norm(istar_op, g, gh);
  c.constant = 2.0 * pi_norm + istar_norm;
  c.chain_bound = dev * pi_norm * fn + (pi_norm + istar_norm) * c.best_approx;
  const double tol = 1e-10 * (fn + 1.0);
  c.violated = c.lhs > c.constant * (c.geometry_term + c.best_approx) + tol || c.lhs > c.chain_bound + tol;
  return c;
}

struct DiscretePoincareCheck {
  double measured = 0.0;  // c_{P,h}
  double bound = 0.0;     // c_P ||pi_h^k||_V ||i_h^{k+1}||_V
  bool degenerate = false;
  bool violated = false;
};

inline DiscretePoincareCheck discrete_poincare_check(const CrimePair& pair, int k) {
  require_pair(pair);
  DiscretePoincareCheck out;
  const PoincareResult ph = poincare_constant(pair.approx(), k);
  out.degenerate = ph.degenerate;
  if (ph.degenerate || k + 1 >= pair.size()) {
    out.degenerate = true;
    return out;
  }
  const PoincareResult pt = poincare_constant(pair.truth(), k);
  const double pi_v = linalg::operator_norm(pair.proj(k), Mat(pair.truth().v_gram(k)), Mat(pair.approx().v_gram(k)));
  const double i_v = linalg::operator_norm(pair.inj(k + 1), Mat(pair.approx().v_gram(k + 1)),
                                           Mat(pair.truth().v_gram(k + 1)));
  out.measured = ph.constant;
  out.bound = pt.constant * pi_v * i_v;
  out.violated = out.measured > out.bound * (1.0 + 1e-9);
  return out;
}

struct CohomologyLevel {
  double gap = 0.0;  // sup ||q - i_h pi_h q|| / ||q|| over harmonic q
  bool hypothesis = false;
  bool bijective = false;
  int dim_true = 0;
  int dim_approx = 0;
  bool violated = false;  // hypothesis holds but the induced map is not bijective
};

inline std::vector<CohomologyLevel> cohomology_isomorphism_check(const CrimePair& pair) {
  require_pair(pair);
  std::vector<CohomologyLevel> out(pair.size());
  for (int k = 0; k < pair.size(); ++k) {
    CohomologyLevel& c = out[k];
    const Mat h = harmonic_basis(pair.truth(), k);
    const Mat hh = harmonic_basis(pair.approx(), k);
    c.dim_true = static_cast<int>(h.cols());
    c.dim_approx = static_cast<int>(hh.cols());
    c.gap = mu_gap(pair, k);
    c.hypothesis = c.gap < 1.0 - 1e-10;
    if (c.dim_true == 0 && c.dim_approx == 0) {
      c.bijective = true;
    } else if (c.dim_true == c.dim_approx) {
      // class of pi_h q is its harmonic component in the approximating complex
      const Mat m = hh.transpose() * pair.approx().dense_gram(k) * pair.proj(k) * h;
      c.bijective = linalg::subspaces(m, 1e-8).rank == c.dim_true;
    }
    c.violated = c.hypothesis && !c.bijective;
  }
  return out;
}

struct EigenComparison {
  Vec lambda;       // true complex
  Vec lambda_h;     // discrete problem
  Vec lambda_mod;   // modified problem
  double operator_gap = 0.0;  // ||i_h K_h P_h - i_h K'_h P_h||
  double deviation = 0.0;     // max_j ||I - J_j||
  double ratio = 0.0;         // operator_gap / deviation
};

/// Compares the true, discrete and modified eigenvalue problems and
/// measures the solution-operator gap on the full probe basis.
inline EigenComparison eigen_convergence_report(const CrimePair& pair, int k, int nev) {
  require_pair(pair);
  const ComplexRep& tr = pair.truth();
  const ComplexRep& ap = pair.approx();
  const ComplexRep mod = remetrized(pair);
  EigenComparison out;
  out.lambda = solve_hodge_eigen(tr, k, nev).eigenvalues;
  out.lambda_h = solve_hodge_eigen(ap, k, nev).eigenvalues;
  out.lambda_mod = solve_hodge_eigen(mod, k, nev).eigenvalues;

  const Mat& i = pair.inj(k);
  const Mat g = tr.dense_gram(k);
  const Mat ghat = mod.dense_gram(k);
  const Mat ph = ghat.ldlt().solve(i.transpose() * g);  // G-orthogonal projection onto range i
  const MixedOperator kh(ap, k, harmonic_basis(ap, k));
  const MixedOperator kmod(mod, k, harmonic_basis(mod, k));
  const Eigen::Index n = tr.dim(k);
  Mat diff(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Vec gcoef = ph.col(c);
    const Vec a = kh.solve_load(ap.gram(k) * gcoef).u;
    const Vec b = kmod.solve_load(mod.gram(k) * gcoef).u;
    diff.col(c) = i * (a - b);
  }
  out.operator_gap = linalg::operator_norm(diff, g, g);
  out.deviation = detail::max_deviation(pair, k - 1, k + 1);
  out.ratio = out.deviation > 0.0 ? out.operator_gap / out.deviation : 0.0;
  return out;
}

}  // namespace feec

#endif  // FEEC_CRIME_HPP
