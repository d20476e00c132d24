// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_HILBERT_COMPLEX_HPP
#define FEEC_HILBERT_COMPLEX_HPP

#include <feec/linalg.hpp>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace feec {

/// One level of a finite-dimensional Hilbert cochain complex: the Gram
/// matrix of the W^k inner product and the differential d^k into level k+1.
struct ComplexLevel {
  SpMat gram;
  SpMat diff;  // n_{k+1} x n_k; zero rows at the top level
};

/// A finite-dimensional Hilbert complex W^0 -> W^1 -> ... -> W^m stored as
/// Gram and differential matrices. V^k = W^k; the graph inner product
/// <u, v> + <du, dv> is derived on demand.
class ComplexRep {
 public:
  std::vector<ComplexLevel> levels;

  ComplexRep() = default;
  explicit ComplexRep(std::vector<ComplexLevel> lv) : levels(std::move(lv)) { normalize(); }

  /// Builds a complex from dense blocks; diffs.size() may be grams.size()-1.
  static ComplexRep from_dense(const std::vector<Mat>& grams, const std::vector<Mat>& diffs) {
    std::vector<ComplexLevel> lv(grams.size());
    for (std::size_t k = 0; k < grams.size(); ++k) {
      lv[k].gram = grams[k].sparseView(0.0, 0.0);
      if (k < diffs.size()) lv[k].diff = diffs[k].sparseView(0.0, 0.0);
    }
    return ComplexRep(std::move(lv));
  }

  int size() const { return static_cast<int>(levels.size()); }
  int top() const { return size() - 1; }
  bool has_level(int k) const { return k >= 0 && k < size(); }

  Eigen::Index dim(int k) const { return has_level(k) ? levels[k].gram.rows() : 0; }

  Eigen::Index total_dim() const {
    Eigen::Index n = 0;
    for (int k = 0; k < size(); ++k) n += dim(k);
    return n;
  }

  /// Gram matrix of level k (empty 0x0 outside the complex).
  SpMat gram(int k) const { return has_level(k) ? levels[k].gram : SpMat(0, 0); }

  /// d^k : level k -> level k+1, with the conventions d^{-1} = n_0 x 0 and
  /// d^m = 0 x n_m.
  SpMat diff(int k) const {
    if (k < 0) return SpMat(dim(0), 0);
    if (k >= top()) return SpMat(0, dim(k));
    return levels[k].diff;
  }

  Mat dense_gram(int k) const { return Mat(gram(k)); }
  Mat dense_diff(int k) const { return Mat(diff(k)); }

  /// Graph-norm Gram G_k + D_k^T G_{k+1} D_k.
  SpMat v_gram(int k) const {
    const SpMat d = diff(k);
    if (d.rows() == 0) return gram(k);
    return SpMat(gram(k) + SpMat(d.transpose() * gram(k + 1) * d));
  }

 private:
  void normalize() {
    for (int k = 0; k < size(); ++k) {
      if (k == top()) levels[k].diff = SpMat(0, dim(k));
      levels[k].gram.makeCompressed();
      levels[k].diff.makeCompressed();
    }
  }
};

struct LevelDiagnostics {
  double cochain_defect = 0.0;  // ||D_{k+1} D_k|| relative
  double symmetry_defect = 0.0;
  double gram_min_eigenvalue = 0.0;
};

struct ValidationReport {
  bool valid = true;
  std::vector<LevelDiagnostics> levels;
  std::string message;
};

namespace detail {

inline double cochain_defect(const SpMat& d0, const SpMat& d1) {
  if (d0.rows() == 0 || d1.rows() == 0 || d0.cols() == 0) return 0.0;
  const double n0 = d0.norm();
  const double n1 = d1.norm();
  if (n0 == 0.0 || n1 == 0.0) return 0.0;
  const SpMat prod = d1 * d0;
  return prod.norm() / (n0 * n1);
}

inline double symmetry_defect(const SpMat& g) {
  const double scale = linalg::max_abs(g);
  if (scale == 0.0) return 0.0;
  const SpMat t = g.transpose();
  return linalg::max_abs(SpMat(g - t)) / scale;
}

inline std::string shape_problem(const ComplexRep& rep) {
  std::ostringstream os;
  for (int k = 0; k < rep.size(); ++k) {
    const auto& lv = rep.levels[k];
    if (lv.gram.rows() != lv.gram.cols()) os << "level " << k << ": gram not square; ";
    if (k < rep.top()) {
      if (lv.diff.cols() != rep.dim(k) || lv.diff.rows() != rep.dim(k + 1))
        os << "level " << k << ": diff has shape " << lv.diff.rows() << "x" << lv.diff.cols()
           << ", expected " << rep.dim(k + 1) << "x" << rep.dim(k) << "; ";
    }
  }
  return os.str();
}

}  // namespace detail

/// Checks the Hilbert complex axioms; violations are reported, not thrown.
inline ValidationReport validate(const ComplexRep& rep) {
  ValidationReport report;
  if (rep.size() == 0) {
    report.valid = false;
    report.message = "empty complex";
    return report;
  }
  if (auto shape = detail::shape_problem(rep); !shape.empty()) {
    report.valid = false;
    report.message = shape;
    return report;
  }
  std::ostringstream msg;
  report.levels.resize(rep.size());
  for (int k = 0; k < rep.size(); ++k) {
    LevelDiagnostics& d = report.levels[k];
    const SpMat& g = rep.levels[k].gram;
    d.symmetry_defect = detail::symmetry_defect(g);
    d.cochain_defect = detail::cochain_defect(rep.diff(k), rep.diff(k + 1));
    if (g.rows() == 0) {
      d.gram_min_eigenvalue = std::numeric_limits<double>::infinity();
    } else if (g.rows() <= kDenseLimit) {
      Mat gd(g);
      gd = 0.5 * (gd + gd.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Mat> es(gd, Eigen::EigenvaluesOnly);
      d.gram_min_eigenvalue = es.eigenvalues().minCoeff();
    } else {
      Eigen::SimplicialLLT<SpMat> chol(g);
      if (chol.info() != Eigen::Success) {
        d.gram_min_eigenvalue = -1.0;
      } else {
        auto ext = linalg::lanczos_extremes(g, linalg::sparse_identity(g.rows()), 120);
        d.gram_min_eigenvalue = ext.min;
      }
    }
    if (d.symmetry_defect > 1e-12) {
      report.valid = false;
      msg << "level " << k << ": gram not symmetric (" << d.symmetry_defect << "); ";
    }
    if (!(d.gram_min_eigenvalue > 0.0)) {
      report.valid = false;
      msg << "level " << k << ": gram not positive definite; ";
    }
    if (d.cochain_defect > 1e-12) {
      report.valid = false;
      msg << "level " << k << ": d o d != 0 (" << d.cochain_defect << "); ";
    }
  }
  report.message = msg.str();
  return report;
}

/// Cheap validity gate for downstream operations. Throws on violation.
inline void require_valid(const ComplexRep& rep) {
  if (rep.size() == 0) throw std::invalid_argument("complex has no levels");
  if (auto shape = detail::shape_problem(rep); !shape.empty()) throw std::invalid_argument(shape);
  for (int k = 0; k < rep.size(); ++k) {
    const SpMat& g = rep.levels[k].gram;
    if (detail::symmetry_defect(g) > 1e-12)
      throw std::invalid_argument("invalid complex: gram " + std::to_string(k) + " not symmetric");
    if (detail::cochain_defect(rep.diff(k), rep.diff(k + 1)) > 1e-12)
      throw std::invalid_argument("invalid complex: d o d != 0 at level " + std::to_string(k));
    if (g.rows() > 0) {
      Eigen::SimplicialLLT<SpMat> chol(g);
      if (chol.info() != Eigen::Success)
        throw std::invalid_argument("invalid complex: gram " + std::to_string(k) + " not SPD");
    }
  }
}

inline void check_level(const ComplexRep& rep, int k) {
  if (!rep.has_level(k))
    throw std::out_of_range("level " + std::to_string(k) + " outside complex of size " +
                            std::to_string(rep.size()));
}

/// d*_k = G_{k-1}^{-1} D_{k-1}^T G_k, mapping level k to level k-1.
inline Mat adjoint_differential(const ComplexRep& rep, int k) {
  if (k < 1 || k > rep.top())
    throw std::out_of_range("adjoint_differential: level " + std::to_string(k) + " not in [1, " +
                            std::to_string(rep.top()) + "]");
  require_valid(rep);
  const Mat g_lo = rep.dense_gram(k - 1);
  const Mat rhs = rep.dense_diff(k - 1).transpose() * rep.dense_gram(k);
  return g_lo.llt().solve(rhs);
}

enum class Route { automatic, dense, sparse };

namespace detail {

inline bool use_dense(const ComplexRep& rep, int k, Route route) {
  if (route == Route::dense) return true;
  if (route == Route::sparse) return false;
  return rep.dim(k - 1) + rep.dim(k) + rep.dim(k + 1) <= kDenseLimit;
}

/// Symmetric mixed operator on (sigma, u) without the harmonic block,
///   [ -G_{k-1}          D_{k-1}^T G_k        ]
///   [  G_k D_{k-1}      D_k^T G_{k+1} D_k    ]
inline SpMat hodge_block(const ComplexRep& rep, int k) {
  const Eigen::Index nlo = rep.dim(k - 1);
  const Eigen::Index n = rep.dim(k);
  const SpMat glo = rep.gram(k - 1);
  const SpMat g = rep.gram(k);
  const SpMat dlo = rep.diff(k - 1);
  const SpMat d = rep.diff(k);
  std::vector<linalg::Block> blocks;
  SpMat gd, gdt, stiff;
  if (nlo > 0) {
    gd = g * dlo;
    gdt = gd.transpose();
    blocks.push_back({0, 0, &glo, -1.0});
    blocks.push_back({0, nlo, &gdt, 1.0});
    blocks.push_back({nlo, 0, &gd, 1.0});
  }
  if (d.rows() > 0) {
    stiff = d.transpose() * rep.gram(k + 1) * d;
    blocks.push_back({nlo, nlo, &stiff, 1.0});
  }
  return linalg::assemble_blocks(nlo + n, nlo + n, blocks);
}

inline Mat harmonic_dense(const ComplexRep& rep, int k) {
  const Mat g = rep.dense_gram(k);
  const Mat d = rep.dense_diff(k);
  const Mat dlo = rep.dense_diff(k - 1);
  // Z^k = ker D_k.
  Mat z = linalg::subspaces(d).kernel;
  if (z.cols() == 0) return Mat(rep.dim(k), 0);
  // Orthogonality to B^k: D_{k-1}^T G_k z = 0.
  if (dlo.cols() > 0) {
    const Mat c = dlo.transpose() * g * z;
    const Mat y = linalg::subspaces(c).kernel;
    z = z * y;
  }
  return linalg::g_orthonormalize(z, g, 1e-8);
}

/// Kernel of the symmetric Hodge block by shifted block inverse iteration
/// on the pencil (A, blockdiag(G_{k-1}, G_k)). Null vectors are (0, q) with
/// q harmonic.
inline Mat harmonic_sparse(const ComplexRep& rep, int k, std::uint64_t seed = 1234) {
  const Eigen::Index nlo = rep.dim(k - 1);
  const Eigen::Index n = rep.dim(k);
  const SpMat a = hodge_block(rep, k);
  const SpMat glo = rep.gram(k - 1);
  const SpMat g = rep.gram(k);
  const SpMat b = linalg::assemble_blocks(nlo + n, nlo + n, {{0, 0, &glo}, {nlo, nlo, &g}});
  double scale = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) scale = std::max(scale, std::abs(a.coeff(i, i)) / b.coeff(i, i));
  scale = std::max(scale, 1.0);
  const double shift = 1e-9 * scale;
  const SpMat shifted = SpMat(a - shift * b);
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success) throw std::runtime_error("harmonic_basis: factorization failed");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const Eigen::Index total = nlo + n;
  for (Eigen::Index block = 4;; block *= 2) {
    block = std::min(block, total);
    Mat x(total, block);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      for (Eigen::Index i = 0; i < total; ++i) x(i, j) = nd(rng);
    x = linalg::g_orthonormalize(x, b, 1e-12);
    for (int it = 0; it < 5; ++it) {
      Mat y(total, x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) = lu.solve(Vec(b * x.col(j)));
      x = linalg::g_orthonormalize(y, b, 1e-12);
    }
    Mat t = x.transpose() * (a * x);
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    const double null_tol = 1e-7 * scale;
    std::vector<Eigen::Index> null_idx;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i)) <= null_tol) null_idx.push_back(i);
    if (static_cast<Eigen::Index>(null_idx.size()) < x.cols() || block == total) {
      Mat q(n, static_cast<Eigen::Index>(null_idx.size()));
      for (std::size_t j = 0; j < null_idx.size(); ++j)
        q.col(static_cast<Eigen::Index>(j)) = (x * es.eigenvectors().col(null_idx[j])).tail(n);
      return linalg::g_orthonormalize(q, g, 1e-8);
    }
  }
}

}  // namespace detail

/// G_k-orthonormal basis of H^k = Z^k intersected with the orthogonal
/// complement of B^k (possibly empty).
inline Mat harmonic_basis(const ComplexRep& rep, int k, Route route = Route::automatic) {
  check_level(rep, k);
  require_valid(rep);
  if (rep.dim(k) == 0) return Mat(0, 0);
  return detail::use_dense(rep, k, route) ? detail::harmonic_dense(rep, k)
                                          : detail::harmonic_sparse(rep, k);
}

inline std::vector<int> betti_numbers(const ComplexRep& rep, Route route = Route::automatic) {
  std::vector<int> out;
  for (int k = 0; k < rep.size(); ++k)
    out.push_back(static_cast<int>(harmonic_basis(rep, k, route).cols()));
  return out;
}

/// Strong Hodge decomposition w = boundary + harmonic + coexact.
struct HodgeSplit {
  Vec boundary;
  Vec harmonic;
  Vec coexact;
};

inline HodgeSplit hodge_decompose(const ComplexRep& rep, int k, const Vec& w) {
  check_level(rep, k);
  if (w.size() != rep.dim(k))
    throw std::invalid_argument("hodge_decompose: vector length " + std::to_string(w.size()) +
                                " != " + std::to_string(rep.dim(k)));
  const Mat g = rep.dense_gram(k);
  const Mat h = harmonic_basis(rep, k);
  HodgeSplit out;
  const Mat brange = linalg::subspaces(rep.dense_diff(k - 1)).range;
  if (brange.cols() > 0) {
    const Mat gb = brange.transpose() * g;
    out.boundary = brange * (gb * brange).ldlt().solve(gb * w);
  } else {
    out.boundary = Vec::Zero(w.size());
  }
  out.harmonic = h.cols() ? Vec(h * (h.transpose() * (g * w))) : Vec(Vec::Zero(w.size()));
  out.coexact = w - out.boundary - out.harmonic;
  return out;
}

struct PoincareResult {
  double constant = 0.0;
  Vec achiever;            // attains ||v||_V = c_P ||d v||
  bool degenerate = false; // Z^{k perp} = {0}
};

/// Smallest c_P with ||v||_V <= c_P ||d v|| on the orthogonal complement of
/// the cocycles.
inline PoincareResult poincare_constant(const ComplexRep& rep, int k) {
  check_level(rep, k);
  require_valid(rep);
  PoincareResult out;
  const Mat d = rep.dense_diff(k);
  const auto sub = linalg::subspaces(d.transpose());  // range(D^T) = (ker D)^perp
  if (sub.rank == 0) {
    out.degenerate = true;
    out.achiever = Vec::Zero(rep.dim(k));
    return out;
  }
  const Mat g = rep.dense_gram(k);
  const Mat y = g.llt().solve(sub.range);  // basis of Z^{k perp_G}
  const Mat gv = Mat(rep.v_gram(k));
  Mat lhs = y.transpose() * gv * y;
  Mat rhs = y.transpose() * d.transpose() * rep.dense_gram(k + 1) * d * y;
  lhs = 0.5 * (lhs + lhs.transpose()).eval();
  rhs = 0.5 * (rhs + rhs.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lhs, rhs);
  const Eigen::Index last = es.eigenvalues().size() - 1;
  out.constant = std::sqrt(es.eigenvalues()(last));
  out.achiever = y * es.eigenvectors().col(last);
  return out;
}

/// Solution (sigma, u, p) of the mixed Hodge-Laplace problem.
struct MixedSolution {
  Vec sigma;     // level k-1
  Vec u;         // level k
  Vec p_coords;  // coordinates in `harmonic`
  Vec p;         // harmonic * p_coords
  Mat harmonic;  // G_k-orthonormal basis of H^k used for the constraint
  double residual = 0.0;
};

/// Factored mixed system
///   [ -G_{k-1}        D_{k-1}^T G_k       0     ] [sigma]   [0]
///   [  G_k D_{k-1}    D_k^T G_{k+1} D_k   G_k Q ] [u    ] = [b]
///   [  0              Q^T G_k             0     ] [p    ]   [0]
/// with Q a G_k-orthonormal harmonic basis; b is the load <f, v>.
class MixedOperator {
 public:
  MixedOperator(const ComplexRep& rep, int k, Mat harmonic)
      : rep_(&rep), k_(k), q_(std::move(harmonic)) {
    nlo_ = rep.dim(k - 1);
    n_ = rep.dim(k);
    nh_ = q_.cols();
    const SpMat hb = detail::hodge_block(rep, k);
    gq_ = Mat(rep.gram(k) * q_);
    const Eigen::Index tot = nlo_ + n_ + nh_;
    if (nh_ == 0 || tot <= kDenseLimit) {
      std::vector<Triplet> extra;
      for (Eigen::Index j = 0; j < nh_; ++j)
        for (Eigen::Index i = 0; i < n_; ++i) {
          const double v = gq_(i, j);
          if (v == 0.0) continue;
          extra.emplace_back(nlo_ + i, nlo_ + n_ + j, v);
          extra.emplace_back(nlo_ + n_ + j, nlo_ + i, v);
        }
      const SpMat a = linalg::assemble_blocks(tot, tot, {{0, 0, &hb}}, extra);
      solver_ = std::make_unique<linalg::DirectSolver>(a);
      if (!solver_->ok()) throw std::runtime_error("mixed system is singular");
      return;
    }
    // The dense harmonic border ruins sparse fill-in. Factor hb + c E E^T
    // instead, with E picking nh rows on which the harmonic block is
    // invertible, and restore the border through a small Schur system.
    Eigen::ColPivHouseholderQR<Mat> qr(Mat(q_.transpose()));
    const auto& perm = qr.colsPermutation().indices();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < hb.rows(); ++i) scale = std::max(scale, std::abs(hb.coeff(i, i)));
    if (scale == 0.0) scale = 1.0;
    pins_.resize(nh_);
    SpMat pinned = hb;
    for (Eigen::Index j = 0; j < nh_; ++j) {
      pins_[j] = nlo_ + perm(j);
      pinned.coeffRef(pins_[j], pins_[j]) += scale;
    }
    pin_scale_ = scale;
    solver_ = std::make_unique<linalg::DirectSolver>(pinned);
    if (!solver_->ok()) throw std::runtime_error("mixed system is singular");
    Mat be = Mat::Zero(nlo_ + n_, 2 * nh_);
    be.block(nlo_, 0, n_, nh_) = gq_;
    for (Eigen::Index j = 0; j < nh_; ++j) be(pins_[j], nh_ + j) = scale;
    xbe_ = solver_->solve(be);
    // unknowns (y, t): x = X_r - X_B y + X_E t, B^T x = 0, t = E^T x
    Mat s(2 * nh_, 2 * nh_);
    s.topLeftCorner(nh_, nh_) = -gq_.transpose() * xbe_.block(nlo_, 0, n_, nh_);
    s.topRightCorner(nh_, nh_) = gq_.transpose() * xbe_.block(nlo_, nh_, n_, nh_);
    for (Eigen::Index j = 0; j < nh_; ++j) {
      s.row(nh_ + j).head(nh_) = -xbe_.row(pins_[j]).head(nh_);
      s.row(nh_ + j).tail(nh_) = xbe_.row(pins_[j]).tail(nh_);
      s(nh_ + j, nh_ + j) -= 1.0;
    }
    schur_.compute(s);
  }

  const Mat& harmonic() const { return q_; }

  MixedSolution solve_load(const Vec& load) const {
    if (load.size() != n_) throw std::invalid_argument("mixed solve: load has wrong length");
    Vec x;
    Vec pc;
    if (pins_.empty()) {
      Vec rhs = Vec::Zero(nlo_ + n_ + nh_);
      rhs.segment(nlo_, n_) = load;
      const Vec full = solver_->solve(rhs);
      x = full.head(nlo_ + n_);
      pc = full.tail(nh_);
    } else {
      Vec rhs = Vec::Zero(nlo_ + n_);
      rhs.segment(nlo_, n_) = load;
      const Vec xr = solver_->solve(rhs);
      Vec c(2 * nh_);
      c.head(nh_) = -gq_.transpose() * xr.segment(nlo_, n_);
      for (Eigen::Index j = 0; j < nh_; ++j) c(nh_ + j) = -xr(pins_[j]);
      const Vec yt = schur_.solve(c);
      pc = yt.head(nh_);
      x = xr - xbe_.leftCols(nh_) * pc + xbe_.rightCols(nh_) * yt.tail(nh_);
    }
    MixedSolution s;
    s.sigma = x.head(nlo_);
    s.u = x.segment(nlo_, n_);
    s.p_coords = pc;
    s.p = nh_ ? Vec(q_ * s.p_coords) : Vec(Vec::Zero(n_));
    s.harmonic = q_;
    s.residual = residual(s, load);
    return s;
  }

  /// Max relative residual of the three variational equations.
  double residual(const MixedSolution& s, const Vec& load) const {
    const ComplexRep& rep = *rep_;
    const SpMat g = rep.gram(k_);
    const SpMat glo = rep.gram(k_ - 1);
    const SpMat dlo = rep.diff(k_ - 1);
    const SpMat d = rep.diff(k_);
    double r = 0.0;
    if (nlo_ > 0) {
      const Vec t1 = glo * s.sigma;
      const Vec t2 = dlo.transpose() * (g * s.u);
      const double sc = std::max({t1.lpNorm<Eigen::Infinity>(), t2.lpNorm<Eigen::Infinity>(),
                                  load.lpNorm<Eigen::Infinity>()});
      if (sc > 0) r = std::max(r, (t1 - t2).lpNorm<Eigen::Infinity>() / sc);
    }
    Vec t3 = g * (dlo * s.sigma);
    Vec t4 = d.rows() ? Vec(d.transpose() * (rep.gram(k_ + 1) * (d * s.u))) : Vec(Vec::Zero(n_));
    Vec t5 = g * s.p;
    const double sc2 = std::max({t3.lpNorm<Eigen::Infinity>(), t4.lpNorm<Eigen::Infinity>(),
                                 t5.lpNorm<Eigen::Infinity>(), load.lpNorm<Eigen::Infinity>()});
    if (sc2 > 0) r = std::max(r, (t3 + t4 + t5 - load).lpNorm<Eigen::Infinity>() / sc2);
    if (nh_ > 0) {
      const Vec gu = g * s.u;
      const double sc3 = std::max(gu.lpNorm<Eigen::Infinity>(), load.lpNorm<Eigen::Infinity>());
      if (sc3 > 0) r = std::max(r, (q_.transpose() * gu).lpNorm<Eigen::Infinity>() / sc3);
    }
    return r;
  }

  Eigen::Index dim() const { return n_; }

 private:
  const ComplexRep* rep_;
  int k_;
  Mat q_;
  Eigen::Index nlo_ = 0, n_ = 0, nh_ = 0;
  Mat gq_;
  std::vector<Eigen::Index> pins_;
  double pin_scale_ = 0.0;
  Mat xbe_;
  Eigen::PartialPivLU<Mat> schur_;
  std::unique_ptr<linalg::DirectSolver> solver_;
};

/// Mixed solve with an explicit load vector b_i = <f, phi_i>.
inline MixedSolution solve_mixed_load(const ComplexRep& rep, int k, const Vec& load,
                                      const Mat* harmonic = nullptr) {
  check_level(rep, k);
  require_valid(rep);
  Mat q = harmonic ? *harmonic : harmonic_basis(rep, k);
  MixedOperator op(rep, k, std::move(q));
  return op.solve_load(load);
}

inline MixedSolution solve_mixed_hodge(const ComplexRep& rep, int k, const Vec& f) {
  check_level(rep, k);
  if (f.size() != rep.dim(k)) throw std::invalid_argument("solve_mixed_hodge: f has wrong length");
  return solve_mixed_load(rep, k, rep.gram(k) * f);
}

/// Dense matrix of the mixed bilinear form B(x; y) = y^T M x over
/// (sigma, u, p_coords), together with the product graph-norm Gram.
struct MixedForm {
  Mat form;
  Mat norm;
  Mat harmonic;
};

inline MixedForm mixed_form(const ComplexRep& rep, int k, const Mat* harmonic = nullptr) {
  const Mat q = harmonic ? *harmonic : harmonic_basis(rep, k);
  const Eigen::Index nlo = rep.dim(k - 1), n = rep.dim(k), nh = q.cols();
  const Mat g = rep.dense_gram(k), glo = rep.dense_gram(k - 1);
  const Mat dlo = rep.dense_diff(k - 1), d = rep.dense_diff(k);
  const Mat ghi = rep.dense_gram(k + 1);
  MixedForm out;
  out.harmonic = q;
  const Eigen::Index tot = nlo + n + nh;
  out.form = Mat::Zero(tot, tot);
  // rows: test (tau, v, q); cols: trial (sigma, u, p)
  if (nlo > 0) {
    out.form.block(0, 0, nlo, nlo) = glo;
    out.form.block(0, nlo, nlo, n) = -dlo.transpose() * g;
    out.form.block(nlo, 0, n, nlo) = g * dlo;
  }
  if (d.rows() > 0) out.form.block(nlo, nlo, n, n) = d.transpose() * ghi * d;
  if (nh > 0) {
    out.form.block(nlo, nlo + n, n, nh) = g * q;
    out.form.block(nlo + n, nlo, nh, n) = -q.transpose() * g;
  }
  out.norm = Mat::Zero(tot, tot);
  if (nlo > 0) out.norm.block(0, 0, nlo, nlo) = Mat(rep.v_gram(k - 1));
  out.norm.block(nlo, nlo, n, n) = Mat(rep.v_gram(k));
  if (nh > 0) out.norm.block(nlo + n, nlo + n, nh, nh) = Mat::Identity(nh, nh);
  return out;
}

struct InfSup {
  double gamma = 0.0;       // smallest singular value in the product V-norm
  double continuity = 0.0;  // largest singular value
};

/// Inf-sup constant of the mixed form in the Hilbert product norm
/// sqrt(||sigma||_V^2 + ||u||_V^2 + ||p||^2).
inline InfSup infsup_lower_bound(const ComplexRep& rep, int k) {
  check_level(rep, k);
  require_valid(rep);
  const MixedForm mf = mixed_form(rep, k);
  InfSup out;
  if (mf.form.rows() == 0) return out;
  const Vec s = linalg::weighted_singular_values(mf.form, mf.norm, mf.norm.inverse());
  out.gamma = s(0);
  out.continuity = s(s.size() - 1);
  return out;
}

struct EigenResult {
  Vec eigenvalues;  // ascending, nonzero
  Mat sigma;        // columns sigma_j
  Mat u;            // columns u_j, G_k-orthonormal
  double orthonormality_defect = 0.0;
};

namespace detail {

inline EigenResult finish_eigen(const ComplexRep& rep, int k, EigenResult r) {
  const Mat ut_g_u = r.u.transpose() * (rep.gram(k) * r.u);
  r.orthonormality_defect =
      r.u.cols() ? (ut_g_u - Mat::Identity(r.u.cols(), r.u.cols())).cwiseAbs().maxCoeff() : 0.0;
  return r;
}

inline EigenResult eigen_dense(const ComplexRep& rep, int k, int nev, Eigen::Index nharm) {
  const Mat g = rep.dense_gram(k);
  const Mat d = rep.dense_diff(k);
  const Mat dlo = rep.dense_diff(k - 1);
  Mat lap = d.transpose() * rep.dense_gram(k + 1) * d;
  Mat dstar;  // d*_k
  if (dlo.cols() > 0) {
    dstar = rep.dense_gram(k - 1).llt().solve(dlo.transpose() * g);
    lap += g * dlo * dstar;
  }
  lap = 0.5 * (lap + lap.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lap, g);
  EigenResult r;
  r.eigenvalues = es.eigenvalues().segment(nharm, nev);
  r.u = es.eigenvectors().middleCols(nharm, nev);
  r.sigma = dlo.cols() > 0 ? Mat(dstar * r.u) : Mat(0, nev);
  return r;
}

inline EigenResult eigen_sparse(const ComplexRep& rep, int k, int nev, const Mat& harmonic,
                                std::uint64_t seed = 99) {
  const MixedOperator op(rep, k, harmonic);
  const SpMat g = rep.gram(k);
  const Eigen::Index n = rep.dim(k);
  const Eigen::Index m = std::min<Eigen::Index>(n - harmonic.cols(), nev + std::max(8, nev));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto project_out = [&](Mat& x) {
    if (harmonic.cols()) x -= harmonic * (harmonic.transpose() * (g * x));
  };
  Mat x(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = nd(rng);
  project_out(x);
  x = linalg::g_orthonormalize(x, g, 1e-12);
  Vec theta_prev = Vec::Zero(nev);
  Mat ritz_vecs;
  Vec theta;
  for (int it = 0; it < 400; ++it) {
    Mat y(n, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) = op.solve_load(g * x.col(j)).u;
    project_out(y);
    Mat t = x.transpose() * (g * y);
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    // descending theta = ascending lambda
    const Eigen::Index c = es.eigenvalues().size();
    theta = es.eigenvalues().reverse();
    Mat w = es.eigenvectors().rowwise().reverse();
    ritz_vecs = x * w;
    const Vec top = theta.head(nev);
    const double change = ((top - theta_prev).cwiseAbs().array() / top.cwiseAbs().array()).maxCoeff();
    theta_prev = top;
    if (it > 2 && change < 1e-13) break;
    x = linalg::g_orthonormalize(Mat(y * w), g, 1e-12);
    if (x.cols() < c) break;
  }
  EigenResult r;
  r.eigenvalues = theta.head(nev).cwiseInverse();
  r.u = linalg::g_orthonormalize(ritz_vecs.leftCols(nev), g, 1e-12);
  r.sigma = Mat(rep.dim(k - 1), nev);
  for (int j = 0; j < nev; ++j) {
    const MixedSolution s = op.solve_load(g * r.u.col(j));
    r.sigma.col(j) = r.eigenvalues(j) * s.sigma;
  }
  return r;
}

}  // namespace detail

/// Lowest nev nonzero eigenvalues of the mixed Hodge-Laplace eigenproblem.
inline EigenResult solve_hodge_eigen(const ComplexRep& rep, int k, int nev,
                                     Route route = Route::automatic) {
  check_level(rep, k);
  require_valid(rep);
  const Mat q = harmonic_basis(rep, k, route);
  const Eigen::Index available = rep.dim(k) - q.cols();
  if (nev < 0 || nev > available)
    throw std::invalid_argument("solve_hodge_eigen: nev = " + std::to_string(nev) +
                                " exceeds nonharmonic dimension " + std::to_string(available));
  if (nev == 0) return EigenResult{Vec(0), Mat(rep.dim(k - 1), 0), Mat(rep.dim(k), 0), 0.0};
  const bool dense = route == Route::dense || (route == Route::automatic && rep.dim(k) <= kDenseLimit);
  EigenResult r = dense ? detail::eigen_dense(rep, k, nev, q.cols())
                        : detail::eigen_sparse(rep, k, nev, q);
  return detail::finish_eigen(rep, k, std::move(r));
}

}  // namespace feec

#endif  // FEEC_HILBERT_COMPLEX_HPP
