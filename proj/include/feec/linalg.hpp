// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_LINALG_HPP
#define FEEC_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace feec {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

/// Above this many unknowns the sparse code paths are used.
inline constexpr Eigen::Index kDenseLimit = 800;

namespace linalg {

/// Orthonormal bases of the range and kernel of a dense matrix, obtained
/// from a singular value decomposition thresholded at tol * sigma_max.
struct Subspaces {
  Eigen::Index rank = 0;
  Mat range;   // rows x rank
  Mat kernel;  // cols x (cols - rank)
  Vec singular_values;
};

inline Subspaces subspaces(const Mat& a, double rel_tol = kRankTolerance) {
  Subspaces out;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (m == 0 || n == 0) {
    out.range = Mat(m, 0);
    out.kernel = Mat::Identity(n, n);
    return out;
  }
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
  Eigen::Index r = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
      if (out.singular_values(i) > rel_tol * smax) ++r;
  }
  out.rank = r;
  out.range = svd.matrixU().leftCols(r);
  out.kernel = svd.matrixV().rightCols(n - r);
  return out;
}

/// Modified Gram-Schmidt in the inner product <x, y> = x^T g y with one
/// reorthogonalization pass. Columns whose norm collapses below
/// drop_tol * (original norm) are discarded.
inline Mat g_orthonormalize(const Mat& x, const Mat& g, double drop_tol = 1e-10) {
  std::vector<Vec> kept;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vec v = x.col(j);
    const double n0 = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : kept) v -= q.dot(g * v) * q;
    }
    const double n1 = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (n1 <= drop_tol * n0) continue;
    kept.push_back(v / n1);
  }
  Mat out(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

/// Same as above for a sparse inner-product matrix.
inline Mat g_orthonormalize(const Mat& x, const SpMat& g, double drop_tol = 1e-10) {
  std::vector<Vec> kept;
  std::vector<Vec> gkept;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vec v = x.col(j);
    const double n0 = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < kept.size(); ++i) v -= gkept[i].dot(v) * kept[i];
    }
    Vec gv = g * v;
    const double n1 = std::sqrt(std::max(0.0, v.dot(gv)));
    if (n1 <= drop_tol * n0) continue;
    kept.push_back(v / n1);
    gkept.push_back(gv / n1);
  }
  Mat out(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

/// Largest value of ||a x||_{g_dst} / ||x||_{g_src}.
inline double operator_norm(const Mat& a, const Mat& g_src, const Mat& g_dst) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Mat lhs = a.transpose() * g_dst * a;
  lhs = 0.5 * (lhs + lhs.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lhs, g_src, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Extreme singular values of a between weighted spaces: returns the
/// singular values of chol(g_dst)^T a chol(g_src)^{-T}, ascending.
inline Vec weighted_singular_values(const Mat& a, const Mat& g_src, const Mat& g_dst) {
  Eigen::LLT<Mat> ls(g_src);
  Eigen::LLT<Mat> ld(g_dst);
  Mat l_src = ls.matrixL();
  Mat l_dst = ld.matrixL();
  // ||a x||_{dst} = ||L_dst^T a x||, x = L_src^{-T} y.
  Mat w = l_dst.transpose() * a;
  Mat wt = l_src.triangularView<Eigen::Lower>().solve(w.transpose());
  Eigen::BDCSVD<Mat> svd(wt.transpose());
  Vec s = svd.singularValues();
  std::sort(s.data(), s.data() + s.size());
  return s;
}

inline double frobenius(const SpMat& a) { return a.norm(); }

inline double max_abs(const SpMat& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline SpMat sparse_identity(Eigen::Index n) {
  SpMat i(n, n);
  i.setIdentity();
  return i;
}

/// Places the listed blocks into one sparse matrix. Each entry is
/// (row offset, col offset, block).
struct Block {
  Eigen::Index row;
  Eigen::Index col;
  const SpMat* block;
  double scale = 1.0;
};

inline SpMat assemble_blocks(Eigen::Index rows, Eigen::Index cols, const std::vector<Block>& blocks,
                             const std::vector<Triplet>& extra = {}) {
  std::vector<Triplet> trip(extra);
  for (const Block& b : blocks) {
    for (int k = 0; k < b.block->outerSize(); ++k)
      for (SpMat::InnerIterator it(*b.block, k); it; ++it)
        trip.emplace_back(b.row + it.row(), b.col + it.col(), b.scale * it.value());
  }
  SpMat out(rows, cols);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

/// Extreme eigenvalues of the symmetric pencil (a, b), b SPD, by Lanczos
/// in the b inner product with full reorthogonalization.
struct ExtremeEigen {
  double min = 0.0;
  double max = 0.0;
};

inline ExtremeEigen lanczos_extremes(const SpMat& a, const SpMat& b, int steps = 160,
                                     std::uint64_t seed = 7) {
  const Eigen::Index n = a.rows();
  ExtremeEigen out;
  if (n == 0) return out;
  Eigen::SimplicialLLT<SpMat> chol(b);
  if (chol.info() != Eigen::Success) throw std::runtime_error("lanczos: pencil matrix not SPD");
  const int m = static_cast<int>(std::min<Eigen::Index>(steps, n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = nd(rng);
  q /= std::sqrt(q.dot(b * q));
  std::vector<Vec> qs;
  std::vector<Vec> bqs;
  Vec alpha = Vec::Zero(m);
  Vec beta = Vec::Zero(m);
  int used = 0;
  for (int j = 0; j < m; ++j) {
    qs.push_back(q);
    bqs.push_back(b * q);
    Vec w = chol.solve(a * q);
    alpha(j) = w.dot(bqs.back());
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < qs.size(); ++i) w -= bqs[i].dot(w) * qs[i];
    used = j + 1;
    const double bn = std::sqrt(std::max(0.0, w.dot(b * w)));
    if (j + 1 < m) beta(j) = bn;
    if (bn < 1e-14 * (std::abs(alpha(j)) + 1.0)) break;
    q = w / bn;
  }
  Mat t = Mat::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    t(j, j) = alpha(j);
    if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(t, Eigen::EigenvaluesOnly);
  out.min = es.eigenvalues().minCoeff();
  out.max = es.eigenvalues().maxCoeff();
  return out;
}

/// Dense or sparse direct solver for a general square system, chosen by size.
class DirectSolver {
 public:
  explicit DirectSolver(const SpMat& a) : n_(a.rows()) {
    if (n_ <= kDenseLimit) {
      dense_ = Mat(a);
      lu_.compute(dense_);
      ok_ = n_ == 0 || lu_.rcond() > 1e-14;
      use_dense_ = true;
    } else {
      sparse_.analyzePattern(a);
      sparse_.factorize(a);
      ok_ = sparse_.info() == Eigen::Success;
    }
  }
  bool ok() const { return ok_; }
  Vec solve(const Vec& b) const {
    if (use_dense_) return lu_.solve(b);
    return sparse_.solve(b);
  }
  Mat solve(const Mat& b) const {
    if (use_dense_) return lu_.solve(b);
    Mat out(b.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      out.col(j) = sparse_.solve(Vec(b.col(j)));
    return out;
  }

 private:
  Eigen::Index n_;
  bool use_dense_ = false;
  bool ok_ = false;
  Mat dense_;
  Eigen::PartialPivLU<Mat> lu_;
  mutable Eigen::SparseLU<SpMat> sparse_;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double d = static_cast<double>(n) * sxx - sx * sx;
  return (static_cast<double>(n) * sxy - sx * sy) / d;
}

}  // namespace linalg
}  // namespace feec

#endif  // FEEC_LINALG_HPP
