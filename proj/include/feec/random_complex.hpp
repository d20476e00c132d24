// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_RANDOM_COMPLEX_HPP
#define FEEC_RANDOM_COMPLEX_HPP

#include <feec/crime.hpp>

#include <random>

namespace feec::random {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
inline int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

inline Mat gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Vec gaussian(Rng& rng, Eigen::Index n) { return gaussian(rng, n, 1).col(0); }

/// Q diag(lambda) Q^T with lambda log-uniform in [1, cond].
inline Mat spd(Rng& rng, Eigen::Index n, double cond = 100.0) {
  if (n == 0) return Mat(0, 0);
  Eigen::HouseholderQR<Mat> qr(gaussian(rng, n, n));
  const Mat q = qr.householderQ();
  Vec lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam(i) = std::exp(uniform(rng, 0.0, std::log(cond)));
  Mat g = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (g + g.transpose());
}

/// Integer unimodular matrix and its integer inverse.
struct Unimodular {
  Mat u;
  Mat inv;
};

inline Unimodular unimodular(Rng& rng, Eigen::Index n, int ops) {
  Unimodular out{Mat::Identity(n, n), Mat::Identity(n, n)};
  if (n < 2) return out;
  for (int t = 0; t < ops; ++t) {
    const int i = uniform_int(rng, 0, static_cast<int>(n) - 1);
    int j = uniform_int(rng, 0, static_cast<int>(n) - 2);
    if (j >= i) ++j;
    const double c = uniform_int(rng, 0, 1) ? 1.0 : -1.0;
    // E = I + c e_i e_j^T, E^{-1} = I - c e_i e_j^T
    out.u.row(i) += c * out.u.row(j);
    out.inv.col(j) -= c * out.inv.col(i);
  }
  return out;
}

/// Shape of a random integer complex: per level, harmonic singletons and
/// elementary pieces e_k -> c e_{k+1}.
struct Shape {
  std::vector<int> harmonic;  // singletons per level
  std::vector<int> pieces;    // pieces from level k to k+1 (size levels-1)
};

inline std::vector<Mat> integer_differentials(Rng& rng, const Shape& shape, std::vector<int>& dims) {
  const int m = static_cast<int>(shape.harmonic.size());
  dims.assign(m, 0);
  for (int k = 0; k < m; ++k) {
    dims[k] += shape.harmonic[k];
    if (k < m - 1) dims[k] += shape.pieces[k];
    if (k > 0) dims[k] += shape.pieces[k - 1];
  }
  // layout per level: [incoming piece targets | outgoing piece sources | singletons]
  std::vector<Mat> d(std::max(m - 1, 0));
  for (int k = 0; k + 1 < m; ++k) {
    d[k] = Mat::Zero(dims[k + 1], dims[k]);
    const int src0 = k > 0 ? shape.pieces[k - 1] : 0;
    for (int p = 0; p < shape.pieces[k]; ++p) {
      static const double coef[3] = {1.0, -1.0, 2.0};
      d[k](p, src0 + p) = coef[uniform_int(rng, 0, 2)];
    }
  }
  std::vector<Unimodular> u;
  for (int k = 0; k < m; ++k) u.push_back(unimodular(rng, dims[k], 2 * dims[k]));
  for (int k = 0; k + 1 < m; ++k) d[k] = u[k + 1].u * d[k] * u[k].inv;
  return d;
}

inline Shape random_shape(Rng& rng, int levels, int max_level_dim, bool cohomology) {
  Shape s;
  s.harmonic.assign(levels, 0);
  s.pieces.assign(std::max(levels - 1, 0), 0);
  for (int k = 0; k + 1 < levels; ++k) s.pieces[k] = uniform_int(rng, 0, std::max(1, max_level_dim / 2));
  if (cohomology)
    for (int k = 0; k < levels; ++k) s.harmonic[k] = uniform_int(rng, 0, 1);
  // keep every level nonempty
  for (int k = 0; k < levels; ++k) {
    int d = s.harmonic[k] + (k + 1 < levels ? s.pieces[k] : 0) + (k > 0 ? s.pieces[k - 1] : 0);
    if (d == 0) s.harmonic[k] = 1;
  }
  return s;
}

struct PairOptions {
  int levels = 3;
  int approx_level_dim = 6;   // rough per-level size of the approximating complex
  int extra_level_dim = 4;    // rough per-level size of the complement
  double epsilon = 0.0;       // perturbation I + eps K with max_k ||K_k|| = 1
  double scale = 1.0;         // i_h = scale [I; 0] (I + eps K)
  double coupling = 0.3;      // off-diagonal true-Gram coupling
  bool extra_cohomology = false;
  double cond = 100.0;
};

/// Random CrimePair: approximating complex A, true complex A (+) E with a
/// coupled Gram, injection scale [I; 0](I + eps K) with K null-homotopic and
/// projection (I + eps K)^{-1} [I, H_c] / scale with H_c null-homotopic.
inline CrimePair random_pair(std::uint64_t seed, const PairOptions& opt = {}) {
  Rng rng(seed);
  const int m = opt.levels;
  std::vector<int> da, de;
  const std::vector<Mat> d_a = integer_differentials(rng, random_shape(rng, m, opt.approx_level_dim, true), da);
  const std::vector<Mat> d_e =
      integer_differentials(rng, random_shape(rng, m, opt.extra_level_dim, opt.extra_cohomology), de);

  std::vector<Mat> g_a(m), g_t(m), d_t(std::max(m - 1, 0));
  for (int k = 0; k < m; ++k) {
    g_a[k] = spd(rng, da[k], opt.cond);
    const Mat g_e = spd(rng, de[k], opt.cond);
    const Mat c = opt.coupling * gaussian(rng, da[k], de[k]) * std::sqrt(g_a[k].norm() / std::max(1, da[k]));
    const Mat schur = g_e + c.transpose() * g_a[k].llt().solve(c);
    g_t[k] = Mat(da[k] + de[k], da[k] + de[k]);
    g_t[k] << g_a[k], c, c.transpose(), schur;
    g_t[k] = 0.5 * (g_t[k] + g_t[k].transpose()).eval();
  }
  for (int k = 0; k + 1 < m; ++k) {
    d_t[k] = Mat::Zero(da[k + 1] + de[k + 1], da[k] + de[k]);
    d_t[k].topLeftCorner(da[k + 1], da[k]) = d_a[k];
    d_t[k].bottomRightCorner(de[k + 1], de[k]) = d_e[k];
  }
  auto approx = std::make_shared<const ComplexRep>(ComplexRep::from_dense(g_a, d_a));
  auto truth = std::make_shared<const ComplexRep>(ComplexRep::from_dense(g_t, d_t));

  auto dA = [&](int k) { return approx->dense_diff(k); };
  auto dE = [&](int k) {
    if (k < 0) return Mat(de[0], 0);
    if (k >= m - 1) return Mat(0, de[k]);
    return d_e[k];
  };
  // null-homotopic K_k = D_{k-1} H_k + H_{k+1} D_k on A, H_k: A^k -> A^{k-1}
  std::vector<Mat> h(m + 1);
  for (int k = 0; k <= m; ++k) {
    const int rows = k - 1 >= 0 && k - 1 < m ? da[k - 1] : 0;
    const int cols = k < m ? da[k] : 0;
    h[k] = gaussian(rng, rows, cols);
  }
  std::vector<Mat> kk(m);
  double kmax = 0.0;
  for (int k = 0; k < m; ++k) {
    kk[k] = Mat::Zero(da[k], da[k]);
    if (k > 0) kk[k] += dA(k - 1) * h[k];
    if (k + 1 < m) kk[k] += h[k + 1] * dA(k);
    kmax = std::max(kmax, linalg::operator_norm(kk[k], g_a[k], g_a[k]));
  }
  if (kmax > 0.0)
    for (auto& x : kk) x /= kmax;

  // null-homotopic chain map H_c: E -> A, H_c^k = D_A L_k + L_{k+1} D_E with L_k: E^k -> A^{k-1}
  std::vector<Mat> l(m + 1);
  for (int k = 0; k <= m; ++k) {
    const int rows = k - 1 >= 0 && k - 1 < m ? da[k - 1] : 0;
    const int cols = k < m ? de[k] : 0;
    l[k] = 0.5 * gaussian(rng, rows, cols);
  }

  CrimePair pair;
  pair.true_complex = truth;
  pair.approx_complex = approx;
  pair.injection = {approx, truth, {}};
  pair.projection = {truth, approx, {}};
  for (int k = 0; k < m; ++k) {
    const Mat pert = Mat::Identity(da[k], da[k]) + opt.epsilon * kk[k];
    Mat emb = Mat::Zero(da[k] + de[k], da[k]);
    emb.topRows(da[k]) = Mat::Identity(da[k], da[k]);
    pair.injection.maps.push_back(opt.epsilon == 0.0 ? Mat(opt.scale * emb) : Mat(opt.scale * emb * pert));

    Mat hc = Mat::Zero(da[k], de[k]);
    if (k > 0) hc += dA(k - 1) * l[k];
    if (k + 1 < m) hc += l[k + 1] * dE(k);
    Mat left(da[k], da[k] + de[k]);
    left << Mat::Identity(da[k], da[k]), hc;
    Mat p = opt.epsilon == 0.0 ? left : Mat(pert.partialPivLu().solve(left));
    pair.projection.maps.push_back(p / opt.scale);
  }
  return pair;
}

/// Random complex (approximating half of a random pair) for single-complex tests.
inline ComplexRep random_complex(std::uint64_t seed, int levels = 3, int level_dim = 6) {
  PairOptions opt;
  opt.levels = levels;
  opt.approx_level_dim = level_dim;
  return random_pair(seed, opt).approx();
}

/// Projection Pi with Pi o I = id: Pi = P + Z (I - I P).
inline Mat random_left_inverse(Rng& rng, const Mat& i, const Mat& p, double scale = 0.5) {
  const Mat z = scale * gaussian(rng, i.cols(), i.rows());
  return p + z * (Mat::Identity(i.rows(), i.rows()) - i * p);
}

}  // namespace feec::random

#endif  // FEEC_RANDOM_COMPLEX_HPP
