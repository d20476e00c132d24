// SPDX-License-Identifier: Apache-2.0
//
// Unit tests for the abstract layer: Hilbert complexes, mixed solves,
// morphisms, crime pairs and the JSON layer. Expected values come from hand
// computations or from the dense oracles in oracles.hpp.

#include "oracles.hpp"

#include <feec/complex_io.hpp>
#include <feec/random_complex.hpp>
#include <feec/study.hpp>

#include <gtest/gtest.h>

namespace {

using feec::ComplexRep;
using feec::Mat;
using feec::Vec;

/// R^2 -> R with d = [1 1] and Euclidean Grams.
ComplexRep two_to_one() {
  Mat d(1, 2);
  d << 1, 1;
  return ComplexRep::from_dense({Mat::Identity(2, 2), Mat::Identity(1, 1)}, {d});
}

/// R -> R with d = [2].
ComplexRep scalar_two() {
  return ComplexRep::from_dense({Mat::Identity(1, 1), Mat::Identity(1, 1)}, {Mat::Constant(1, 1, 2.0)});
}

oracle::DenseLevel dense_level(const ComplexRep& rep, int k) {
  oracle::DenseLevel l;
  l.g_lo = rep.dense_gram(k - 1);
  l.g = rep.dense_gram(k);
  l.g_hi = rep.dense_gram(k + 1);
  l.d_lo = rep.dense_diff(k - 1);
  l.d = rep.dense_diff(k);
  return l;
}

double rel_diff(const Vec& a, const Vec& b) {
  const double s = std::max({a.norm(), b.norm(), 1.0});
  return a.size() == 0 ? 0.0 : (a - b).norm() / s;
}

// ---------------------------------------------------------------- hilbert_complex

TEST(HilbertComplex, ValidateAcceptsAndReports) {
  EXPECT_TRUE(feec::validate(two_to_one()).valid);
  Mat d0(1, 1), d1(1, 1);
  d0 << 1;
  d1 << 1;
  const ComplexRep bad = ComplexRep::from_dense({Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1)}, {d0, d1});
  const auto rep = feec::validate(bad);
  EXPECT_FALSE(rep.valid);
  EXPECT_NE(rep.message.find("d o d"), std::string::npos);
  EXPECT_THROW(feec::require_valid(bad), std::invalid_argument);
  Mat g(2, 2);
  g << 1, 0, 0, -1;
  EXPECT_FALSE(feec::validate(ComplexRep::from_dense({g}, {})).valid);
}

TEST(HilbertComplex, ShapeMismatchRejected) {
  const ComplexRep bad = ComplexRep::from_dense({Mat::Identity(2, 2), Mat::Identity(2, 2)}, {Mat::Identity(3, 2)});
  EXPECT_FALSE(feec::validate(bad).valid);
  EXPECT_THROW(feec::require_valid(bad), std::invalid_argument);
}

TEST(HilbertComplex, BettiNumbersHandCases) {
  EXPECT_EQ(feec::betti_numbers(two_to_one()), (std::vector<int>{1, 0}));
  EXPECT_EQ(feec::betti_numbers(scalar_two()), (std::vector<int>{0, 0}));
  const ComplexRep single = ComplexRep::from_dense({Mat::Identity(3, 3)}, {});
  EXPECT_EQ(feec::betti_numbers(single), (std::vector<int>{3}));
}

TEST(HilbertComplex, HodgeDecompositionHandCase) {
  Vec w(2);
  w << 1, 0;
  const auto s = feec::hodge_decompose(two_to_one(), 0, w);
  EXPECT_NEAR(s.harmonic(0), 0.5, 1e-14);
  EXPECT_NEAR(s.harmonic(1), -0.5, 1e-14);
  EXPECT_NEAR(s.coexact(0), 0.5, 1e-14);
  EXPECT_NEAR(s.coexact(1), 0.5, 1e-14);
  EXPECT_LT(s.boundary.norm(), 1e-14);
}

TEST(HilbertComplex, HodgeDecompositionRandomOrthogonality) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ComplexRep rep = feec::random::random_complex(seed, 4, 6);
    feec::random::Rng rng(seed);
    for (int k = 0; k < rep.size(); ++k) {
      const Vec w = feec::random::gaussian(rng, rep.dim(k));
      const auto s = feec::hodge_decompose(rep, k, w);
      const Mat g = rep.dense_gram(k);
      const double n2 = w.dot(g * w);
      EXPECT_LT((s.boundary + s.harmonic + s.coexact - w).norm() / w.norm(), 1e-10);
      EXPECT_LT(std::abs(s.boundary.dot(g * s.harmonic)) / n2, 1e-10);
      EXPECT_LT(std::abs(s.boundary.dot(g * s.coexact)) / n2, 1e-10);
      EXPECT_LT(std::abs(s.harmonic.dot(g * s.coexact)) / n2, 1e-10);
      // boundary part is in range d, harmonic part is closed
      EXPECT_LT((rep.dense_diff(k) * s.harmonic).norm(), 1e-9 * (1.0 + w.norm()));
    }
  }
}

TEST(HilbertComplex, PoincareConstantHandCases) {
  // ||v||_V^2 = v^2 + 4 v^2, ||dv|| = 2|v|
  EXPECT_NEAR(feec::poincare_constant(scalar_two(), 0).constant, std::sqrt(5.0) / 2.0, 1e-12);
  // Z-perp spanned by (1, 1): ||v||_V^2 = 2 + 4, ||dv|| = 2
  EXPECT_NEAR(feec::poincare_constant(two_to_one(), 0).constant, std::sqrt(6.0) / 2.0, 1e-12);
  EXPECT_TRUE(feec::poincare_constant(two_to_one(), 1).degenerate);
}

TEST(HilbertComplex, MixedSolveHandCase) {
  Vec f(2);
  f << 1, 0;
  const auto s = feec::solve_mixed_hodge(two_to_one(), 0, f);
  EXPECT_NEAR(s.u(0), 0.25, 1e-13);
  EXPECT_NEAR(s.u(1), 0.25, 1e-13);
  EXPECT_NEAR(s.p(0), 0.5, 1e-13);
  EXPECT_NEAR(s.p(1), -0.5, 1e-13);
  Vec f1(1);
  f1 << 3.0;
  const auto t = feec::solve_mixed_hodge(two_to_one(), 1, f1);
  EXPECT_NEAR(t.u(0), 1.5, 1e-13);
  EXPECT_NEAR(t.sigma(0), 1.5, 1e-13);
  EXPECT_NEAR(t.sigma(1), 1.5, 1e-13);
  EXPECT_LT(t.p.norm(), 1e-14);
}

TEST(HilbertComplex, MixedSolveZeroDataAndHarmonicData) {
  const ComplexRep rep = two_to_one();
  const auto z = feec::solve_mixed_hodge(rep, 0, Vec::Zero(2));
  EXPECT_EQ(z.u.norm(), 0.0);
  Vec h(2);
  h << 1, -1;
  const auto s = feec::solve_mixed_hodge(rep, 0, h);
  EXPECT_LT(s.u.norm(), 1e-14);
  EXPECT_LT((s.p - h).norm(), 1e-14);
}

TEST(HilbertComplex, MixedSolveMatchesDenseKkt) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const ComplexRep rep = feec::random::random_complex(seed, 3 + static_cast<int>(seed % 2), 6);
    feec::random::Rng rng(seed);
    for (int k = 0; k < rep.size(); ++k) {
      const Vec f = feec::random::gaussian(rng, rep.dim(k));
      const auto lib = feec::solve_mixed_hodge(rep, k, f);
      const auto ref = oracle::kkt_solve(dense_level(rep, k), rep.dense_gram(k) * f);
      EXPECT_LT(rel_diff(lib.u, ref.u), 1e-9);
      EXPECT_LT(rel_diff(lib.sigma, ref.sigma), 1e-9);
      EXPECT_LT(rel_diff(lib.p, ref.p), 1e-9);
      EXPECT_LT(lib.residual, 1e-10);
    }
  }
}

TEST(HilbertComplex, PinnedSparseRouteMatchesBorderedRoute) {
  // a long path graph exceeds the dense limit; harmonic space = constants
  const int n = 1200;
  std::vector<feec::Triplet> t;
  for (int e = 0; e < n - 1; ++e) {
    t.emplace_back(e, e, -1.0);
    t.emplace_back(e, e + 1, 1.0);
  }
  feec::SpMat d(n - 1, n);
  d.setFromTriplets(t.begin(), t.end());
  std::vector<feec::ComplexLevel> lv(2);
  lv[0].gram = feec::linalg::sparse_identity(n);
  lv[0].diff = d;
  lv[1].gram = feec::linalg::sparse_identity(n - 1);
  const ComplexRep rep(std::move(lv));
  feec::random::Rng rng(5);
  const Vec f = feec::random::gaussian(rng, n);
  const auto s = feec::solve_mixed_hodge(rep, 0, f);
  EXPECT_LT(s.residual, 1e-9);
  EXPECT_NEAR(s.p(0), f.mean(), 1e-10);
  EXPECT_NEAR(s.u.sum() / s.u.norm(), 0.0, 1e-10);
}

TEST(HilbertComplex, InfSupHandCase) {
  const ComplexRep single = ComplexRep::from_dense({Mat::Identity(1, 1)}, {});
  const auto is = feec::infsup_lower_bound(single, 0);
  EXPECT_NEAR(is.gamma, 1.0, 1e-12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ComplexRep rep = feec::random::random_complex(seed);
    for (int k = 0; k < rep.size(); ++k) {
      const auto r = feec::infsup_lower_bound(rep, k);
      EXPECT_GT(r.gamma, 0.0);
      EXPECT_LE(r.gamma, r.continuity * (1 + 1e-12));
    }
  }
}

TEST(HilbertComplex, EigenHandCase) {
  const auto d = feec::solve_hodge_eigen(scalar_two(), 0, 1, feec::Route::dense);
  EXPECT_NEAR(d.eigenvalues(0), 4.0, 1e-12);
  EXPECT_THROW(feec::solve_hodge_eigen(scalar_two(), 0, 2), std::invalid_argument);
}

TEST(HilbertComplex, EigenDenseMatchesGeneralizedOracle) {
  const ComplexRep rep = feec::random::random_complex(3, 3, 6);
  for (int k = 0; k < rep.size(); ++k) {
    const Mat g = rep.dense_gram(k);
    const Mat a = rep.dense_diff(k).transpose() * rep.dense_gram(k + 1) * rep.dense_diff(k);
    Mat lap = a;
    if (k > 0) {
      const Mat dlo = rep.dense_diff(k - 1);
      lap += g * dlo * rep.dense_gram(k - 1).inverse() * dlo.transpose() * g;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lap, g);
    std::vector<double> nz;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > 1e-9) nz.push_back(es.eigenvalues()(i));
    if (nz.empty()) continue;
    const int nev = std::min<int>(3, static_cast<int>(nz.size()));
    const auto r = feec::solve_hodge_eigen(rep, k, nev, feec::Route::dense);
    for (int j = 0; j < nev; ++j) EXPECT_NEAR(r.eigenvalues(j), nz[j], 1e-8 * nz[j]);
  }
}

// ---------------------------------------------------------------- crime_machinery

TEST(Crime, RandomPairsAreValid) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    feec::random::PairOptions o;
    o.epsilon = seed % 2 ? 0.05 : 0.0;
    o.extra_cohomology = seed % 3 == 0;
    const auto pair = feec::random::random_pair(seed, o);
    const auto d = feec::check_pair(pair);
    EXPECT_TRUE(d.valid) << d.message;
    for (int k = 0; k < pair.size(); ++k)
      EXPECT_LT((pair.proj(k) * pair.inj(k) - Mat::Identity(pair.inj(k).cols(), pair.inj(k).cols())).norm(), 1e-12);
  }
}

TEST(Crime, NonCommutingMapRejected) {
  auto pair = feec::random::random_pair(4);
  pair.injection.maps[0](0, 0) += 0.5;
  EXPECT_FALSE(feec::check_pair(pair).valid);
  EXPECT_THROW(feec::require_pair(pair), std::invalid_argument);
}

TEST(Crime, AdjointInjectionIdentity) {
  const auto pair = feec::random::random_pair(9, {.epsilon = 0.1});
  feec::random::Rng rng(1);
  for (int k = 0; k < pair.size(); ++k) {
    const Vec f = feec::random::gaussian(rng, pair.truth().dim(k));
    const Vec v = feec::random::gaussian(rng, pair.approx().dim(k));
    const Vec a = feec::adjoint_injection(pair, k, f);
    const double lhs = a.dot(pair.approx().dense_gram(k) * v);
    const double rhs = f.dot(pair.truth().dense_gram(k) * (pair.inj(k) * v));
    EXPECT_NEAR(lhs, rhs, 1e-11 * (1.0 + std::abs(rhs)));
  }
}

TEST(Crime, ScaledInjectionJacobian) {
  for (double c : {0.5, 0.9, 1.1, 2.0}) {
    feec::random::PairOptions o;
    o.scale = c;
    o.coupling = 0.0;
    const auto pair = feec::random::random_pair(11, o);
    // with no coupling the true Gram restricted to A is the approximating Gram
    for (int k = 0; k < pair.size(); ++k) EXPECT_NEAR(feec::jacobian(pair, k).deviation, std::abs(1 - c * c), 1e-10);
  }
}

TEST(Crime, CrimeFreePairHasZeroCrimeTerms) {
  const auto pair = feec::random::random_pair(21);
  feec::random::Rng rng(2);
  for (int k = 0; k < pair.size(); ++k) {
    const Vec f = feec::random::gaussian(rng, pair.truth().dim(k));
    const auto r = feec::crime_report(pair, k, f);
    EXPECT_EQ(r.data_error, 0.0);
    EXPECT_EQ(r.geometry_error, 0.0);
    EXPECT_EQ(r.intermediate, 0.0);
  }
}

TEST(Crime, ModifiedMatchesImageSubcomplexOracle) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const auto pair = feec::random::random_pair(seed, {.epsilon = 0.05, .scale = 1.3});
    feec::random::Rng rng(seed);
    const auto& tr = pair.truth();
    for (int k = 0; k < pair.size(); ++k) {
      const Vec f = feec::random::gaussian(rng, tr.dim(k));
      const auto lib = feec::solve_modified_mixed(pair, k, f);
      oracle::ImageLevelData d;
      d.g_true_lo = tr.dense_gram(k - 1);
      d.g_true = tr.dense_gram(k);
      d.g_true_hi = tr.dense_gram(k + 1);
      d.d_true_lo = tr.dense_diff(k - 1);
      d.d_true = tr.dense_diff(k);
      d.i_lo = k > 0 ? pair.inj(k - 1) : Mat(tr.dim(k - 1), 0);
      d.i = pair.inj(k);
      d.i_hi = k + 1 < pair.size() ? pair.inj(k + 1) : Mat(0, 0);
      const auto ref = oracle::image_solve(d, f);
      EXPECT_LT(rel_diff(pair.inj(k) * lib.u, ref.u), 1e-9);
      EXPECT_LT(rel_diff(pair.inj(k) * lib.p, ref.p), 1e-9);
      if (k > 0) EXPECT_LT(rel_diff(pair.inj(k - 1) * lib.sigma, ref.sigma), 1e-9);
    }
  }
}

TEST(Crime, MuGapZeroForIdentityPair) {
  auto rep = std::make_shared<const ComplexRep>(feec::random::random_complex(5));
  feec::CrimePair pair;
  pair.true_complex = rep;
  pair.approx_complex = rep;
  pair.injection = {rep, rep, {}};
  pair.projection = {rep, rep, {}};
  for (int k = 0; k < rep->size(); ++k) {
    pair.injection.maps.push_back(Mat::Identity(rep->dim(k), rep->dim(k)));
    pair.projection.maps.push_back(Mat::Identity(rep->dim(k), rep->dim(k)));
  }
  for (int k = 0; k < pair.size(); ++k) {
    EXPECT_LT(feec::mu_gap(pair, k), 1e-12);
    EXPECT_EQ(feec::jacobian(pair, k).deviation, 0.0);
  }
}

TEST(Crime, MuGapBoundedByProjectionDefect) {
  const auto pair = feec::random::random_pair(5, {.epsilon = 0.1, .extra_cohomology = true});
  for (int k = 0; k < pair.size(); ++k) {
    const Mat g = pair.truth().dense_gram(k);
    const Mat e = Mat::Identity(g.rows(), g.rows()) - pair.inj(k) * pair.proj(k);
    EXPECT_LE(feec::mu_gap(pair, k), feec::linalg::operator_norm(e, g, g) * (1 + 1e-10));
  }
}

TEST(Crime, CohomologyInapplicableIsNotViolation) {
  int inapplicable = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pair = feec::random::random_pair(seed, {.extra_cohomology = true});
    for (const auto& c : feec::cohomology_isomorphism_check(pair)) {
      EXPECT_FALSE(c.violated);
      if (c.dim_true != c.dim_approx) {
        EXPECT_FALSE(c.hypothesis);
        ++inapplicable;
      }
    }
  }
  EXPECT_GT(inapplicable, 0);
}

TEST(Crime, DiscretePoincareUnderScaling) {
  for (double c : {0.5, 0.9, 1.1, 2.0}) {
    feec::random::PairOptions o;
    o.scale = c;
    const auto pair = feec::random::random_pair(17, o);
    for (int k = 0; k < pair.size(); ++k) {
      const auto r = feec::discrete_poincare_check(pair, k);
      if (r.degenerate) continue;
      EXPECT_FALSE(r.violated);
      EXPECT_LE(r.measured, r.bound * (1 + 1e-9));
    }
  }
}

TEST(Crime, ProjectionDataIsometricAdjointIsExact) {
  const auto pair = feec::random::random_pair(8);
  feec::random::Rng rng(3);
  for (int k = 0; k < pair.size(); ++k) {
    const Mat& i = pair.inj(k);
    const Mat g = pair.truth().dense_gram(k);
    const Mat pi = pair.approx().dense_gram(k).llt().solve(i.transpose() * g);
    const Vec f = feec::random::gaussian(rng, g.rows());
    const auto r = feec::projection_data(pair, k, pi, f);
    EXPECT_LT(r.lhs, 1e-10);
    EXPECT_FALSE(r.violated);
  }
}

TEST(Crime, PerturbationSweepSlope) {
  const auto pts = feec::perturbation_sweep(3, 1, {1e-1, 1e-2, 1e-3, 1e-4, 0.0});
  EXPECT_GE(feec::sweep_slope(pts), 0.9);
  EXPECT_EQ(pts.back().intermediate, 0.0);
}

TEST(Crime, EigenCrimeFreeSpectraAgree) {
  const auto pair = feec::random::random_pair(12);
  const auto r = feec::eigen_convergence_report(pair, 1, 2);
  EXPECT_LT((r.lambda_h - r.lambda_mod).cwiseAbs().maxCoeff(), 1e-10 * r.lambda_h.cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------- io and battery

TEST(Io, ComplexRoundTrip) {
  const ComplexRep rep = feec::random::random_complex(2);
  const ComplexRep back = feec::io::complex_from_json(feec::io::json::parse(feec::io::to_json(rep).dump()));
  ASSERT_EQ(back.size(), rep.size());
  for (int k = 0; k < rep.size(); ++k) {
    EXPECT_EQ((back.dense_gram(k) - rep.dense_gram(k)).norm(), 0.0);
    EXPECT_EQ((back.dense_diff(k) - rep.dense_diff(k)).norm(), 0.0);
  }
}

TEST(Io, CrimeReportFieldNames) {
  const auto j = feec::io::to_json(feec::CrimeReport{});
  for (const char* key : {"lhs", "best_approx", "data_error", "geometry_error", "mu", "ratio"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Battery, SmallRunIsCleanAndDeterministic) {
  const auto a = feec::run_abstract_battery(7, 12);
  const auto b = feec::run_abstract_battery(7, 12);
  EXPECT_EQ(a.total_violations(), 0);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_LE(a.max_total_dim, 40);
  EXPECT_THROW(feec::run_abstract_battery(7, 0), std::invalid_argument);
}

TEST(Rates, FitRateOnSyntheticData) {
  std::vector<double> h{1, 0.5, 0.25, 0.125}, e;
  for (double x : h) e.push_back(3.0 * x * x);
  EXPECT_NEAR(feec::fit_rate(h, e), 2.0, 1e-12);
  EXPECT_EQ(feec::fit_rate(h, {0, 0, 0, 0}), 0.0);
}

}  // namespace
