// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_STUDY_HPP
#define FEEC_STUDY_HPP

#include <feec/complex_io.hpp>
#include <feec/exact_solutions.hpp>
#include <feec/random_complex.hpp>

#include <iomanip>
#include <map>

namespace feec {

enum class DataMode { eigen, zero, constant };

struct StudyConfig {
  std::string surface = "sphere";
  int k = 0;
  int s = 1;            // geometry degree
  bool exact_geometry = false;
  int r = 1;            // element degree
  int levels = 4;
  int first_level = 0;
  int ell = 2;
  int quad_degree = 6;
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "csv";
  DataMode data = DataMode::eigen;
  int nev = 6;
  int trials = 100;

  GeometryMode geometry() const {
    if (exact_geometry) return GeometryMode::exact;
    return s == 2 ? GeometryMode::quadratic : GeometryMode::affine;
  }
  Family family() const { return r == 2 ? Family::lagrange2 : Family::whitney; }
  int last_level() const { return first_level + levels - 1; }

  void validate() const {
    if (surface != "sphere" && surface != "torus") throw std::invalid_argument("surface must be sphere or torus");
    if (k < 0 || k > 2) throw std::invalid_argument("k must be 0, 1 or 2");
    if (s != 1 && s != 2) throw std::invalid_argument("s must be 1 or 2");
    if (r != 1 && r != 2) throw std::invalid_argument("r must be 1 or 2");
    if (r == 2 && k != 0) throw std::invalid_argument("r = 2 is only available for k = 0");
    if (surface == "torus" && (s != 1 || r != 1)) throw std::invalid_argument("torus supports s = 1, r = 1 only");
    if (levels < 1) throw std::invalid_argument("levels must be positive");
    if (first_level < 0) throw std::invalid_argument("first level must be nonnegative");
    if (ell < 1 || ell > 3) throw std::invalid_argument("ell must be 1, 2 or 3");
    if (quad_degree < 2 * s) throw std::invalid_argument("quad_degree must be at least 2s");
    if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
  }
};

/// Least-squares log-log slope over the finest max(3, n - 1) points; 0 for
/// identically zero columns.
inline double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t use = std::min(n, std::max<std::size_t>(3, n - 1));
  std::vector<double> x, y;
  bool all_zero = true;
  for (std::size_t i = n - use; i < n; ++i) {
    if (err[i] != 0.0) all_zero = false;
    x.push_back(h[i]);
    y.push_back(err[i]);
  }
  if (all_zero) return 0.0;
  for (double v : y)
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return linalg::loglog_slope(x, y);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

/// Refinement study table.
struct RateTable {
  static inline const std::vector<std::string> columns{"level",        "h",           "l2_u",
                                                        "graph_u",      "l2_sigma",    "graph_sigma",
                                                        "l2_p",         "jacobian_deviation", "data_error"};
  struct Row {
    int level = 0;
    double h = 0.0, l2_u = 0.0, graph_u = 0.0, l2_sigma = 0.0, graph_sigma = 0.0, l2_p = 0.0;
    double jacobian_deviation = 0.0, data_error = 0.0;
    double crime_intermediate = 0.0;
    double residual = 0.0;
    double value(const std::string& c) const {
      if (c == "h") return h;
      if (c == "l2_u") return l2_u;
      if (c == "graph_u") return graph_u;
      if (c == "l2_sigma") return l2_sigma;
      if (c == "graph_sigma") return graph_sigma;
      if (c == "l2_p") return l2_p;
      if (c == "jacobian_deviation") return jacobian_deviation;
      if (c == "data_error") return data_error;
      if (c == "crime_intermediate") return crime_intermediate;
      if (c == "level") return level;
      throw std::invalid_argument("unknown column " + c);
    }
  };
  std::vector<Row> rows;

  std::vector<double> column(const std::string& c) const {
    std::vector<double> v;
    for (const Row& r : rows) v.push_back(r.value(c));
    return v;
  }
  double rate(const std::string& c) const { return fit_rate(column("h"), column(c)); }
  bool monotone(const std::string& c) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].value(c) > rows[i - 1].value(c)) return false;
    return true;
  }
  std::map<std::string, double> fitted() const {
    std::map<std::string, double> f;
    for (std::size_t i = 2; i < columns.size(); ++i) f[columns[i]] = rate(columns[i]);
    f["crime_intermediate"] = rate("crime_intermediate");
    return f;
  }

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const Row& r : rows) {
      os << r.level;
      for (std::size_t i = 1; i < columns.size(); ++i) os << "," << format_double(r.value(columns[i]));
      os << "\n";
    }
    return os.str();
  }

  io::json to_json() const {
    io::json rs = io::json::array();
    for (const Row& r : rows) {
      io::json j;
      for (const auto& c : columns) j[c] = c == "level" ? io::json(r.level) : io::json(r.value(c));
      j["crime_intermediate"] = r.crime_intermediate;
      j["residual"] = r.residual;
      rs.push_back(j);
    }
    io::json f;
    for (const auto& [name, v] : fitted()) f[name] = v;
    return io::json{{"rows", rs}, {"fitted_rates", f}};
  }
};

/// One target of a verdict: fitted value must lie in [lo, hi].
struct Target {
  std::string name;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double fitted = 0.0;
  bool pass() const { return fitted >= lo && fitted <= hi; }
};

inline io::json verdict_json(const std::vector<Target>& targets) {
  io::json t = io::json::array(), f = io::json::array();
  bool pass = true;
  for (const Target& x : targets) {
    io::json tj{{"name", x.name}};
    if (std::isfinite(x.lo)) tj["min"] = x.lo;
    if (std::isfinite(x.hi)) tj["max"] = x.hi;
    t.push_back(tj);
    f.push_back(io::json{{"name", x.name}, {"value", x.fitted}, {"pass", x.pass()}});
    pass = pass && x.pass();
  }
  return io::json{{"targets", t}, {"fitted", f}, {"pass", pass}};
}

inline bool all_pass(const std::vector<Target>& t) {
  return std::all_of(t.begin(), t.end(), [](const Target& x) { return x.pass(); });
}

inline std::vector<SurfaceMesh> study_meshes(const ImplicitSurface& surface, const StudyConfig& cfg) {
  std::vector<SurfaceMesh> all = mesh_family(surface, cfg.last_level(), cfg.geometry());
  return std::vector<SurfaceMesh>(all.begin() + cfg.first_level, all.end());
}

// ---------------------------------------------------------------- geometry

struct GeometryRow {
  int level = 0;
  GeometryReport report;
  std::array<double, 3> deviation{0.0, 0.0, 0.0};  // assembled ||I - J_h^k||
};

struct GeometryStudy {
  std::vector<GeometryRow> rows;
  std::vector<double> hs() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.report.h);
    return v;
  }
  double rate_delta() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.report.delta_inf);
    return fit_rate(hs(), v);
  }
  double rate_normal() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.report.normal_gap_inf);
    return fit_rate(hs(), v);
  }
  double rate_deviation(int k) const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.deviation[k]);
    return fit_rate(hs(), v);
  }
  double rate_bound(int k) const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.report.jacobian_bound[k]);
    return fit_rate(hs(), v);
  }

  std::string csv() const {
    std::ostringstream os;
    os << "level,h,delta_inf,normal_gap_inf,sv_min,sv_max,bound_0,bound_1,bound_2,deviation_0,deviation_1,deviation_2\n";
    for (const auto& r : rows) {
      os << r.level << "," << format_double(r.report.h) << "," << format_double(r.report.delta_inf) << ","
         << format_double(r.report.normal_gap_inf) << "," << format_double(r.report.sv_min) << ","
         << format_double(r.report.sv_max);
      for (double b : r.report.jacobian_bound) os << "," << format_double(b);
      for (double d : r.deviation) os << "," << format_double(d);
      os << "\n";
    }
    return os.str();
  }
};

inline GeometryStudy run_geometry_study(const StudyConfig& cfg) {
  const auto surface = make_surface(cfg.surface);
  GeometryStudy out;
  const auto meshes = study_meshes(*surface, cfg);
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    GeometryRow row;
    row.level = cfg.first_level + static_cast<int>(i);
    row.report = geometry_report(*surface, meshes[i], cfg.quad_degree);
    const AssembledComplex ac = assemble(meshes[i], Family::whitney, cfg.quad_degree, surface.get());
    for (int k = 0; k < 3; ++k) row.deviation[k] = true_gram(ac, *surface, k).deviation;
    out.rows.push_back(row);
  }
  return out;
}

inline std::vector<Target> geometry_targets(const GeometryStudy& g, const StudyConfig& cfg) {
  std::vector<Target> t;
  if (cfg.exact_geometry) {
    double worst = 0.0;
    for (const auto& r : g.rows) worst = std::max({worst, r.deviation[0], r.deviation[1], r.deviation[2]});
    t.push_back({"max_deviation", 0.0, 1e-10, worst});
    return t;
  }
  const double s = cfg.s;
  for (int k = 0; k < 3; ++k)
    t.push_back({"deviation_rate_k" + std::to_string(k), s + 1.0 - 0.25, std::numeric_limits<double>::infinity(),
                 g.rate_deviation(k)});
  return t;
}

// ---------------------------------------------------------------- solves

struct SolveResult {
  int level = 0;
  RateTable::Row row;
  MixedSolution solution;
  CrimeReport crime;
  Eigen::Index dofs = 0;
};

namespace detail {

inline FormCallback study_data(const StudyConfig& cfg, const Manufactured& m) {
  switch (cfg.data) {
    case DataMode::eigen: return m.f;
    case DataMode::zero: return FormCallback::zero(cfg.k);
    case DataMode::constant:
      if (cfg.k == 1) return FormCallback::zero(1);
      return FormCallback::scalar(cfg.k, [](const Vec3&) { return 1.0; });
  }
  return m.f;
}

inline double v_norm_diff(const ComplexRep& rep, int k, const Vec& a, const Vec& b) {
  if (a.size() == 0) return 0.0;
  const Vec d = a - b;
  return std::sqrt(std::max(0.0, d.dot(rep.v_gram(k) * d)));
}

}  // namespace detail

/// Discrete solve on one mesh: errors on M, geometric and data crimes, and
/// the discrete-versus-modified gap.
inline SolveResult solve_level(const StudyConfig& cfg, const ImplicitSurface& surface, const SurfaceMesh& mesh, int level) {
  const int k = cfg.k;
  const AssembledComplex ac = assemble(mesh, cfg.family(), cfg.quad_degree, &surface);
  const Manufactured man = sphere_solution(k, cfg.ell);
  const FormCallback data = detail::study_data(cfg, man);
  const bool have_exact = cfg.data == DataMode::eigen && surface.name() == "sphere";

  const PullbackLoad pull = pullback_load(ac, surface, data);
  const Mat q = harmonic_basis(ac.rep, k);
  const MixedOperator op(ac.rep, k, q);
  SolveResult res;
  res.level = level;
  res.dofs = ac.rep.dim(k);
  res.solution = op.solve_load(pull.rhs);
  const MixedSolution& sol = res.solution;

  RateTable::Row& row = res.row;
  row.level = level;
  row.h = mesh.h();
  row.residual = sol.residual;
  const ExactForm zero_u{FormCallback::zero(k), k < 2 ? std::optional<FormCallback>(FormCallback::zero(k + 1)) : std::nullopt};
  const ErrorNorms eu = error_norms(ac, surface, have_exact ? man.u : zero_u, sol.u, k);
  row.l2_u = eu.l2;
  row.graph_u = eu.d;
  if (k > 0) {
    const ExactForm zero_s{FormCallback::zero(k - 1), FormCallback::zero(k)};
    const ErrorNorms es = error_norms(ac, surface, have_exact ? *man.sigma : zero_s, sol.sigma, k - 1);
    row.l2_sigma = es.l2;
    row.graph_sigma = es.d;
  }
  // eigen data has p = 0; constant data is harmonic for k = 0, 2, so p = f
  const FormCallback p_exact = cfg.data == DataMode::constant ? data : FormCallback::zero(k);
  row.l2_p = error_norms(ac, surface, ExactForm{p_exact, std::nullopt}, sol.p, k).l2;

  // geometric crime: ||I - J_h|| over the levels entering the mixed problem
  std::vector<ComplexLevel> tl(3);
  for (int j = 0; j < 3; ++j) {
    tl[j].gram = assemble_true_gram(ac, surface, j);
    tl[j].diff = ac.rep.diff(j);
  }
  double dev = 0.0;
  for (int j = std::max(0, k - 1); j <= std::min(2, k + 1); ++j)
    dev = std::max(dev, jacobian_deviation(ac.rep.gram(j), tl[j].gram));
  row.jacobian_deviation = dev;
  const ComplexRep modified(std::move(tl));

  // data crime ||f_h - i_h* f||_h
  const Vec b_istar = istar_rhs(ac, surface, data);
  const Vec db = pull.rhs - b_istar;
  Eigen::SimplicialLLT<SpMat> chol(ac.rep.gram(k));
  row.data_error = std::sqrt(std::max(0.0, db.dot(chol.solve(db))));

  // modified problem on (D_h, Ghat) with data i_h* f
  const MixedOperator mop(modified, k, harmonic_basis(modified, k));
  const MixedSolution msol = mop.solve_load(b_istar);
  row.crime_intermediate = detail::v_norm_diff(ac.rep, k, sol.u, msol.u) +
                           std::sqrt(std::max(0.0, (sol.p - msol.p).dot(ac.rep.gram(k) * (sol.p - msol.p))));
  if (k > 0) row.crime_intermediate += detail::v_norm_diff(ac.rep, k - 1, sol.sigma, msol.sigma);

  CrimeReport& c = res.crime;
  c.lhs = eu.graph() + row.l2_p;
  if (k > 0) c.lhs += std::hypot(row.l2_sigma, row.graph_sigma);
  // interpolation error bounds the best approximation from i_h V_h
  if (have_exact && cfg.family() == Family::whitney) {
    const ErrorNorms iu = error_norms(ac, surface, man.u, canonical_interpolate(man.u.u, ac, surface), k);
    c.best_approx = iu.graph();
    if (k > 0) {
      const ErrorNorms is = error_norms(ac, surface, *man.sigma, canonical_interpolate(man.sigma->u, ac, surface), k - 1);
      c.best_approx += is.graph();
    }
  } else {
    c.best_approx = std::numeric_limits<double>::quiet_NaN();
  }
  c.data_error = row.data_error;
  c.deviation = dev;
  c.geometry_error = dev * norm_on_surface(ac, surface, data);
  c.mu = std::numeric_limits<double>::quiet_NaN();
  const double rhs = (std::isfinite(c.best_approx) ? c.best_approx : 0.0) + c.data_error + c.geometry_error;
  c.ratio = rhs > 0.0 ? c.lhs / rhs : 0.0;
  c.intermediate = row.crime_intermediate;
  return res;
}

inline RateTable run_study(const StudyConfig& cfg, std::vector<SolveResult>* details = nullptr) {
  cfg.validate();
  const auto surface = make_surface(cfg.surface);
  const auto meshes = study_meshes(*surface, cfg);
  RateTable table;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    SolveResult r = solve_level(cfg, *surface, meshes[i], cfg.first_level + static_cast<int>(i));
    table.rows.push_back(r.row);
    if (details) details->push_back(std::move(r));
  }
  return table;
}

/// Targets of the shipped studies.
inline std::vector<Target> study_targets(const RateTable& t, const StudyConfig& cfg) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Target> out;
  if (cfg.k == 0 && cfg.r == 1) {
    out.push_back({"l2_u", 1.85, 2.15, t.rate("l2_u")});
    out.push_back({"graph_u", 0.85, 1.15, t.rate("graph_u")});
  } else if (cfg.k == 0 && cfg.r == 2) {
    out.push_back({"l2_u", 2.8, 3.2, t.rate("l2_u")});
  } else {
    out.push_back({"l2_u", 0.9, inf, t.rate("l2_u")});
    out.push_back({"l2_sigma", 0.9, inf, t.rate("l2_sigma")});
    out.push_back({"jacobian_deviation", 1.8, inf, t.rate("jacobian_deviation")});
    out.push_back({"crime_intermediate", 1.8, inf, t.rate("crime_intermediate")});
  }
  return out;
}

// ---------------------------------------------------------------- eigen

struct EigenRow {
  int level = 0;
  double h = 0.0;
  Vec eigenvalues;
  int multiplicity = 0;  // size of the lowest cluster
  double orthonormality_defect = 0.0;
};

struct EigenStudy {
  std::vector<EigenRow> rows;
  double target = 2.0;
  double rate() const {
    std::vector<double> h, e;
    for (const auto& r : rows) {
      h.push_back(r.h);
      e.push_back(std::abs(r.eigenvalues(0) - target));
    }
    return fit_rate(h, e);
  }
  std::string csv() const {
    std::ostringstream os;
    os << "level,h";
    const Eigen::Index n = rows.empty() ? 0 : rows.front().eigenvalues.size();
    for (Eigen::Index j = 0; j < n; ++j) os << ",lambda_" << j + 1;
    os << ",multiplicity,error\n";
    for (const auto& r : rows) {
      os << r.level << "," << format_double(r.h);
      for (Eigen::Index j = 0; j < r.eigenvalues.size(); ++j) os << "," << format_double(r.eigenvalues(j));
      os << "," << r.multiplicity << "," << format_double(std::abs(r.eigenvalues(0) - target)) << "\n";
    }
    return os.str();
  }
};

inline int cluster_size(const Vec& ev, double rel = 0.1) {
  int m = 0;
  for (Eigen::Index j = 0; j < ev.size(); ++j)
    if (std::abs(ev(j) - ev(0)) <= rel * std::abs(ev(0))) ++m;
  return m;
}

inline EigenStudy run_eigen_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto surface = make_surface(cfg.surface);
  const auto meshes = study_meshes(*surface, cfg);
  EigenStudy out;
  out.target = cfg.k == 1 ? 2.0 : 2.0;  // lowest nonzero eigenvalue l(l+1) with l = 1
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const AssembledComplex ac = assemble(meshes[i], cfg.family(), cfg.quad_degree, surface.get());
    const EigenResult er = solve_hodge_eigen(ac.rep, cfg.k, cfg.nev);
    EigenRow row;
    row.level = cfg.first_level + static_cast<int>(i);
    row.h = meshes[i].h();
    row.eigenvalues = er.eigenvalues;
    row.multiplicity = cluster_size(er.eigenvalues);
    row.orthonormality_defect = er.orthonormality_defect;
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------- abstract battery

struct BatteryReport {
  int trials = 0;
  int max_total_dim = 0;
  std::map<std::string, int> violations{{"hodge", 0},          {"poincare", 0},   {"discrete_poincare", 0},
                                        {"cohomology", 0},     {"projection_data", 0},
                                        {"perturbation_audit", 0}, {"unitary", 0}, {"eigen_crime_free", 0}};
  int cohomology_inapplicable = 0;
  int cohomology_checked = 0;
  double perturbation_slope = 0.0;  // min over sweep pairs
  double max_unitary_term = 0.0;
  int total_violations() const {
    int n = 0;
    for (const auto& [k, v] : violations) n += v;
    return n;
  }
  io::json to_json() const {
    io::json v;
    for (const auto& [k, n] : violations) v[k] = n;
    return io::json{{"trials", trials},
                    {"max_total_dim", max_total_dim},
                    {"violations", v},
                    {"total_violations", total_violations()},
                    {"cohomology_checked", cohomology_checked},
                    {"cohomology_inapplicable", cohomology_inapplicable},
                    {"perturbation_slope", perturbation_slope},
                    {"max_unitary_term", max_unitary_term}};
  }
};

struct SweepPoint {
  double epsilon = 0.0;
  double intermediate = 0.0;
  double rhs = 0.0;  // data_error + geometry_error
};

/// Perturbation sweep: injections (I + eps K) o [I; 0] with f_h = i_h* f.
inline std::vector<SweepPoint> perturbation_sweep(std::uint64_t seed, int k, const std::vector<double>& eps) {
  std::vector<SweepPoint> out;
  for (double e : eps) {
    random::PairOptions o;
    o.epsilon = e;
    const CrimePair pair = random::random_pair(seed, o);
    random::Rng rng(seed + 17);
    const Vec f = random::gaussian(rng, pair.truth().dim(k));
    const CrimeReport r = crime_report(pair, k, f);
    out.push_back({e, r.intermediate, r.data_error + r.geometry_error});
  }
  return out;
}

inline double sweep_slope(const std::vector<SweepPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts)
    if (p.epsilon > 0.0) {
      x.push_back(p.rhs);
      y.push_back(p.intermediate);
    }
  return linalg::loglog_slope(x, y);
}

namespace detail {

inline bool hodge_ok(const ComplexRep& rep, int k, const Vec& w) {
  const HodgeSplit s = hodge_decompose(rep, k, w);
  const Mat g = rep.dense_gram(k);
  const double n2 = w.dot(g * w);
  const double part = feec::detail::norm_in(g, s.boundary + s.harmonic + s.coexact - w) / std::sqrt(n2);
  const double o1 = std::abs(s.boundary.dot(g * s.harmonic)) / n2;
  const double o2 = std::abs(s.boundary.dot(g * s.coexact)) / n2;
  const double o3 = std::abs(s.harmonic.dot(g * s.coexact)) / n2;
  return part <= 1e-10 && std::max({o1, o2, o3}) <= 1e-10;
}

inline bool poincare_ok(const ComplexRep& rep, int k, random::Rng& rng) {
  const PoincareResult p = poincare_constant(rep, k);
  if (p.degenerate) return true;
  const Mat gv = Mat(rep.v_gram(k));
  const Mat d = rep.dense_diff(k);
  const Mat ghi = rep.dense_gram(k + 1);
  auto ratio_ok = [&](const Vec& v, bool tight) {
    const double lhs = feec::detail::norm_in(gv, v);
    const double rhs = p.constant * feec::detail::norm_in(ghi, d * v);
    if (tight) return std::abs(lhs - rhs) <= 1e-8 * lhs;
    return lhs <= rhs * (1.0 + 1e-9);
  };
  if (!ratio_ok(p.achiever, true)) return false;
  const Mat g = rep.dense_gram(k);
  for (int i = 0; i < 20; ++i) {
    const Vec y = random::gaussian(rng, rep.dim(k + 1));
    const Vec v = g.llt().solve(d.transpose() * y);  // in Z^{k perp}
    if (!ratio_ok(v, false)) return false;
  }
  return true;
}

}  // namespace detail

/// Randomized property battery over `trials` random crime pairs.
inline BatteryReport run_abstract_battery(std::uint64_t seed, int trials) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  BatteryReport rep;
  rep.trials = trials;
  random::Rng master(seed);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = master();
    random::Rng rng(s ^ 0x9e3779b97f4a7c15ULL);
    random::PairOptions o;
    o.levels = 3 + (t % 2);
    o.approx_level_dim = o.levels == 3 ? 6 : 4;
    o.extra_level_dim = o.levels == 3 ? 4 : 3;
    const bool unitary = t % 10 == 0;
    o.epsilon = unitary ? 0.0 : std::exp(random::uniform(rng, std::log(1e-3), std::log(1e-1)));
    o.scale = unitary ? 1.0 : std::vector<double>{1.0, 0.5, 0.9, 1.1, 2.0}[t % 5];
    o.extra_cohomology = t % 3 == 0;
    const CrimePair pair = random::random_pair(s, o);
    rep.max_total_dim = std::max<int>(rep.max_total_dim, static_cast<int>(pair.truth().total_dim()));

    for (const ComplexRep* c : {&pair.truth(), &pair.approx()})
      for (int k = 0; k < c->size(); ++k) {
        if (!detail::hodge_ok(*c, k, random::gaussian(rng, c->dim(k)))) rep.violations["hodge"]++;
        if (!detail::poincare_ok(*c, k, rng)) rep.violations["poincare"]++;
      }
    for (int k = 0; k < pair.size(); ++k) {
      if (discrete_poincare_check(pair, k).violated) rep.violations["discrete_poincare"]++;
      const Vec f = random::gaussian(rng, pair.truth().dim(k));
      const Mat pi = random::random_left_inverse(rng, pair.inj(k), pair.proj(k));
      if (projection_data(pair, k, pi, f).violated) rep.violations["projection_data"]++;
      if (unitary) {
        const CrimeReport r = crime_report(pair, k, f);
        const double m = std::max({r.data_error, r.geometry_error, r.intermediate});
        rep.max_unitary_term = std::max(rep.max_unitary_term, m);
        if (m != 0.0) rep.violations["unitary"]++;
      } else {
        const Vec fh = adjoint_injection(pair, k, f) + 1e-2 * random::gaussian(rng, pair.approx().dim(k));
        const CrimeReport r = crime_report(pair, k, f, &fh);
        if (r.intermediate > r.audit_bound * (1.0 + 1e-9)) rep.violations["perturbation_audit"]++;
      }
    }
    for (const CohomologyLevel& c : cohomology_isomorphism_check(pair)) {
      if (c.violated) rep.violations["cohomology"]++;
      if (c.hypothesis) ++rep.cohomology_checked;
      else ++rep.cohomology_inapplicable;
    }
    if (unitary) {
      for (int k = 0; k < pair.size(); ++k) {
        const int avail = static_cast<int>(pair.approx().dim(k) - harmonic_basis(pair.approx(), k).cols());
        if (avail < 1) continue;
        const EigenComparison ec = eigen_convergence_report(pair, k, std::min(avail, 3));
        if ((ec.lambda_h - ec.lambda_mod).cwiseAbs().maxCoeff() > 1e-10 * ec.lambda_h.cwiseAbs().maxCoeff())
          rep.violations["eigen_crime_free"]++;
      }
    }
  }
  rep.perturbation_slope = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 5; ++i) {
    const auto pts = perturbation_sweep(seed + 1000 + i, 1, {1e-1, 1e-2, 1e-3, 1e-4});
    rep.perturbation_slope = std::min(rep.perturbation_slope, sweep_slope(pts));
  }
  return rep;
}

}  // namespace feec

#endif  // FEEC_STUDY_HPP
