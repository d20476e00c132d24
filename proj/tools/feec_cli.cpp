// SPDX-License-Identifier: Apache-2.0
//
// feec_cli: mesh generation, geometry reports, single solves, refinement
// studies, eigenvalue studies and the abstract property battery.

#include <feec/study.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

void emit_verdict(const feec::StudyConfig& cfg, const feec::io::json& verdict) {
  if (!cfg.out.empty()) feec::io::write_json(cfg.out + ".verdict.json", verdict);
  std::cerr << "verdict: " << (verdict["pass"].get<bool>() ? "pass" : "fail") << "\n";
  for (const auto& f : verdict["fitted"])
    std::cerr << "  " << f["name"].get<std::string>() << " = " << feec::format_double(f["value"].get<double>())
              << (f["pass"].get<bool>() ? "  ok" : "  FAIL") << "\n";
}

feec::io::json config_json(const feec::StudyConfig& c) {
  return {{"surface", c.surface}, {"k", c.k},         {"s", c.exact_geometry ? feec::io::json("exact") : feec::io::json(c.s)},
          {"r", c.r},             {"levels", c.levels}, {"first_level", c.first_level},
          {"ell", c.ell},         {"quad_degree", c.quad_degree}, {"seed", c.seed}};
}

int cmd_mesh(const feec::StudyConfig& cfg) {
  const auto surface = feec::make_surface(cfg.surface);
  const auto meshes = feec::study_meshes(*surface, cfg);
  const std::string dir = cfg.out.empty() ? "." : cfg.out;
  std::filesystem::create_directories(dir);
  std::cout << "level,vertices,edges,faces,euler,h,file\n";
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const int level = cfg.first_level + static_cast<int>(i);
    const auto& m = meshes[i];
    const std::string name = cfg.surface + "_s" + (cfg.exact_geometry ? "exact" : std::to_string(cfg.s)) + "_level" +
                             std::to_string(level) + ".soff";
    const std::string path = (std::filesystem::path(dir) / name).string();
    feec::write_soff(path, m);
    std::cout << level << "," << m.num_vertices() << "," << m.num_edges() << "," << m.num_triangles() << ","
              << m.euler_characteristic() << "," << feec::format_double(m.h()) << "," << path << "\n";
  }
  return kExitPass;
}

int cmd_geom(const feec::StudyConfig& cfg) {
  if (cfg.levels < 3) throw UsageError("geom needs at least 3 levels");
  const feec::GeometryStudy g = feec::run_geometry_study(cfg);
  const auto targets = feec::geometry_targets(g, cfg);
  feec::io::json verdict = feec::verdict_json(targets);
  verdict["rates"] = {{"delta_inf", g.rate_delta()},
                      {"normal_gap_inf", g.rate_normal()},
                      {"deviation", {g.rate_deviation(0), g.rate_deviation(1), g.rate_deviation(2)}},
                      {"jacobian_bound", {g.rate_bound(0), g.rate_bound(1), g.rate_bound(2)}}};
  if (cfg.format == "json") {
    feec::io::json rows = feec::io::json::array();
    for (const auto& r : g.rows)
      rows.push_back({{"level", r.level},
                      {"h", r.report.h},
                      {"delta_inf", r.report.delta_inf},
                      {"normal_gap_inf", r.report.normal_gap_inf},
                      {"sv_min", r.report.sv_min},
                      {"sv_max", r.report.sv_max},
                      {"jacobian_bound", r.report.jacobian_bound},
                      {"deviation", r.deviation}});
    emit(cfg.out, feec::io::json{{"config", config_json(cfg)}, {"rows", rows}, {"verdict", verdict}}.dump(2) + "\n");
  } else {
    emit(cfg.out, g.csv());
  }
  emit_verdict(cfg, verdict);
  return verdict["pass"].get<bool>() ? kExitPass : kExitFail;
}

int cmd_solve(const feec::StudyConfig& cfg, int level) {
  cfg.validate();
  if (level < 0) throw UsageError("level must be nonnegative");
  const auto surface = feec::make_surface(cfg.surface);
  const auto meshes = feec::mesh_family(*surface, level, cfg.geometry());
  const feec::SolveResult r = feec::solve_level(cfg, *surface, meshes.back(), level);
  feec::io::json errors;
  for (const auto& c : feec::RateTable::columns)
    errors[c] = c == "level" ? feec::io::json(r.row.level) : feec::io::json(r.row.value(c));
  errors["crime_intermediate"] = r.row.crime_intermediate;
  const feec::io::json doc{{"config", config_json(cfg)},
                           {"level", level},
                           {"dofs", r.dofs},
                           {"residual", r.row.residual},
                           {"errors", errors},
                           {"crime", feec::io::to_json(r.crime)},
                           {"solution", feec::io::to_json(r.solution)}};
  emit(cfg.out, doc.dump(2) + "\n");
  return kExitPass;
}

int cmd_study(const feec::StudyConfig& cfg) {
  if (cfg.levels < 3) throw UsageError("study needs at least 3 levels");
  const feec::RateTable t = feec::run_study(cfg);
  const auto targets = feec::study_targets(t, cfg);
  feec::io::json verdict = feec::verdict_json(targets);
  bool monotone = true;
  for (const char* c : {"l2_u", "l2_sigma", "jacobian_deviation"}) monotone = monotone && t.monotone(c);
  verdict["monotone"] = monotone;
  if (cfg.format == "json") {
    feec::io::json doc = t.to_json();
    doc["config"] = config_json(cfg);
    doc["verdict"] = verdict;
    emit(cfg.out, doc.dump(2) + "\n");
  } else {
    emit(cfg.out, t.csv());
  }
  emit_verdict(cfg, verdict);
  return verdict["pass"].get<bool>() ? kExitPass : kExitFail;
}

int cmd_eigen(const feec::StudyConfig& cfg) {
  const feec::EigenStudy e = feec::run_eigen_study(cfg);
  const double finest = std::abs(e.rows.back().eigenvalues(0) - e.target);
  std::vector<feec::Target> targets{{"lambda_rate", 1.8, std::numeric_limits<double>::infinity(), e.rate()},
                                    {"lambda_error_finest", 0.0, 0.05, finest},
                                    {"multiplicity", 3.0, 3.0, static_cast<double>(e.rows.back().multiplicity)}};
  if (cfg.k != 0 || cfg.surface != "sphere") targets.resize(0);
  const feec::io::json verdict = feec::verdict_json(targets);
  if (cfg.format == "json") {
    feec::io::json rows = feec::io::json::array();
    for (const auto& r : e.rows)
      rows.push_back({{"level", r.level},
                      {"h", r.h},
                      {"eigenvalues", std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size())},
                      {"multiplicity", r.multiplicity},
                      {"orthonormality_defect", r.orthonormality_defect}});
    emit(cfg.out, feec::io::json{{"config", config_json(cfg)}, {"rows", rows}, {"verdict", verdict}}.dump(2) + "\n");
  } else {
    emit(cfg.out, e.csv());
  }
  emit_verdict(cfg, verdict);
  return verdict["pass"].get<bool>() ? kExitPass : kExitFail;
}

int cmd_abstract(const feec::StudyConfig& cfg) {
  if (cfg.trials < 1) throw UsageError("trials must be at least 1");
  const feec::BatteryReport b = feec::run_abstract_battery(cfg.seed, cfg.trials);
  const std::vector<feec::Target> targets{
      {"total_violations", 0.0, 0.0, static_cast<double>(b.total_violations())},
      {"perturbation_slope", 0.9, std::numeric_limits<double>::infinity(), b.perturbation_slope},
      {"max_unitary_term", 0.0, 0.0, b.max_unitary_term}};
  const feec::io::json verdict = feec::verdict_json(targets);
  feec::io::json doc = b.to_json();
  doc["seed"] = cfg.seed;
  doc["verdict"] = verdict;
  emit(cfg.out, doc.dump(2) + "\n");
  if (!cfg.out.empty()) feec::io::write_json(cfg.out + ".verdict.json", verdict);
  std::cerr << "verdict: " << (verdict["pass"].get<bool>() ? "pass" : "fail") << "\n";
  return verdict["pass"].get<bool>() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface FEEC convergence and variational-crime harness"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key = value config file; flags override");

  feec::StudyConfig cfg;
  std::string s_text = "1";
  std::string data = "eigen";
  int level = 3;
  app.add_option("--surface", cfg.surface, "sphere or torus")->check(CLI::IsMember({"sphere", "torus"}));
  app.add_option("--k", cfg.k, "form degree 0, 1 or 2")->check(CLI::Range(0, 2));
  app.add_option("--s", s_text, "geometry degree 1, 2 or exact")->check(CLI::IsMember({"1", "2", "exact"}));
  app.add_option("--r", cfg.r, "element degree 1 or 2")->check(CLI::Range(1, 2));
  app.add_option("--levels", cfg.levels, "number of refinement levels");
  app.add_option("--first-level", cfg.first_level, "coarsest refinement level");
  app.add_option("--ell", cfg.ell, "spherical harmonic degree 1, 2 or 3");
  app.add_option("--quad-degree", cfg.quad_degree, "triangle quadrature degree");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.out, "output file (mesh: output directory)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* mesh = app.add_subcommand("mesh", "write SOFF meshes for all levels");
  auto* geom = app.add_subcommand("geom", "geometry report and fitted rates");
  auto* solve = app.add_subcommand("solve", "single mixed solve with errors and crime report");
  solve->add_option("--level", level, "refinement level");
  solve->add_option("--data", data, "eigen, zero or constant")->check(CLI::IsMember({"eigen", "zero", "constant"}));
  auto* study = app.add_subcommand("study", "refinement study with rate verdict");
  study->add_option("--data", data, "eigen, zero or constant")->check(CLI::IsMember({"eigen", "zero", "constant"}));
  auto* eigen = app.add_subcommand("eigen", "Hodge-Laplace eigenvalue study");
  eigen->add_option("--nev", cfg.nev, "number of nonzero eigenvalues");
  auto* abstract = app.add_subcommand("abstract", "randomized property battery");
  abstract->add_option("--trials", cfg.trials, "number of random crime pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    cfg.exact_geometry = s_text == "exact";
    cfg.s = cfg.exact_geometry ? 1 : std::stoi(s_text);
    cfg.data = data == "zero" ? feec::DataMode::zero
               : data == "constant" ? feec::DataMode::constant
                                    : feec::DataMode::eigen;
    cfg.validate();
    if (*mesh) return cmd_mesh(cfg);
    if (*geom) return cmd_geom(cfg);
    if (*solve) return cmd_solve(cfg, level);
    if (*study) return cmd_study(cfg);
    if (*eigen) return cmd_eigen(cfg);
    if (*abstract) return cmd_abstract(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
