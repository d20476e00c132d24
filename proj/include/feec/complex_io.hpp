// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_COMPLEX_IO_HPP
#define FEEC_COMPLEX_IO_HPP

#include <feec/crime.hpp>

#include <json.hpp>

#include <fstream>

namespace feec::io {

using json = nlohmann::json;

inline json row_major(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

inline Mat from_row_major(const json& a, Eigen::Index rows, Eigen::Index cols) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows * cols)
    throw std::invalid_argument("matrix array has " + std::to_string(a.size()) + " entries, expected " +
                                std::to_string(rows * cols));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = a[static_cast<std::size_t>(i * cols + j)].get<double>();
  return m;
}

inline json to_json(const ComplexRep& rep) {
  json levels = json::array();
  for (int k = 0; k < rep.size(); ++k) {
    json lv;
    lv["dim"] = rep.dim(k);
    lv["gram"] = row_major(rep.dense_gram(k));
    if (k < rep.top()) lv["diff"] = row_major(rep.dense_diff(k));
    levels.push_back(std::move(lv));
  }
  return json{{"levels", levels}};
}

inline ComplexRep complex_from_json(const json& doc) {
  const json& levels = doc.at("levels");
  std::vector<Mat> grams, diffs;
  std::vector<Eigen::Index> dims;
  for (const json& lv : levels) dims.push_back(lv.at("dim").get<Eigen::Index>());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    grams.push_back(from_row_major(levels[k].at("gram"), dims[k], dims[k]));
    if (levels[k].contains("diff")) {
      if (k + 1 >= levels.size()) throw std::invalid_argument("top level carries a diff");
      diffs.push_back(from_row_major(levels[k]["diff"], dims[k + 1], dims[k]));
    } else if (k + 1 < levels.size()) {
      throw std::invalid_argument("level " + std::to_string(k) + " is missing its diff");
    }
  }
  return ComplexRep::from_dense(grams, diffs);
}

inline json to_json(const MixedSolution& s) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"sigma", vec(s.sigma)}, {"u", vec(s.u)}, {"p_coords", vec(s.p_coords)}, {"residual", s.residual}};
}

inline json to_json(const CrimeReport& r) {
  return json{{"lhs", r.lhs},
              {"best_approx", r.best_approx},
              {"data_error", r.data_error},
              {"geometry_error", r.geometry_error},
              {"mu", r.mu},
              {"ratio", r.ratio},
              {"intermediate", r.intermediate}};
}

inline void write_json(const std::string& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << doc.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return json::parse(is);
}

}  // namespace feec::io

#endif  // FEEC_COMPLEX_IO_HPP
