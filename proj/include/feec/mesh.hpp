// SPDX-License-Identifier: Apache-2.0

#ifndef FEEC_MESH_HPP
#define FEEC_MESH_HPP

#include <feec/surface.hpp>

#include <array>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

namespace feec {

/// Geometry of the elements: affine (s = 1), quadratic Lagrange (s = 2) or
/// the exact lift a(affine) used as a crime-free reference.
enum class GeometryMode { affine, quadratic, exact };

inline int geometry_degree(GeometryMode g) { return g == GeometryMode::quadratic ? 2 : 1; }

/// Oriented closed triangulated surface. Edges are oriented from the lower
/// to the higher vertex index; local edges of a triangle (a, b, c) are
/// (a, b), (b, c), (c, a).
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::array<int, 3>> tri_edge_signs;
  std::vector<Vec3> edge_nodes;  // quadratic geometry node per edge (s = 2)
  GeometryMode geometry = GeometryMode::affine;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }
  int degree() const { return geometry_degree(geometry); }

  /// Max edge length of the vertex polyhedron.
  double h() const {
    double m = 0.0;
    for (const auto& e : edges) m = std::max(m, (vertices[e[1]] - vertices[e[0]]).norm());
    return m;
  }

  /// Rebuilds edges and triangle-edge incidence from the triangles.
  void build_edges() {
    edges.clear();
    tri_edges.assign(triangles.size(), {0, 0, 0});
    tri_edge_signs.assign(triangles.size(), {0, 0, 0});
    std::map<std::pair<int, int>, int> index;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (int l = 0; l < 3; ++l) {
        const int a = triangles[t][l];
        const int b = triangles[t][(l + 1) % 3];
        const auto key = std::minmax(a, b);
        auto it = index.find(key);
        int e;
        if (it == index.end()) {
          e = static_cast<int>(edges.size());
          index.emplace(key, e);
          edges.push_back({key.first, key.second});
        } else {
          e = it->second;
        }
        tri_edges[t][l] = e;
        tri_edge_signs[t][l] = a < b ? 1 : -1;
      }
    }
  }
};

struct MeshCheck {
  bool closed = true;
  bool consistently_oriented = true;
  double max_vertex_distance = 0.0;
  std::string message;
  bool ok() const { return message.empty(); }
};

/// Closedness, orientation and vertex placement on M.
inline MeshCheck check_mesh(const SurfaceMesh& mesh, const ImplicitSurface* surface = nullptr) {
  MeshCheck c;
  std::vector<int> plus(mesh.edges.size(), 0), minus(mesh.edges.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int l = 0; l < 3; ++l) (mesh.tri_edge_signs[t][l] > 0 ? plus : minus)[mesh.tri_edges[t][l]]++;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (plus[e] + minus[e] != 2) c.closed = false;
    if (plus[e] != 1 || minus[e] != 1) c.consistently_oriented = false;
  }
  std::ostringstream msg;
  if (!c.closed) msg << "mesh not closed; ";
  if (!c.consistently_oriented) msg << "mesh not consistently oriented; ";
  if (surface) {
    for (const Vec3& v : mesh.vertices) c.max_vertex_distance = std::max(c.max_vertex_distance, std::abs(surface->distance(v)));
    if (c.max_vertex_distance > 1e-12) msg << "vertices off the surface (" << c.max_vertex_distance << "); ";
  }
  c.message = msg.str();
  return c;
}

/// Flips triangles whose normal points against nu at their centroid.
inline void orient_outward(SurfaceMesh& mesh, const ImplicitSurface& surface) {
  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    if (n.dot(surface.normal((a + b + c) / 3.0)) < 0.0) std::swap(t[1], t[2]);
  }
}

inline SurfaceMesh icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  SurfaceMesh m;
  const double raw[12][3] = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                             {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (const auto& v : raw) m.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  orient_outward(m, Sphere());
  m.build_edges();
  return m;
}

inline SurfaceMesh octahedron() {
  SurfaceMesh m;
  m.vertices = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  m.triangles = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  orient_outward(m, Sphere());
  m.build_edges();
  return m;
}

/// Structured torus mesh: n_minor x n_major quads, each split in two.
inline SurfaceMesh torus_mesh(const Torus& torus, int n_minor = 8, int n_major = 24) {
  SurfaceMesh m;
  const double big = torus.major_radius(), small = torus.minor_radius();
  for (int j = 0; j < n_major; ++j)
    for (int i = 0; i < n_minor; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n_minor;
      const double ph = 2.0 * std::numbers::pi * j / n_major;
      const double rr = big + small * std::cos(th);
      m.vertices.emplace_back(rr * std::cos(ph), rr * std::sin(ph), small * std::sin(th));
    }
  auto id = [&](int i, int j) { return ((j + n_major) % n_major) * n_minor + (i + n_minor) % n_minor; };
  for (int j = 0; j < n_major; ++j)
    for (int i = 0; i < n_minor; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  orient_outward(m, torus);
  m.build_edges();
  return m;
}

/// Single flat triangle (used with a Plane surface in tests).
inline SurfaceMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  SurfaceMesh m;
  m.vertices = {a, b, c};
  m.triangles = {{0, 1, 2}};
  m.build_edges();
  return m;
}

/// Degree-s geometry: quadratic nodes are closest-point projections of the
/// edge midpoints.
inline SurfaceMesh lift_to_surface(const SurfaceMesh& mesh, const ImplicitSurface& surface, GeometryMode mode) {
  SurfaceMesh out = mesh;
  out.geometry = mode;
  for (const Vec3& v : out.vertices) {
    if (std::abs(surface.distance(v)) > 1e-12)
      throw std::domain_error("lift_to_surface: vertex off the surface");
  }
  out.edge_nodes.clear();
  if (mode == GeometryMode::quadratic) {
    out.edge_nodes.reserve(out.edges.size());
    for (const auto& e : out.edges)
      out.edge_nodes.push_back(closest_point(surface, 0.5 * (out.vertices[e[0]] + out.vertices[e[1]])));
  }
  return out;
}

inline SurfaceMesh lift_to_surface(const SurfaceMesh& mesh, const ImplicitSurface& surface, int s) {
  if (s != 1 && s != 2) throw std::invalid_argument("geometry degree must be 1 or 2");
  return lift_to_surface(mesh, surface, s == 2 ? GeometryMode::quadratic : GeometryMode::affine);
}

/// 1 -> 4 split at edge midpoints projected onto M; the vertex of edge e is
/// V + e.
inline SurfaceMesh refine(const SurfaceMesh& mesh, const ImplicitSurface& surface) {
  SurfaceMesh out;
  out.vertices = mesh.vertices;
  const int nv = mesh.num_vertices();
  for (const auto& e : mesh.edges)
    out.vertices.push_back(closest_point(surface, 0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]])));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const int a = tri[0], b = tri[1], c = tri[2];
    const int mab = nv + mesh.tri_edges[t][0];
    const int mbc = nv + mesh.tri_edges[t][1];
    const int mca = nv + mesh.tri_edges[t][2];
    out.triangles.push_back({a, mab, mca});
    out.triangles.push_back({mab, b, mbc});
    out.triangles.push_back({mca, mbc, c});
    out.triangles.push_back({mab, mbc, mca});
  }
  out.build_edges();
  return lift_to_surface(out, surface, mesh.geometry);
}

inline SurfaceMesh base_mesh(const ImplicitSurface& surface) {
  if (surface.name() == "sphere") return icosahedron();
  if (const auto* t = dynamic_cast<const Torus*>(&surface)) return torus_mesh(*t);
  throw std::invalid_argument("no base mesh for surface '" + surface.name() + "'");
}

/// Levels 0..max_level of the refinement family with the given geometry.
inline std::vector<SurfaceMesh> mesh_family(const ImplicitSurface& surface, int max_level, GeometryMode mode) {
  std::vector<SurfaceMesh> out;
  SurfaceMesh m = lift_to_surface(base_mesh(surface), surface, mode);
  out.push_back(m);
  for (int l = 1; l <= max_level; ++l) {
    m = refine(m, surface);
    out.push_back(m);
  }
  return out;
}

inline void write_soff(std::ostream& os, const SurfaceMesh& m) {
  os << "SOFF " << m.degree() << "\n" << m.num_vertices() << " " << m.num_triangles() << "\n";
  os.precision(17);
  for (const Vec3& v : m.vertices) os << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : m.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  if (m.geometry == GeometryMode::quadratic)
    for (std::size_t e = 0; e < m.edges.size(); ++e)
      os << "edge-node " << m.edges[e][0] << " " << m.edges[e][1] << " " << m.edge_nodes[e].x() << " "
         << m.edge_nodes[e].y() << " " << m.edge_nodes[e].z() << "\n";
}

inline SurfaceMesh read_soff(std::istream& is) {
  std::string tag;
  int s = 0, nv = 0, nf = 0;
  if (!(is >> tag >> s) || tag != "SOFF") throw std::runtime_error("SOFF: bad header");
  if (!(is >> nv >> nf)) throw std::runtime_error("SOFF: bad counts");
  SurfaceMesh m;
  m.vertices.resize(nv);
  for (auto& v : m.vertices)
    if (!(is >> v.x() >> v.y() >> v.z())) throw std::runtime_error("SOFF: truncated vertices");
  m.triangles.resize(nf);
  for (auto& t : m.triangles) {
    int three = 0;
    if (!(is >> three >> t[0] >> t[1] >> t[2]) || three != 3) throw std::runtime_error("SOFF: bad face line");
    for (int i : t)
      if (i < 0 || i >= nv) throw std::runtime_error("SOFF: vertex index out of range");
  }
  m.build_edges();
  if (s == 2) {
    m.geometry = GeometryMode::quadratic;
    m.edge_nodes.assign(m.edges.size(), Vec3::Zero());
    std::map<std::pair<int, int>, int> index;
    for (std::size_t e = 0; e < m.edges.size(); ++e) index[{m.edges[e][0], m.edges[e][1]}] = static_cast<int>(e);
    std::string word;
    std::size_t seen = 0;
    while (is >> word) {
      if (word != "edge-node") throw std::runtime_error("SOFF: unexpected token '" + word + "'");
      int i = 0, j = 0;
      Vec3 x;
      if (!(is >> i >> j >> x.x() >> x.y() >> x.z())) throw std::runtime_error("SOFF: bad edge-node line");
      auto it = index.find(std::minmax(i, j));
      if (it == index.end()) throw std::runtime_error("SOFF: edge-node for unknown edge");
      m.edge_nodes[it->second] = x;
      ++seen;
    }
    if (seen != m.edges.size()) throw std::runtime_error("SOFF: missing edge nodes");
  } else if (s != 1) {
    throw std::runtime_error("SOFF: unsupported degree " + std::to_string(s));
  }
  return m;
}

inline void write_soff(const std::string& path, const SurfaceMesh& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_soff(os, m);
}

inline SurfaceMesh read_soff(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_soff(is);
}

}  // namespace feec

#endif  // FEEC_MESH_HPP
