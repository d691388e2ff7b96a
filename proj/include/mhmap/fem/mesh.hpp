#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mhmap/errors.hpp"

namespace mhmap::fem {

enum class VertexMarker { Interior, NeumannBoundary, DirichletBoundary };

/// P1 triangulation with boundary markers.
///
/// Ordering contract: the non-Dirichlet vertices (interior and Neumann)
/// come first, followed by the Dirichlet vertices.
struct FemMesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<VertexMarker> markers;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  /// Number n of non-Dirichlet vertices (the FE state dimension).
  int free_count() const {
    return static_cast<int>(std::count_if(markers.begin(), markers.end(), [](VertexMarker m) {
      return m != VertexMarker::DirichletBoundary;
    }));
  }
  int dirichlet_count() const { return vertex_count() - free_count(); }

  double triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Eigen::Vector2d e1 = vertices[static_cast<std::size_t>(tri[1])] -
                               vertices[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d e2 = vertices[static_cast<std::size_t>(tri[2])] -
                               vertices[static_cast<std::size_t>(tri[0])];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }

  double total_area() const {
    double a = 0.0;
    for (int t = 0; t < triangle_count(); ++t) a += triangle_area(t);
    return a;
  }

  void validate() const {
    if (markers.size() != vertices.size()) {
      throw DimensionError("mesh: marker count mismatch");
    }
    bool seen_dirichlet = false;
    for (const auto m : markers) {
      if (m == VertexMarker::DirichletBoundary) {
        seen_dirichlet = true;
      } else if (seen_dirichlet) {
        throw InvalidParameter("mesh: non-Dirichlet vertex after a Dirichlet vertex");
      }
    }
    for (int t = 0; t < triangle_count(); ++t) {
      for (const int v : triangles[static_cast<std::size_t>(t)]) {
        if (v < 0 || v >= vertex_count()) {
          throw InvalidParameter("mesh: triangle vertex index out of range");
        }
      }
      if (triangle_area(t) <= 1e-14) {
        throw DegenerateTriangle("mesh: non-positive or degenerate triangle " +
                                 std::to_string(t));
      }
    }
  }
};

/// L-shaped domain used throughout: [0,3.1]x[0,2.0] plus [0,1.55]x[2.0,2.8]
/// (area exactly 7.44 m^2). The Dirichlet edge A-B is the bottom y = 0;
/// the remaining five edges carry the no-flux Neumann condition.
struct LshapeGeometry {
  static constexpr double width = 3.1;
  static constexpr double lower_height = 2.0;
  static constexpr double total_height = 2.8;
  static constexpr double upper_width = 1.55;
  static constexpr double area = 7.44;

  static bool contains(const Eigen::Vector2d& p, double margin = 0.0) {
    if (p.x() < margin || p.y() < margin) return false;
    if (p.y() <= lower_height - margin) return p.x() <= width - margin;
    if (p.y() <= total_height - margin) return p.x() <= upper_width - margin;
    return false;
  }
};

/// Structured triangulation of the L-shaped domain with target element
/// size `target_h` (deterministic; each grid cell split into two
/// positively oriented triangles).
inline FemMesh make_lshape_mesh(double target_h) {
  if (!(target_h > 0.0)) throw InvalidParameter("make_lshape_mesh: target_h must be > 0");
  using G = LshapeGeometry;
  const int nx = 2 * std::max(1, static_cast<int>(std::lround(G::width / (2.0 * target_h))));
  const int ny1 = std::max(1, static_cast<int>(std::lround(G::lower_height / target_h)));
  const int ny2 = std::max(1, static_cast<int>(std::lround((G::total_height - G::lower_height) / target_h)));
  const double hx = G::width / nx;
  const double hy1 = G::lower_height / ny1;
  const double hy2 = (G::total_height - G::lower_height) / ny2;
  const int nx_up = nx / 2;  // cells left of the notch (x <= 1.55)

  // grid index -> vertex id, -1 where the node is outside the domain
  const int ny = ny1 + ny2;
  std::vector<std::vector<int>> id(static_cast<std::size_t>(nx + 1),
                                   std::vector<int>(static_cast<std::size_t>(ny + 1), -1));
  FemMesh mesh;
  auto node = [&](int i, int j) -> Eigen::Vector2d {
    const double x = i * hx;
    const double y = j <= ny1 ? j * hy1 : G::lower_height + (j - ny1) * hy2;
    return {x, y};
  };
  auto in_domain = [&](int i, int j) { return j <= ny1 || i <= nx_up; };

  // free vertices first (j > 0), Dirichlet bottom row (j == 0) last
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j <= ny; ++j) {
      const bool dirichlet = j == 0;
      if ((pass == 0) == dirichlet) continue;
      for (int i = 0; i <= nx; ++i) {
        if (!in_domain(i, j)) continue;
        id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = mesh.vertex_count();
        mesh.vertices.push_back(node(i, j));
        VertexMarker m = VertexMarker::Interior;
        if (dirichlet) {
          m = VertexMarker::DirichletBoundary;
        } else if (i == 0 || j == ny || (j <= ny1 && i == nx) ||
                   (j >= ny1 && i == nx_up) || (j == ny1 && i >= nx_up)) {
          m = VertexMarker::NeumannBoundary;
        }
        mesh.markers.push_back(m);
      }
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!(in_domain(i, j) && in_domain(i + 1, j) && in_domain(i, j + 1) &&
            in_domain(i + 1, j + 1))) {
        continue;
      }
      const int v00 = id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const int v10 = id[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
      const int v01 = id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)];
      const int v11 = id[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)];
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.validate();
  return mesh;
}

namespace detail {

inline const char* marker_token(VertexMarker m) {
  switch (m) {
    case VertexMarker::Interior:
      return "interior";
    case VertexMarker::NeumannBoundary:
      return "neumann";
    case VertexMarker::DirichletBoundary:
      return "dirichlet";
  }
  return "interior";
}

inline VertexMarker parse_marker(const std::string& token, int line) {
  if (token == "interior") return VertexMarker::Interior;
  if (token == "neumann") return VertexMarker::NeumannBoundary;
  if (token == "dirichlet") return VertexMarker::DirichletBoundary;
  throw ParseError("unknown vertex marker '" + token + "'", line);
}

}  // namespace detail

/// Plain-text mesh format:
///   vertices <n_phi> triangles <n_T>
///   <xi> <eta> <interior|neumann|dirichlet>   (n_phi lines)
///   <i> <j> <k>                               (n_T lines)
inline void write_mesh(const FemMesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.vertex_count() << " triangles " << mesh.triangle_count()
      << "\n";
  out.precision(17);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    out << mesh.vertices[static_cast<std::size_t>(v)].x() << ' '
        << mesh.vertices[static_cast<std::size_t>(v)].y() << ' '
        << detail::marker_token(mesh.markers[static_cast<std::size_t>(v)]) << "\n";
  }
  for (const auto& t : mesh.triangles) {
    out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  }
}

inline void write_mesh(const FemMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open mesh file for writing: " + path, 0);
  write_mesh(mesh, out);
}

inline FemMesh read_mesh(std::istream& in) {
  FemMesh mesh;
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError("unexpected end of mesh file", lineno);
    ++lineno;
    return std::istringstream(line);
  };
  int n_phi = 0;
  int n_tri = 0;
  {
    auto header = next_line();
    std::string kw1, kw2;
    if (!(header >> kw1 >> n_phi >> kw2 >> n_tri) || kw1 != "vertices" ||
        kw2 != "triangles" || n_phi < 0 || n_tri < 0) {
      throw ParseError("malformed mesh header", lineno);
    }
  }
  for (int v = 0; v < n_phi; ++v) {
    auto row = next_line();
    double x = 0.0;
    double y = 0.0;
    std::string token;
    if (!(row >> x >> y >> token)) throw ParseError("malformed vertex line", lineno);
    mesh.vertices.emplace_back(x, y);
    mesh.markers.push_back(detail::parse_marker(token, lineno));
  }
  for (int t = 0; t < n_tri; ++t) {
    auto row = next_line();
    std::array<int, 3> tri{};
    if (!(row >> tri[0] >> tri[1] >> tri[2])) {
      throw ParseError("malformed triangle line", lineno);
    }
    mesh.triangles.push_back(tri);
  }
  mesh.validate();
  return mesh;
}

inline FemMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path, 0);
  return read_mesh(in);
}

}  // namespace mhmap::fem
