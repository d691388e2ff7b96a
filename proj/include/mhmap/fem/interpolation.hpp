#pragma once

#include <Eigen/Core>

#include "mhmap/errors.hpp"
#include "mhmap/fem/mesh.hpp"

namespace mhmap::fem {

/// Pointwise evaluation row of the P1 expansion at one point:
/// c(p) ~ free_row . x + dirichlet_row . gamma. Entries are barycentric
/// basis values, so they are non-negative and sum to one.
struct InterpRow {
  Eigen::VectorXd free_row;       // C^(i), length n
  Eigen::VectorXd dirichlet_row;  // D^(i), length n_phi - n
  int triangle = -1;
};

/// Locates `point` by linear scan with barycentric containment tests
/// (tolerance 1e-12, ties resolved to the lowest triangle index) and
/// distributes the barycentric weights by vertex marker.
inline InterpRow interp_row(const FemMesh& mesh, const Eigen::Vector2d& point) {
  constexpr double tol = 1e-12;
  const int n = mesh.free_count();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Eigen::Vector2d& p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double area2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                         (p1.y() - p0.y()) * (p2.x() - p0.x());
    const double w1 = ((point.x() - p0.x()) * (p2.y() - p0.y()) -
                       (point.y() - p0.y()) * (p2.x() - p0.x())) /
                      area2;
    const double w2 = ((p1.x() - p0.x()) * (point.y() - p0.y()) -
                       (p1.y() - p0.y()) * (point.x() - p0.x())) /
                      area2;
    const double w0 = 1.0 - w1 - w2;
    if (w0 < -tol || w1 < -tol || w2 < -tol) continue;

    InterpRow row;
    row.triangle = t;
    row.free_row = Eigen::VectorXd::Zero(n);
    row.dirichlet_row = Eigen::VectorXd::Zero(mesh.vertex_count() - n);
    const double w[3] = {w0, w1, w2};
    for (int a = 0; a < 3; ++a) {
      const int v = tri[a];
      const double weight = std::max(w[a], 0.0);
      if (mesh.markers[static_cast<std::size_t>(v)] == VertexMarker::DirichletBoundary) {
        row.dirichlet_row[v - n] += weight;
      } else {
        row.free_row[v] += weight;
      }
    }
    return row;
  }
  throw PointOutsideDomain("interp_row: point not contained in any triangle");
}

}  // namespace mhmap::fem
