#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "mhmap/errors.hpp"
#include "mhmap/fem/mesh.hpp"

namespace mhmap::fem {

/// Exact P1 element mass matrix: area/12 * [[2,1,1],[1,2,1],[1,1,2]].
inline Eigen::Matrix3d element_mass_matrix(double area) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (area / 12.0);
}

/// P1 element stiffness matrix lambda * integral(grad phi_i . grad phi_j)
/// from the opposite-edge vectors of the triangle.
inline Eigen::Matrix3d element_stiffness_matrix(const Eigen::Vector2d& p0,
                                                const Eigen::Vector2d& p1,
                                                const Eigen::Vector2d& p2,
                                                double diffusivity) {
  const Eigen::Vector2d e0 = p2 - p1;  // edge opposite vertex 0
  const Eigen::Vector2d e1 = p0 - p2;
  const Eigen::Vector2d e2 = p1 - p0;
  const double area2 = e2.x() * (-e1.y()) - e2.y() * (-e1.x());  // 2*area
  if (area2 <= 2e-14) throw DegenerateTriangle("element_stiffness_matrix: degenerate triangle");
  const std::array<Eigen::Vector2d, 3> e = {e0, e1, e2};
  Eigen::Matrix3d s;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      s(a, b) = diffusivity * e[static_cast<std::size_t>(a)].dot(e[static_cast<std::size_t>(b)]) /
                (2.0 * area2);
    }
  }
  return s;
}

/// Galerkin matrices of the diffusion PDE on the mesh.
///
/// `mass`, `stiffness` are the n x n blocks over the non-Dirichlet
/// vertices; `dirichlet_coupling` is the n x (n_phi - n) stiffness block
/// against the Dirichlet vertices. The full (unreduced) matrices are kept
/// for the conservation and kernel identities.
struct AssembledSystem {
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> dirichlet_coupling;
  Eigen::SparseMatrix<double> mass_full;
  Eigen::SparseMatrix<double> stiffness_full;
  Eigen::VectorXd dirichlet_values;  // gamma
  double diffusivity = 0.0;

  int state_dim() const { return static_cast<int>(mass.rows()); }

  /// Boundary load u = -S_D gamma of the semi-discrete model.
  Eigen::VectorXd boundary_load() const { return -dirichlet_coupling * dirichlet_values; }
};

inline AssembledSystem assemble(const FemMesh& mesh, double diffusivity,
                                double dirichlet_value) {
  mesh.validate();
  const int n_phi = mesh.vertex_count();
  const int n = mesh.free_count();
  std::vector<Eigen::Triplet<double>> mass_t;
  std::vector<Eigen::Triplet<double>> stiff_t;
  mass_t.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  stiff_t.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const double area = mesh.triangle_area(t);
    const Eigen::Matrix3d me = element_mass_matrix(area);
    const Eigen::Matrix3d se = element_stiffness_matrix(
        mesh.vertices[static_cast<std::size_t>(tri[0])],
        mesh.vertices[static_cast<std::size_t>(tri[1])],
        mesh.vertices[static_cast<std::size_t>(tri[2])], diffusivity);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        mass_t.emplace_back(tri[a], tri[b], me(a, b));
        stiff_t.emplace_back(tri[a], tri[b], se(a, b));
      }
    }
  }
  AssembledSystem sys;
  sys.diffusivity = diffusivity;
  sys.mass_full.resize(n_phi, n_phi);
  sys.mass_full.setFromTriplets(mass_t.begin(), mass_t.end());
  sys.stiffness_full.resize(n_phi, n_phi);
  sys.stiffness_full.setFromTriplets(stiff_t.begin(), stiff_t.end());
  // vertex ordering contract: free block is the leading n x n block
  sys.mass = sys.mass_full.topLeftCorner(n, n);
  sys.stiffness = sys.stiffness_full.topLeftCorner(n, n);
  sys.dirichlet_coupling = sys.stiffness_full.topRightCorner(n, n_phi - n);
  sys.dirichlet_values = Eigen::VectorXd::Constant(n_phi - n, dirichlet_value);
  return sys;
}

/// Implicit-Euler time discretization of M xdot + S x + S_D gamma = 0,
/// held as a cached sparse factorization of (M + Ts S). One step solves
///   (M + Ts S) x+ = M x + Ts u,    u = -S_D gamma,
/// algebraically identical to x+ = A x + B u with
/// A = (I + Ts M^{-1} S)^{-1}, B = A M^{-1} Ts.
class DiscreteModel {
 public:
  DiscreteModel(const AssembledSystem& assembled, double ts)
      : mass_(assembled.mass), load_(ts * assembled.boundary_load()), ts_(ts) {
    if (!(ts > 0.0)) throw InvalidParameter("DiscreteModel: sampling interval must be > 0");
    Eigen::SparseMatrix<double> lhs = assembled.mass + ts * assembled.stiffness;
    solver_.compute(lhs);
    if (solver_.info() != Eigen::Success) {
      throw SingularSystem("DiscreteModel: (M + Ts S) factorization failed");
    }
  }

  int state_dim() const { return static_cast<int>(mass_.rows()); }
  double sampling_interval() const { return ts_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x) const {
    if (x.size() != mass_.rows()) throw DimensionError("DiscreteModel::step: size mismatch");
    return solver_.solve(mass_ * x + load_);
  }

  /// Dense transition matrix A (column-by-column solve); intended for the
  /// estimator-scale mesh, not the fine truth mesh.
  Eigen::MatrixXd dense_transition() const {
    const int n = state_dim();
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd col(n);
    for (int j = 0; j < n; ++j) {
      col = mass_.col(j);
      a.col(j) = solver_.solve(col);
    }
    return a;
  }

  /// Constant input term B u = (M + Ts S)^{-1} Ts u.
  Eigen::VectorXd input_term() const { return solver_.solve(load_); }

 private:
  Eigen::SparseMatrix<double> mass_;
  Eigen::VectorXd load_;  // Ts * u
  double ts_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace mhmap::fem
