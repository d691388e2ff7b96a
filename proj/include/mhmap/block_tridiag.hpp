#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "mhmap/errors.hpp"

namespace mhmap {

/// Cholesky-based direct solver for symmetric positive-definite
/// block-tridiagonal systems, O(K n^3) per factorization.
///
/// The matrix is given by diagonal blocks D_0..D_{K-1} and sub-diagonal
/// blocks B_1..B_{K-1} (block (j, j-1)); the upper triangle is implied
/// by symmetry. Factorization computes the Schur complements
///   S_0 = D_0,   S_j = D_j - B_j S_{j-1}^{-1} B_j^T
/// and caches their LLT factors together with M_j = S_{j-1}^{-1} B_j^T.
class BlockTridiagonalCholesky {
 public:
  void factor(const std::vector<Eigen::MatrixXd>& diag,
              const std::vector<Eigen::MatrixXd>& sub) {
    const std::size_t k = diag.size();
    if (k == 0 || sub.size() + 1 != k) {
      throw DimensionError("block tridiagonal: inconsistent block counts");
    }
    llt_.clear();
    coupling_.clear();
    llt_.reserve(k);
    coupling_.reserve(k);
    Eigen::MatrixXd schur = diag[0];
    for (std::size_t j = 0; j < k; ++j) {
      if (j > 0) {
        const Eigen::MatrixXd m = llt_[j - 1].solve(sub[j - 1].transpose());
        coupling_.push_back(m);
        schur = diag[j] - sub[j - 1] * m;
      }
      llt_.emplace_back(schur);
      if (llt_.back().info() != Eigen::Success) {
        throw SingularSystem("block tridiagonal matrix is not positive definite");
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const std::size_t k = llt_.size();
    const Eigen::Index n = llt_[0].matrixL().rows();
    if (rhs.size() != static_cast<Eigen::Index>(k) * n) {
      throw DimensionError("block tridiagonal solve: rhs size mismatch");
    }
    std::vector<Eigen::VectorXd> z(k);
    z[0] = rhs.segment(0, n);
    for (std::size_t j = 1; j < k; ++j) {
      z[j] = rhs.segment(static_cast<Eigen::Index>(j) * n, n) -
             coupling_[j - 1].transpose() * z[j - 1];
    }
    Eigen::VectorXd x(rhs.size());
    Eigen::VectorXd xj = llt_[k - 1].solve(z[k - 1]);
    x.segment(static_cast<Eigen::Index>(k - 1) * n, n) = xj;
    for (std::size_t j = k - 1; j-- > 0;) {
      xj = llt_[j].solve(z[j]) - coupling_[j] * xj;
      x.segment(static_cast<Eigen::Index>(j) * n, n) = xj;
    }
    return x;
  }

  bool factored() const { return !llt_.empty(); }
  std::size_t block_count() const { return llt_.size(); }

 private:
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt_;
  std::vector<Eigen::MatrixXd> coupling_;  // M_j = S_{j-1}^{-1} B_j^T
};

}  // namespace mhmap
