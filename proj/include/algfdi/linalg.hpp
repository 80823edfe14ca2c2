#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace algfdi {

/// Relative singular-value cutoff for rank decisions.
inline constexpr double kRankTolerance = 1e-10;

/// Condition-number limit beyond which a nominally full-rank matrix is
/// treated as rank deficient.
inline constexpr double kConditionLimit = 1e12;

inline int numeric_rank(const Eigen::MatrixXd& A) {
  if (A.size() == 0) {
    return 0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double cutoff = kRankTolerance * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      ++r;
    }
  }
  return r;
}

/// General Moore-Penrose inverse (no rank requirement): inverts singular
/// values above the relative cutoff and zeroes the rest.
inline Eigen::MatrixXd moore_penrose(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? kRankTolerance * s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/**
 * Pseudoinverse of a full-column-rank matrix, so that pinv(A) * A = I.
 * Fails loudly when the columns are (numerically) dependent rather than
 * returning a least-squares stand-in.
 */
inline Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& A) {
  if (A.rows() < A.cols()) {
    throw std::invalid_argument("pseudoinverse: more columns than rows");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || smax / smin > kConditionLimit) {
    throw std::runtime_error(
        "pseudoinverse: matrix is rank deficient (condition number exceeds "
        "1e12)");
  }
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Left annihilator of a full-column-rank D: the orthogonal projector
/// I - D * pinv(D), satisfying (I - D D^+) D = 0.
inline Eigen::MatrixXd left_annihilator(const Eigen::MatrixXd& D) {
  const Eigen::Index n = D.rows();
  return Eigen::MatrixXd::Identity(n, n) - D * pseudoinverse(D);
}

/// Orthonormal basis of the (right) nullspace of A, as a k x (k - rank A)
/// matrix with A * result = 0. Empty when A has full column rank.
inline Eigen::MatrixXd right_annihilator(const Eigen::MatrixXd& A) {
  const Eigen::Index k = A.cols();
  if (A.size() == 0) {
    return Eigen::MatrixXd::Identity(k, k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = kRankTolerance * s(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      ++r;
    }
  }
  return svd.matrixV().rightCols(k - r);
}

} // namespace algfdi
