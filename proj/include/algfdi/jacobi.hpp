#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace algfdi {

/**
 * Classical and orthonormal Jacobi polynomials for a fixed weight
 * (1-tau)^alpha (1+tau)^beta on [-1, 1].
 *
 * The classical members follow the convention P_n(1) = binom(n+alpha, n)
 * and are generated by the three-term recurrence. Orthonormal members are
 * the classical ones divided by the square root of their weighted norm;
 * the norm constants come from the closed-form Gamma expression and are
 * cross-checked against quadrature in the test suite.
 *
 * Immutable after construction; all member functions are pure.
 */
class JacobiBasis {
public:
  JacobiBasis(double alpha, double beta, int max_degree = 16)
      : alpha_(alpha), beta_(beta), max_degree_(max_degree) {
    if (!(alpha > -1.0) || !(beta > -1.0)) {
      throw std::invalid_argument(
          "JacobiBasis: alpha and beta must both exceed -1");
    }
    if (max_degree < 0) {
      throw std::invalid_argument("JacobiBasis: max_degree must be >= 0");
    }
    norms_.reserve(static_cast<std::size_t>(max_degree) + 1);
    for (int n = 0; n <= max_degree; ++n) {
      norms_.push_back(compute_norm(n));
    }
  }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int max_degree() const { return max_degree_; }

  /// Classical (unnormalized) P_n at tau in [-1, 1].
  double eval_classical(int n, double tau) const {
    check_degree(n);
    check_domain(tau);
    return recurrence_value(n, tau);
  }

  /// Squared weighted norm h_n of the classical polynomial of degree n.
  double norm_constant(int n) const {
    check_degree(n);
    return norms_[static_cast<std::size_t>(n)];
  }

  /// Orthonormal member: classical / sqrt(h_n).
  double eval_orthonormal(int n, double tau) const {
    return eval_classical(n, tau) / std::sqrt(norm_constant(n));
  }

  /// Weight (1-tau)^alpha (1+tau)^beta inside [-1,1], exactly 0 outside.
  double weight(double tau) const {
    if (tau < -1.0 || tau > 1.0) {
      return 0.0;
    }
    return std::pow(1.0 - tau, alpha_) * std::pow(1.0 + tau, beta_);
  }

  /**
   * The n real simple roots of the classical degree-n polynomial, ascending.
   *
   * Computed as eigenvalues of the symmetric tridiagonal Jacobi matrix of
   * the recurrence, which keeps them real and well conditioned without
   * initial guesses.
   */
  std::vector<double> zeros(int n) const {
    check_degree(n);
    if (n < 1) {
      throw std::invalid_argument("JacobiBasis::zeros: degree must be >= 1");
    }
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
    const double a = alpha_;
    const double b = beta_;
    for (int k = 0; k < n; ++k) {
      if (k == 0) {
        // limit form, also valid when alpha + beta == 0
        diag(0) = (b - a) / (a + b + 2.0);
      } else {
        const double s = 2.0 * k + a + b;
        diag(k) = (b * b - a * a) / (s * (s + 2.0));
      }
    }
    for (int k = 1; k < n; ++k) {
      double bk;
      if (k == 1) {
        // the (k+alpha+beta) factor cancels the (2k+alpha+beta-1) factor
        bk = 4.0 * (1.0 + a) * (1.0 + b) /
             ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b));
      } else {
        const double s = 2.0 * k + a + b;
        bk = 4.0 * k * (k + a) * (k + b) * (k + a + b) /
             (s * s * (s + 1.0) * (s - 1.0));
      }
      sub(k - 1) = std::sqrt(bk);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> roots(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      roots[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    }
    return roots;
  }

  /// Monomial coefficients (ascending powers) of the classical polynomial.
  std::vector<double> classical_coefficients(int n) const {
    check_degree(n);
    const double a = alpha_;
    const double b = beta_;
    std::vector<double> pm2{1.0};
    if (n == 0) {
      return pm2;
    }
    std::vector<double> pm1{0.5 * (a - b), 0.5 * (a + b + 2.0)};
    if (n == 1) {
      return pm1;
    }
    std::vector<double> pn;
    for (int m = 2; m <= n; ++m) {
      const double c = 2.0 * m + a + b;
      const double denom = 2.0 * m * (m + a + b) * (c - 2.0);
      const double coef_tau = (c - 1.0) * c * (c - 2.0) / denom;
      const double coef_const = (c - 1.0) * (a * a - b * b) / denom;
      const double coef_prev = 2.0 * (m + a - 1.0) * (m + b - 1.0) * c / denom;
      pn.assign(static_cast<std::size_t>(m) + 1, 0.0);
      for (std::size_t j = 0; j < pm1.size(); ++j) {
        pn[j + 1] += coef_tau * pm1[j];
        pn[j] += coef_const * pm1[j];
      }
      for (std::size_t j = 0; j < pm2.size(); ++j) {
        pn[j] -= coef_prev * pm2[j];
      }
      pm2 = pm1;
      pm1 = pn;
    }
    return pm1;
  }

  /// Monomial coefficients of the orthonormal member.
  std::vector<double> orthonormal_coefficients(int n) const {
    std::vector<double> c = classical_coefficients(n);
    const double scale = 1.0 / std::sqrt(norm_constant(n));
    for (double& v : c) {
      v *= scale;
    }
    return c;
  }

private:
  void check_degree(int n) const {
    if (n < 0 || n > max_degree_) {
      throw std::out_of_range("JacobiBasis: degree out of range");
    }
  }

  static void check_domain(double tau) {
    if (tau < -1.0 || tau > 1.0) {
      throw std::domain_error("JacobiBasis: tau outside [-1, 1]");
    }
  }

  double recurrence_value(int n, double tau) const {
    const double a = alpha_;
    const double b = beta_;
    double pm2 = 1.0;
    if (n == 0) {
      return pm2;
    }
    double pm1 = 0.5 * ((a + b + 2.0) * tau + (a - b));
    for (int m = 2; m <= n; ++m) {
      const double c = 2.0 * m + a + b;
      const double denom = 2.0 * m * (m + a + b) * (c - 2.0);
      const double pn = ((c - 1.0) * (c * (c - 2.0) * tau + a * a - b * b) * pm1 -
                         2.0 * (m + a - 1.0) * (m + b - 1.0) * c * pm2) /
                        denom;
      pm2 = pm1;
      pm1 = pn;
    }
    return pm1;
  }

  double compute_norm(int n) const {
    const double a = alpha_;
    const double b = beta_;
    if (n == 0) {
      // 2^(a+b+1) * B(a+1, b+1); safe when a + b + 1 == 0
      return std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                      std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
    }
    const double log_h = (a + b + 1.0) * std::log(2.0) +
                         std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) -
                         std::lgamma(n + a + b + 1.0) - std::lgamma(n + 1.0);
    return std::exp(log_h) / (2.0 * n + a + b + 1.0);
  }

  double alpha_;
  double beta_;
  int max_degree_;
  std::vector<double> norms_;
};

} // namespace algfdi
