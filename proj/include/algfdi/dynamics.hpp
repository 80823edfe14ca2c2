#pragma once

#include "algfdi/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace algfdi {

/**
 * A rigid-joint mechanical model
 *
 *   M(q) qdd + C(q, qd) qd + G(q) = u + F(q, qd) f + D(q, qd) d
 *
 * given as pure evaluators plus dimensions. Models are immutable and safe
 * to share between threads.
 */
struct MechanicalModel {
  int n;   // joints
  int n_f; // fault channels
  int n_d; // disturbance channels

  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> mass;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      coriolis;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gravity;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      fault_input;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      disturbance_input;
};

/// SCARA physical parameters (masses kg, inertias kg m^2, lengths m).
struct ScaraParams {
  double m1 = 10.0;
  double m2 = 5.0;
  double m3 = 2.35;
  double J1 = 0.088;
  double J2 = 0.0315;
  double J3 = 0.005;
  double l1 = 0.325;
  double l1s = 0.1625;
  double l2 = 0.275;
  double l2s = 0.1375;
  double g = 9.81;

  // lumped constants; always recomputed from the physical values
  double theta1() const {
    return J1 + J2 + J3 + l1 * l1 * m2 + l1 * l1 * m3 + l2 * l2 * m3 +
           l1s * l1s * m1 + l2s * l2s * m2;
  }
  double theta2() const { return l1 * l2 * m3 + l1 * l2s * m2; }
  double theta3() const { return m3 * l2 * l2 + m2 * l2s * l2s + J2 + J3; }

  void validate() const {
    const double vals[] = {m1, m2, m3, J1, J2, J3, l1, l1s, l2, l2s};
    for (double v : vals) {
      if (!(v > 0.0)) {
        throw std::invalid_argument(
            "ScaraParams: masses, inertias and lengths must be positive");
      }
    }
  }
};

/**
 * Three-joint SCARA (two revolute, one vertical prismatic) with actuator
 * faults on the first two joints and one force disturbance acting at the
 * tool point, so n = 3, n_f = 2, n_d = 1.
 */
inline MechanicalModel scara_model(const ScaraParams& p) {
  p.validate();
  const double th1 = p.theta1();
  const double th2 = p.theta2();
  const double th3 = p.theta3();
  const double m3 = p.m3;
  const double g = p.g;
  const double l1 = p.l1;
  const double l2 = p.l2;

  MechanicalModel model;
  model.n = 3;
  model.n_f = 2;
  model.n_d = 1;

  model.mass = [th1, th2, th3, m3](const Eigen::VectorXd& q) {
    const double c2 = std::cos(q(1));
    Eigen::MatrixXd M(3, 3);
    M << th1 + 2.0 * th2 * c2, th3 + th2 * c2, 0.0, //
        th3 + th2 * c2, th3, 0.0,                   //
        0.0, 0.0, m3;
    return M;
  };

  model.coriolis = [th2](const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
    const double s2 = std::sin(q(1));
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 3);
    C(0, 0) = -qd(1) * th2 * s2;
    C(0, 1) = -(qd(0) + qd(1)) * th2 * s2;
    C(1, 0) = th2 * qd(0) * s2;
    return C;
  };

  model.gravity = [m3, g](const Eigen::VectorXd&) {
    Eigen::VectorXd G = Eigen::VectorXd::Zero(3);
    G(2) = m3 * g;
    return G;
  };

  model.fault_input = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 2);
    F(0, 0) = 1.0;
    F(1, 1) = 1.0;
    return F;
  };

  model.disturbance_input = [l1, l2](const Eigen::VectorXd& q,
                                     const Eigen::VectorXd&) {
    Eigen::MatrixXd D(3, 1);
    D(0, 0) = l2 * std::cos(q(0) + q(1)) + l1 * std::cos(q(0));
    D(1, 0) = l2 * std::cos(q(0) + q(1));
    D(2, 0) = 1.0;
    return D;
  };

  return model;
}

/**
 * Solve M(q) qdd = u + F f + D d - C(q, qd) qd - G(q) for the joint
 * accelerations via Cholesky factorization of the (symmetric positive
 * definite) mass matrix.
 */
inline Eigen::VectorXd
forward_dynamics(const MechanicalModel& model, const Eigen::VectorXd& q,
                 const Eigen::VectorXd& qd, const Eigen::VectorXd& u,
                 const Eigen::VectorXd& f, const Eigen::VectorXd& d) {
  const Eigen::MatrixXd M = model.mass(q);
  const Eigen::VectorXd rhs = u + model.fault_input(q, qd) * f +
                              model.disturbance_input(q, qd) * d -
                              model.coriolis(q, qd) * qd - model.gravity(q);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "forward_dynamics: mass matrix is not positive definite at the "
        "given configuration");
  }
  return llt.solve(rhs);
}

} // namespace algfdi
