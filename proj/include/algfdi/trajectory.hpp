#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace algfdi {

struct Waypoint {
  double t;
  Eigen::VectorXd q;
};

/**
 * C1 piecewise-quadratic reference through joint-space waypoints.
 *
 * Knot velocities are the averaged neighbour chord slopes, zero at the
 * first and last waypoint; each span is split at its midpoint into two
 * quadratics so both endpoint slopes can be honored. This gives continuous
 * position and velocity, piecewise-constant acceleration, exact
 * interpolation of every waypoint, and rest at both ends. Outside the
 * waypoint range the reference holds the nearest endpoint at rest.
 */
class QuadraticSpline {
public:
  struct Sample {
    Eigen::VectorXd q;
    Eigen::VectorXd qd;
    Eigen::VectorXd qdd;
  };

  explicit QuadraticSpline(std::vector<Waypoint> waypoints)
      : wp_(std::move(waypoints)) {
    if (wp_.size() < 2) {
      throw std::invalid_argument("QuadraticSpline: need at least 2 waypoints");
    }
    const Eigen::Index dim = wp_.front().q.size();
    for (std::size_t i = 0; i < wp_.size(); ++i) {
      if (wp_[i].q.size() != dim) {
        throw std::invalid_argument(
            "QuadraticSpline: waypoint dimensions differ");
      }
      if (i > 0 && !(wp_[i].t > wp_[i - 1].t)) {
        throw std::invalid_argument(
            "QuadraticSpline: waypoint times must strictly increase");
      }
    }
    const std::size_t n = wp_.size();
    vel_.assign(n, Eigen::VectorXd::Zero(dim));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Eigen::VectorXd dl =
          (wp_[i].q - wp_[i - 1].q) / (wp_[i].t - wp_[i - 1].t);
      const Eigen::VectorXd dr =
          (wp_[i + 1].q - wp_[i].q) / (wp_[i + 1].t - wp_[i].t);
      vel_[i] = 0.5 * (dl + dr);
    }
  }

  Sample eval(double t) const {
    const Eigen::Index dim = wp_.front().q.size();
    Sample s{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim),
             Eigen::VectorXd::Zero(dim)};
    if (t <= wp_.front().t) {
      s.q = wp_.front().q;
      return s;
    }
    if (t >= wp_.back().t) {
      s.q = wp_.back().q;
      return s;
    }
    std::size_t i = 0;
    while (t > wp_[i + 1].t) {
      ++i;
    }
    const double t0 = wp_[i].t;
    const double t1 = wp_[i + 1].t;
    const double half = 0.5 * (t1 - t0);
    const Eigen::VectorXd& q0 = wp_[i].q;
    const Eigen::VectorXd& q1 = wp_[i + 1].q;
    const Eigen::VectorXd& v0 = vel_[i];
    const Eigen::VectorXd& v1 = vel_[i + 1];
    // midpoint slope so both halves integrate to the span displacement
    const Eigen::VectorXd vm =
        2.0 * (q1 - q0) / (t1 - t0) - 0.5 * (v0 + v1);
    if (t <= t0 + half) {
      const double s1 = t - t0;
      const Eigen::VectorXd a = (vm - v0) / half;
      s.q = q0 + v0 * s1 + 0.5 * a * s1 * s1;
      s.qd = v0 + a * s1;
      s.qdd = a;
    } else {
      const double s1 = t - (t0 + half);
      const Eigen::VectorXd qm = q0 + 0.5 * (v0 + vm) * half;
      const Eigen::VectorXd a = (v1 - vm) / half;
      s.q = qm + vm * s1 + 0.5 * a * s1 * s1;
      s.qd = vm + a * s1;
      s.qdd = a;
    }
    return s;
  }

  double start_time() const { return wp_.front().t; }
  double end_time() const { return wp_.back().t; }
  const std::vector<Waypoint>& waypoints() const { return wp_; }

private:
  std::vector<Waypoint> wp_;
  std::vector<Eigen::VectorXd> vel_;
};

} // namespace algfdi
