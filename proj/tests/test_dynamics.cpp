#include "algfdi/dynamics.hpp"
#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

using namespace algfdi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec3(double a, double b, double c) {
  VectorXd v(3);
  v << a, b, c;
  return v;
}

} // namespace

TEST_CASE("lumped parameters from the default parameter set") {
  const ScaraParams p;
  // independent hand computation from the physical values
  const double th2_hand = 0.325 * 0.275 * 2.35 + 0.325 * 0.1375 * 5.0;
  CHECK(p.theta2() == Catch::Approx(th2_hand).epsilon(1e-15));

  const auto model = scara_model(p);
  const MatrixXd M = model.mass(vec3(0.0, 0.0, 0.2));
  CHECK(M(0, 0) == Catch::Approx(p.theta1() + 2.0 * th2_hand).epsilon(1e-14));
  CHECK(M(0, 1) == Catch::Approx(p.theta3() + th2_hand).epsilon(1e-14));
  CHECK(M(2, 2) == 2.35);
}

TEST_CASE("coriolis term vanishes at rest and gravity is the jack weight") {
  const auto model = scara_model(ScaraParams{});
  const VectorXd q = vec3(0.3, -1.1, 0.25);
  const VectorXd qd0 = VectorXd::Zero(3);
  CHECK((model.coriolis(q, qd0) * qd0).cwiseAbs().maxCoeff() == 0.0);

  const VectorXd G = model.gravity(q);
  CHECK(G(0) == 0.0);
  CHECK(G(1) == 0.0);
  CHECK(G(2) == Catch::Approx(2.35 * 9.81).epsilon(1e-15));
}

TEST_CASE("mass matrix is symmetric and positive definite across q2") {
  const auto model = scara_model(ScaraParams{});
  for (double q2 = -M_PI; q2 <= M_PI; q2 += M_PI / 16.0) {
    const MatrixXd M = model.mass(vec3(0.0, q2, 0.0));
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("Mdot - 2C is skew on the revolute block") {
  const auto model = scara_model(ScaraParams{});
  const VectorXd q = vec3(0.2, 0.9, 0.3);
  const VectorXd qd = vec3(0.5, -1.3, 0.2);
  const double h = 1e-6;
  const MatrixXd Mp = model.mass(q + h * qd);
  const MatrixXd Mm = model.mass(q - h * qd);
  const MatrixXd Mdot = (Mp - Mm) / (2.0 * h);
  const MatrixXd S = Mdot - 2.0 * model.coriolis(q, qd);
  const MatrixXd block = S.topLeftCorner(2, 2);
  CHECK((block + block.transpose()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("disturbance direction keeps full column rank at random states") {
  const auto model = scara_model(ScaraParams{});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-M_PI, M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd q = vec3(uni(rng), uni(rng), uni(rng));
    const VectorXd qd = vec3(uni(rng), uni(rng), uni(rng));
    CHECK(numeric_rank(model.disturbance_input(q, qd)) == 1);
  }
}

TEST_CASE("forward dynamics: gravity compensation and free fall") {
  const auto model = scara_model(ScaraParams{});
  const VectorXd q = vec3(0.4, 0.2, 0.3);
  const VectorXd qd = VectorXd::Zero(3);
  const VectorXd f = VectorXd::Zero(2);
  const VectorXd d = VectorXd::Zero(1);

  const VectorXd qdd_rest =
      forward_dynamics(model, q, qd, model.gravity(q), f, d);
  CHECK(qdd_rest.cwiseAbs().maxCoeff() < 1e-12);

  const VectorXd qdd_free =
      forward_dynamics(model, q, qd, VectorXd::Zero(3), f, d);
  CHECK(qdd_free(2) == Catch::Approx(-9.81).epsilon(1e-12));
}

TEST_CASE("passive swing conserves energy under RK4") {
  const ScaraParams p;
  const auto model = scara_model(p);
  // torque only compensates gravity on the prismatic joint
  const VectorXd u = vec3(0.0, 0.0, p.m3 * p.g);
  const VectorXd f = VectorXd::Zero(2);
  const VectorXd d = VectorXd::Zero(1);

  auto energy = [&](const VectorXd& x) {
    const VectorXd q = x.head(3);
    const VectorXd qd = x.tail(3);
    const double kinetic = 0.5 * qd.dot(model.mass(q) * qd);
    const double potential = p.m3 * p.g * q(2) - u(2) * q(2);
    return kinetic + potential;
  };
  auto deriv = [&](double, const VectorXd& x) {
    VectorXd dx(6);
    dx.head(3) = x.tail(3);
    dx.tail(3) = forward_dynamics(model, x.head(3), x.tail(3), u, f, d);
    return dx;
  };

  VectorXd x(6);
  x << 0.1, 0.6, 0.2, 1.0, -0.5, 0.0;
  const double e0 = energy(x);
  const double h = 0.0005; // Ts / 10
  for (int k = 0; k < 2000; ++k) {
    x = oracles::rk4_step(deriv, k * h, x, h);
  }
  CHECK(std::abs(energy(x) - e0) < 1e-5);
}
