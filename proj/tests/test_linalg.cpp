#include "algfdi/dynamics.hpp"
#include "algfdi/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

using namespace algfdi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("pseudoinverse of identity and unit column") {
  const MatrixXd I3 = MatrixXd::Identity(3, 3);
  CHECK((pseudoinverse(I3) - I3).cwiseAbs().maxCoeff() < 1e-14);

  MatrixXd e3(3, 1);
  e3 << 0.0, 0.0, 1.0;
  const MatrixXd pinv = pseudoinverse(e3);
  REQUIRE(pinv.rows() == 1);
  REQUIRE(pinv.cols() == 3);
  CHECK(pinv(0, 0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(pinv(0, 1) == Catch::Approx(0.0).margin(1e-15));
  CHECK(pinv(0, 2) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pseudoinverse of the SCARA disturbance column at the origin") {
  const ScaraParams p;
  const auto model = scara_model(p);
  const VectorXd q = VectorXd::Zero(3);
  const VectorXd qd = VectorXd::Zero(3);
  const MatrixXd D = model.disturbance_input(q, qd);
  REQUIRE(D.rows() == 3);
  // closed form for a single column: D^+ = D^T / |D|^2
  const double norm2 = 0.6 * 0.6 + 0.275 * 0.275 + 1.0;
  CHECK(D(0, 0) == Catch::Approx(0.6).epsilon(1e-14));
  CHECK(D(1, 0) == Catch::Approx(0.275).epsilon(1e-14));
  CHECK(D(2, 0) == 1.0);
  const MatrixXd pinv = pseudoinverse(D);
  for (int j = 0; j < 3; ++j) {
    CHECK(pinv(0, j) == Catch::Approx(D(j, 0) / norm2).epsilon(1e-12));
  }
  const MatrixXd left = pinv * D;
  CHECK(left(0, 0) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("pseudoinverse rejects rank-deficient input") {
  MatrixXd A(3, 2);
  A << 1.0, 2.0, 2.0, 4.0, -1.0, -2.0; // parallel columns
  CHECK_THROWS_AS(pseudoinverse(A), std::runtime_error);
}

TEST_CASE("left annihilator of the third unit vector") {
  MatrixXd e3(3, 1);
  e3 << 0.0, 0.0, 1.0;
  const MatrixXd P = left_annihilator(e3);
  MatrixXd expect = MatrixXd::Identity(3, 3);
  expect(2, 2) = 0.0;
  CHECK((P - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("left annihilator kills its column and projects idempotently") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    MatrixXd D(4, 2);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 2; ++j) {
        D(i, j) = uni(rng);
      }
    }
    if (numeric_rank(D) < 2) {
      continue;
    }
    const MatrixXd P = left_annihilator(D);
    CHECK((P * D).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("right annihilator shapes and nullspace property") {
  const MatrixXd I2 = MatrixXd::Identity(2, 2);
  CHECK(right_annihilator(I2).cols() == 0);

  MatrixXd A(2, 2);
  A << 1.0, 0.0, 0.0, 0.0;
  const MatrixXd N = right_annihilator(A);
  REQUIRE(N.cols() == 1);
  CHECK(std::abs(N(0, 0)) < 1e-14);
  CHECK(std::abs(N(1, 0)) == Catch::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    VectorXd u(3), v(2);
    for (int i = 0; i < 3; ++i) {
      u(i) = uni(rng);
    }
    for (int i = 0; i < 2; ++i) {
      v(i) = uni(rng);
    }
    const MatrixXd R = u * v.transpose(); // 3x2, rank 1
    const MatrixXd RN = right_annihilator(R);
    REQUIRE(RN.cols() == 1);
    CHECK((R * RN).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(numeric_rank(RN) == 1);
  }
}
