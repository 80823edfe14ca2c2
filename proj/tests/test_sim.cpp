#include "algfdi/sim.hpp"
#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

using namespace algfdi;
using Eigen::VectorXd;

namespace {

Scenario quiet_scenario() {
  Scenario s;
  s.noise_enabled = false;
  s.faults_enabled = false;
  s.disturbance_enabled = false;
  return s;
}

double settled_mid_crossing(const std::vector<double>& t,
                            const std::vector<double>& v, double onset,
                            double settled) {
  const double half = 0.5 * settled;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] <= onset) {
      continue;
    }
    if (v[k - 1] < half && v[k] >= half) {
      const double frac = (half - v[k - 1]) / (v[k] - v[k - 1]);
      return t[k - 1] + frac * (t[k] - t[k - 1]);
    }
  }
  return -1.0;
}

} // namespace

TEST_CASE("disturbance signal matches its schedule") {
  const DisturbanceSpec d{};
  CHECK(disturbance_signal(d, 0.4) == 0.0);
  CHECK(disturbance_signal(d, 0.5) ==
        Catch::Approx(10.0 + 2.0 * std::sin(1.0)).epsilon(1e-14));
  for (double t = 0.6; t < 60.0; t += 0.37) {
    const double v = disturbance_signal(d, t);
    CHECK(v >= 8.0);
    CHECK(v <= 12.0);
  }
}

TEST_CASE("fault signal steps at the scheduled onsets") {
  const std::vector<FaultStep> sched{{1.0, 10.0}, {3.0, 10.0}};
  CHECK(fault_signal(sched, 0.9).isZero());
  const VectorXd f2 = fault_signal(sched, 2.0);
  CHECK(f2(0) == 10.0);
  CHECK(f2(1) == 0.0);
  const VectorXd f4 = fault_signal(sched, 4.0);
  CHECK(f4(0) == 10.0);
  CHECK(f4(1) == 10.0);
}

TEST_CASE("triple-pole gains") {
  const auto g = ControllerGains::triple_pole(-10.0);
  CHECK(g.kp == Catch::Approx(300.0));
  CHECK(g.kd == Catch::Approx(30.0));
  CHECK(g.ki == Catch::Approx(1000.0));
}

TEST_CASE("controller at rest on the reference outputs pure gravity torque") {
  const auto model = scara_model(ScaraParams{});
  TrackingController ctrl(model, ControllerGains::triple_pole(-10.0), 0.005);
  QuadraticSpline::Sample ref{VectorXd::Zero(3), VectorXd::Zero(3),
                              VectorXd::Zero(3)};
  ref.q << 0.3, 0.2, 0.25;
  const VectorXd u = ctrl.step(ref.q, VectorXd::Zero(3), ref);
  const VectorXd g = model.gravity(ref.q);
  CHECK((u - g).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("default reference stays inside the waypoint hull with margin") {
  const QuadraticSpline spline(Scenario::default_waypoints());
  Eigen::Vector3d lo(1e9, 1e9, 1e9), hi(-1e9, -1e9, -1e9);
  for (const auto& w : Scenario::default_waypoints()) {
    lo = lo.cwiseMin(Eigen::Vector3d(w.q));
    hi = hi.cwiseMax(Eigen::Vector3d(w.q));
  }
  const Eigen::Vector3d margin = 0.1 * (hi - lo);
  for (double t = 0.0; t <= 4.5; t += 0.001) {
    const auto s = spline.eval(t);
    for (int i = 0; i < 3; ++i) {
      CHECK(s.q(i) >= lo(i) - margin(i));
      CHECK(s.q(i) <= hi(i) + margin(i));
    }
  }
}

TEST_CASE("closed-loop tracking error stays small on the quiet run") {
  SimTrace trace;
  const RunRecord rec = run_scenario(quiet_scenario(), &trace);
  REQUIRE(rec.rows() == 1001);
  double max_err = 0.0;
  for (std::size_t k = 0; k < rec.rows(); ++k) {
    for (int j = 0; j < 3; ++j) {
      const double e = std::abs(trace.q[k](j) -
                                rec.columns[4 + static_cast<std::size_t>(j)][k]);
      max_err = std::max(max_err, e);
    }
  }
  CHECK(max_err < 5e-3);
}

TEST_CASE("plant bookkeeping: raw residual vanishes on exact quiet signals") {
  SimTrace trace;
  const auto scenario = quiet_scenario();
  run_scenario(scenario, &trace);
  const auto model = scara_model(scenario.params);
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.q.size(); ++k) {
    const VectorXd r = residual_raw(model, trace.q[k], trace.qd[k],
                                    trace.qdd[k], trace.u_applied[k]);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("quiet run: estimates settle below the discretization floor") {
  const RunRecord rec = run_scenario(quiet_scenario());
  const std::size_t warmup = 2 * 20 - 1 + 5;
  double worst = 0.0;
  for (std::size_t k = warmup; k < rec.rows(); ++k) {
    worst = std::max(worst, std::abs(rec.column("fest1")[k]));
    worst = std::max(worst, std::abs(rec.column("fest2")[k]));
  }
  CHECK(worst < 0.2);
}

TEST_CASE("reference continuity is bounded by the top speed") {
  const RunRecord rec = run_scenario(quiet_scenario());
  const QuadraticSpline spline(Scenario::default_waypoints());
  double vmax = 0.0;
  for (double t = 0.0; t <= 4.5; t += 0.0005) {
    vmax = std::max(vmax, spline.eval(t).qd.cwiseAbs().maxCoeff());
  }
  for (const char* col : {"y1s", "y2s", "y3s"}) {
    const auto& y = rec.column(col);
    for (std::size_t k = 1; k < y.size(); ++k) {
      CHECK(std::abs(y[k] - y[k - 1]) <= vmax * 0.005 + 1e-12);
    }
  }
}

TEST_CASE("paper run: both fault estimates step with the set delay") {
  Scenario s;
  s.noise_enabled = false;
  const RunRecord rec = run_scenario(s);
  const auto& t = rec.column("t");
  const double t_d = s.effective_delay();
  CHECK(t_d == Catch::Approx(0.1 / 3.0).epsilon(1e-12));

  const double c1 = settled_mid_crossing(t, rec.column("fest1"), 1.0, 10.0);
  const double c2 = settled_mid_crossing(t, rec.column("fest2"), 3.0, 10.0);
  CHECK(c1 == Catch::Approx(1.0 + t_d).margin(0.005));
  CHECK(c2 == Catch::Approx(3.0 + t_d).margin(0.005));

  CHECK(rec.column("fest1").back() == Catch::Approx(10.0).margin(0.2));
  CHECK(rec.column("fest2").back() == Catch::Approx(10.0).margin(0.2));
}

TEST_CASE("identical seeds reproduce the run bit for bit") {
  Scenario s;
  s.seed = 7;
  const RunRecord a = run_scenario(s);
  const RunRecord b = run_scenario(s);
  REQUIRE(a.rows() == b.rows());
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    for (std::size_t k = 0; k < a.columns[c].size(); ++k) {
      REQUIRE(a.columns[c][k] == b.columns[c][k]);
    }
  }
}

TEST_CASE("halving the internal step barely moves the final state") {
  const auto s = quiet_scenario();
  SimTrace t10, t20;
  run_scenario(s, &t10, 10);
  run_scenario(s, &t20, 20);
  VectorXd x10(6), x20(6);
  x10 << t10.q.back(), t10.qd.back();
  x20 << t20.q.back(), t20.qd.back();
  CHECK((x10 - x20).norm() < 1e-8);
}

TEST_CASE("noise channels carry the configured standard deviation") {
  Scenario s; // noise on, defaults
  const RunRecord rec = run_scenario(s);
  auto sample_std = [](const std::vector<double>& v) {
    double sum = 0.0, sum2 = 0.0;
    for (double x : v) {
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / static_cast<double>(v.size());
    return std::sqrt(sum2 / static_cast<double>(v.size()) - mean * mean);
  };
  for (const char* col : {"noise_y1", "noise_y2", "noise_y3"}) {
    CHECK(sample_std(rec.column(col)) == Catch::Approx(1.5e-4).epsilon(0.10));
  }
  for (const char* col : {"noise_u1", "noise_u2", "noise_u3"}) {
    CHECK(sample_std(rec.column(col)) == Catch::Approx(0.4).epsilon(0.10));
  }
}

TEST_CASE("residual estimator on recorded signals") {
  const auto model = scara_model(ScaraParams{});
  Scenario s = quiet_scenario();
  const RunRecord quiet = run_scenario(s);
  auto cfg = s.estimator_config();
  auto est = make_residual_estimator(model, cfg);

  double worst = 0.0;
  for (std::size_t k = 0; k < quiet.rows(); ++k) {
    VectorXd q(3), u(3);
    q << quiet.column("y1")[k], quiet.column("y2")[k], quiet.column("y3")[k];
    u << quiet.column("u1")[k], quiet.column("u2")[k], quiet.column("u3")[k];
    const auto r = est.update(q, u);
    if (r && k > static_cast<std::size_t>(est.warmup_updates()) + 5) {
      worst = std::max(worst, r->norm());
    }
  }
  CHECK(worst < 0.2);

  // with a step fault the dominant decoupled channel crosses half its
  // settled value about one delay after the onset
  Scenario sf = quiet_scenario();
  sf.faults_enabled = true;
  sf.faults = {{1.0, 10.0}, {99.0, 0.0}};
  const RunRecord faulty = run_scenario(sf);
  auto est2 = make_residual_estimator(model, cfg);
  std::vector<double> channel, time;
  for (std::size_t k = 0; k < faulty.rows(); ++k) {
    VectorXd q(3), u(3);
    q << faulty.column("y1")[k], faulty.column("y2")[k], faulty.column("y3")[k];
    u << faulty.column("u1")[k], faulty.column("u2")[k], faulty.column("u3")[k];
    const auto r = est2.update(q, u);
    time.push_back(faulty.column("t")[k]);
    channel.push_back(r ? (*r)(0) : 0.0);
  }
  const double settled = channel.back();
  CHECK(std::abs(settled) > 1.0);
  const double cross = settled_mid_crossing(time, channel, 1.0, settled);
  CHECK(cross == Catch::Approx(1.0 + s.effective_delay()).margin(0.01));
}

TEST_CASE("raising the order does not hurt the steady-state floor") {
  Scenario s1 = quiet_scenario();
  s1.disturbance_enabled = true;
  Scenario s2 = s1;
  s2.order = 2;
  const RunRecord r1 = run_scenario(s1);
  const RunRecord r2 = run_scenario(s2);
  auto floor_of = [](const RunRecord& r) {
    double worst = 0.0;
    for (std::size_t k = r.rows() - 60; k < r.rows(); ++k) {
      worst = std::max(worst, std::abs(r.column("fest1")[k]));
      worst = std::max(worst, std::abs(r.column("fest2")[k]));
    }
    return worst;
  };
  CHECK(floor_of(r2) <= floor_of(r1) + 1e-3);
}

TEST_CASE("product expansion along the recorded trajectory matches the oracle") {
  // window operator applied to cos(q2) * q1'' at t = 0.8, second derivative
  // carried by the kernels, against direct quadrature of the plain kernel
  // over interpolated exact signals
  Scenario s = quiet_scenario();
  s.disturbance_enabled = true;
  SimTrace trace;
  run_scenario(s, &trace);

  const double ts = s.ts;
  const int L = s.window_samples;
  const JacobiBasis basis(3.0, 3.0, 4);
  const WindowSpec w(ts, L, s.effective_delay());

  std::vector<FirFilter> coeff, mod2;
  for (int i = 0; i <= s.product_order; ++i) {
    coeff.push_back(fir_weights(KernelSpec::coefficient(basis, i, w)));
    mod2.push_back(fir_weights(KernelSpec::modified(basis, 1, w, i, 2)));
  }

  const std::size_t k_now = 160; // t = 0.8 s
  SignalWindow win_cos(L), win_q1(L);
  for (std::size_t k = k_now + 1 - static_cast<std::size_t>(L); k <= k_now;
       ++k) {
    win_cos.push(std::cos(trace.q[k](1)));
    win_q1.push(trace.q[k](0));
  }
  const auto got = approximate_product(coeff, mod2, win_cos, win_q1);
  REQUIRE(got.has_value());

  // Catmull-Rom interpolation of the traced exact signals
  auto interp = [&](const std::vector<Eigen::VectorXd>& sig, int comp,
                    double t) {
    const double pos = t / ts;
    const long i = static_cast<long>(pos);
    const double x = pos - static_cast<double>(i);
    const double p0 = sig[static_cast<std::size_t>(i - 1)](comp);
    const double p1 = sig[static_cast<std::size_t>(i)](comp);
    const double p2 = sig[static_cast<std::size_t>(i + 1)](comp);
    const double p3 = sig[static_cast<std::size_t>(i + 2)](comp);
    return p1 + 0.5 * x *
                    (p2 - p0 +
                     x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                          x * (3.0 * (p1 - p2) + p3 - p0)));
  };
  const Kernel plain(KernelSpec::plain(basis, 1, w));
  const double t_now = static_cast<double>(k_now) * ts;
  const double oracle = oracles::integrate(
      [&](double tb) {
        const double q2 = interp(trace.q, 1, t_now - tb);
        const double a1 = interp(trace.qdd, 0, t_now - tb);
        return std::cos(q2) * a1 * plain.value(tb);
      },
      0.0, w.T(), 1e-12);
  CHECK(*got == Catch::Approx(oracle).epsilon(0.02));
}
