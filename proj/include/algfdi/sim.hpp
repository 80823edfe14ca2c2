#pragma once

#include "algfdi/dynamics.hpp"
#include "algfdi/fdi.hpp"
#include "algfdi/trajectory.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace algfdi {

struct FaultStep {
  double time;      // onset (s); the fault is 0 before and amplitude after
  double amplitude; // N m
};

/// d(t) = step(t - onset) * (offset + amplitude * sin(frequency * t))
struct DisturbanceSpec {
  double onset = 0.5;
  double offset = 10.0;
  double amplitude = 2.0;
  double frequency = 2.0;
};

inline double disturbance_signal(const DisturbanceSpec& spec, double t) {
  if (t < spec.onset) {
    return 0.0;
  }
  return spec.offset + spec.amplitude * std::sin(spec.frequency * t);
}

inline Eigen::VectorXd fault_signal(const std::vector<FaultStep>& schedule,
                                    double t) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(schedule.size()));
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    f(static_cast<Eigen::Index>(i)) =
        (t >= schedule[i].time) ? schedule[i].amplitude : 0.0;
  }
  return f;
}

/// Detection threshold shipped with the default scenario; the value the
/// calibration command recommends for the default noise model (see
/// recommend_threshold).
inline constexpr double kDefaultThreshold = 2.8;

/**
 * Complete description of one simulated experiment: plant parameters,
 * reference motion, controller pole, estimator configuration, fault and
 * disturbance schedules, noise model and seed.
 */
struct Scenario {
  ScaraParams params{};
  std::vector<Waypoint> waypoints = default_waypoints();
  double lambda = -10.0; // triple closed-loop pole per joint

  double ts = 0.005;
  int window_samples = 20;
  double alpha = 3.0;
  double beta = 3.0;
  int order = 1;
  int product_order = 2;
  double delay = -1.0; // < 0 selects the error-cancelling delay

  std::vector<FaultStep> faults{{1.0, 10.0}, {3.0, 10.0}};
  DisturbanceSpec disturbance{};
  Eigen::VectorXd sigma_y = Eigen::VectorXd::Constant(3, 1.5e-4);
  Eigen::VectorXd sigma_u = Eigen::VectorXd::Constant(3, 0.4);
  std::uint64_t seed = 42;
  double duration = 5.0;

  double threshold = kDefaultThreshold; // per fault channel
  int hold = 3;

  bool noise_enabled = true;
  bool faults_enabled = true;
  bool disturbance_enabled = true;

  static std::vector<Waypoint> default_waypoints() {
    auto v = [](double a, double b, double c) {
      Eigen::VectorXd q(3);
      q << a, b, c;
      return q;
    };
    return {{0.0, v(0.4, 0.0, 0.25)},
            {1.5, v(0.15, 0.7, 0.15)},
            {3.0, v(0.3, 0.35, 0.45)},
            {4.5, v(0.4, 0.0, 0.25)}};
  }

  double window_length() const { return ts * window_samples; }

  double effective_delay() const {
    if (delay >= 0.0) {
      return delay;
    }
    return default_delay(JacobiBasis(alpha, beta, order + 1), order,
                         window_length());
  }

  ResidualConfig estimator_config() const {
    return ResidualConfig{
        .alpha = alpha,
        .beta = beta,
        .order = order,
        .product_order = product_order,
        .window = WindowSpec(ts, window_samples, effective_delay()),
        .thresholds = Eigen::VectorXd::Constant(2, threshold),
        .hold = hold};
  }

  void validate() const {
    params.validate();
    if (!(ts > 0.0)) {
      throw std::invalid_argument("Scenario: ts must be positive");
    }
    if (window_samples < 1) {
      throw std::invalid_argument("Scenario: window_samples must be >= 1");
    }
    if (waypoints.size() < 2) {
      throw std::invalid_argument("Scenario: need at least 2 waypoints");
    }
    if (duration < waypoints.back().t) {
      throw std::invalid_argument(
          "Scenario: duration must cover the last waypoint");
    }
    if (faults.size() != 2) {
      throw std::invalid_argument(
          "Scenario: the SCARA plant has exactly 2 fault channels");
    }
    for (const auto& f : faults) {
      if (f.time < 0.0) {
        throw std::invalid_argument("Scenario: fault times must be >= 0");
      }
    }
    if (sigma_y.size() != 3 || sigma_u.size() != 3 ||
        sigma_y.minCoeff() < 0.0 || sigma_u.minCoeff() < 0.0) {
      throw std::invalid_argument(
          "Scenario: noise amplitudes must be three nonnegative values each");
    }
    if (!(threshold > 0.0) || hold < 1) {
      throw std::invalid_argument(
          "Scenario: threshold must be positive and hold >= 1");
    }
  }
};

struct ControllerGains {
  double kp;
  double kd;
  double ki;

  /// Gains placing the error dynamics at a triple pole s = lambda:
  /// (s - lambda)^3 = s^3 + 3|l| s^2 + 3 l^2 s + |l|^3.
  static ControllerGains triple_pole(double lambda) {
    const double a = std::abs(lambda);
    return ControllerGains{3.0 * a * a, 3.0 * a, a * a * a};
  }
};

/**
 * Computed-torque feedforward along the reference plus PI state feedback on
 * (e, edot, integral e), scaled by the reference mass matrix so the gains
 * act on unit-mass error channels. The integral state advances by explicit
 * Euler once per control step.
 */
class TrackingController {
public:
  TrackingController(MechanicalModel model, ControllerGains gains, double ts)
      : model_(std::move(model)), gains_(gains), ts_(ts),
        integral_(Eigen::VectorXd::Zero(model_.n)) {}

  Eigen::VectorXd step(const Eigen::VectorXd& q_meas, const Eigen::VectorXd& qd,
                       const QuadraticSpline::Sample& ref) {
    const Eigen::VectorXd e = q_meas - ref.q;
    const Eigen::VectorXd edot = qd - ref.qd;
    const Eigen::VectorXd v =
        ref.qdd - gains_.kp * e - gains_.kd * edot - gains_.ki * integral_;
    const Eigen::VectorXd u = model_.mass(ref.q) * v +
                              model_.coriolis(ref.q, ref.qd) * ref.qd +
                              model_.gravity(ref.q);
    integral_ += e * ts_;
    return u;
  }

  void reset() { integral_.setZero(); }
  const Eigen::VectorXd& integral_state() const { return integral_; }

private:
  MechanicalModel model_;
  ControllerGains gains_;
  double ts_;
  Eigen::VectorXd integral_;
};

/// Uniformly sampled multi-channel result of one run, column for column the
/// table the CLI writes.
struct RunRecord {
  static const std::vector<std::string>& column_names() {
    static const std::vector<std::string> names = {
        "t",        "y1",       "y2",       "y3",       "y1s",     "y2s",
        "y3s",      "u1",       "u2",       "u3",       "noise_y1", "noise_y2",
        "noise_y3", "noise_u1", "noise_u2", "noise_u3", "d",        "f1",
        "f2",       "fest1",    "fest2"};
    return names;
  }

  std::vector<std::vector<double>> columns{column_names().size()};

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }

  const std::vector<double>& column(const std::string& name) const {
    const auto& names = column_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) {
        return columns[i];
      }
    }
    throw std::out_of_range("RunRecord: no column named " + name);
  }
};

/// Exact plant-side signals at the record sample times, for validation:
/// true state, applied torque, and the acceleration consistent with them.
struct SimTrace {
  std::vector<Eigen::VectorXd> q, qd, qdd, u_applied, fault, disturbance;
};

class SimulationDiverged : public std::runtime_error {
public:
  explicit SimulationDiverged(double t)
      : std::runtime_error("simulation diverged (non-finite state) at t = " +
                           std::to_string(t)),
        time(t) {}
  double time;
};

/**
 * Run the closed-loop experiment: RK4 plant integration at ts/10 between
 * control samples, controller and noise updated at ts with zero-order hold,
 * fault estimator fed the measured positions and the commanded torque plus
 * its own noise channel. The plant receives the commanded torque plus an
 * independent process-noise draw. Deterministic for a fixed scenario.
 *
 * Estimate channels hold 0 until the estimator finishes warming up
 * (2 L - 1 samples).
 */
inline RunRecord run_scenario(const Scenario& scenario,
                              SimTrace* trace = nullptr, int substeps = 10) {
  scenario.validate();
  if (substeps < 1) {
    throw std::invalid_argument("run_scenario: substeps must be >= 1");
  }
  const MechanicalModel model = scara_model(scenario.params);
  const QuadraticSpline spline(scenario.waypoints);
  TrackingController controller(
      model, ControllerGains::triple_pole(scenario.lambda), scenario.ts);
  StreamingEstimator estimator =
      make_fault_estimator(model, scenario.estimator_config());

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw3 = [&](const Eigen::VectorXd& sigma) {
    Eigen::VectorXd v(3);
    for (int i = 0; i < 3; ++i) {
      // always consume the stream so toggling scales, not sequences
      const double g = gauss(rng);
      v(i) = scenario.noise_enabled ? sigma(i) * g : 0.0;
    }
    return v;
  };

  const long steps = std::lround(scenario.duration / scenario.ts);
  RunRecord record;
  for (auto& col : record.columns) {
    col.reserve(static_cast<std::size_t>(steps) + 1);
  }

  Eigen::VectorXd q = scenario.waypoints.front().q;
  Eigen::VectorXd qd = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd fest_idle = Eigen::VectorXd::Zero(2);

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * scenario.ts;
    const Eigen::VectorXd noise_y = draw3(scenario.sigma_y);
    const Eigen::VectorXd noise_u_proc = draw3(scenario.sigma_u);
    const Eigen::VectorXd noise_u_est = draw3(scenario.sigma_u);

    const Eigen::VectorXd q_meas = q + noise_y;
    const auto ref = spline.eval(t);
    const Eigen::VectorXd u_cmd = controller.step(q_meas, qd, ref);
    const Eigen::VectorXd u_applied = u_cmd + noise_u_proc;
    const Eigen::VectorXd u_est = u_cmd + noise_u_est;

    const double d_now =
        scenario.disturbance_enabled
            ? disturbance_signal(scenario.disturbance, t)
            : 0.0;
    const Eigen::VectorXd f_now = scenario.faults_enabled
                                      ? fault_signal(scenario.faults, t)
                                      : Eigen::VectorXd::Zero(2);

    const auto fest = estimator.update(q_meas, u_est);
    const Eigen::VectorXd& fest_row = fest ? *fest : fest_idle;

    const double row[] = {t,
                          q_meas(0),
                          q_meas(1),
                          q_meas(2),
                          ref.q(0),
                          ref.q(1),
                          ref.q(2),
                          u_cmd(0),
                          u_cmd(1),
                          u_cmd(2),
                          noise_y(0),
                          noise_y(1),
                          noise_y(2),
                          noise_u_est(0),
                          noise_u_est(1),
                          noise_u_est(2),
                          d_now,
                          f_now(0),
                          f_now(1),
                          fest_row(0),
                          fest_row(1)};
    for (std::size_t c = 0; c < record.columns.size(); ++c) {
      record.columns[c].push_back(row[c]);
    }

    if (trace) {
      trace->q.push_back(q);
      trace->qd.push_back(qd);
      trace->u_applied.push_back(u_applied);
      trace->fault.push_back(f_now);
      trace->disturbance.push_back(Eigen::VectorXd::Constant(1, d_now));
      trace->qdd.push_back(forward_dynamics(
          model, q, qd, u_applied, f_now,
          Eigen::VectorXd::Constant(1, d_now)));
    }

    if (k == steps) {
      break;
    }

    // plant integration to the next control sample: RK4 at ts/substeps with
    // the applied torque held, fault and disturbance in continuous time
    const double h = scenario.ts / substeps;
    auto xdot = [&](double tt, const Eigen::VectorXd& x) {
      Eigen::VectorXd dx(6);
      const Eigen::VectorXd qq = x.head(3);
      const Eigen::VectorXd vv = x.tail(3);
      const double dd = scenario.disturbance_enabled
                            ? disturbance_signal(scenario.disturbance, tt)
                            : 0.0;
      const Eigen::VectorXd ff = scenario.faults_enabled
                                     ? fault_signal(scenario.faults, tt)
                                     : Eigen::VectorXd::Zero(2);
      dx.head(3) = vv;
      dx.tail(3) = forward_dynamics(model, qq, vv, u_applied, ff,
                                    Eigen::VectorXd::Constant(1, dd));
      return dx;
    };
    Eigen::VectorXd x(6);
    x << q, qd;
    for (int sub = 0; sub < substeps; ++sub) {
      const double tt = t + sub * h;
      const Eigen::VectorXd k1 = xdot(tt, x);
      const Eigen::VectorXd k2 = xdot(tt + 0.5 * h, x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = xdot(tt + 0.5 * h, x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = xdot(tt + h, x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x.allFinite()) {
      throw SimulationDiverged(t + scenario.ts);
    }
    q = x.head(3);
    qd = x.tail(3);
  }
  return record;
}

/// Residual floor of a pilot run: the largest settled fault-estimate
/// magnitude with faults disabled, skipping the estimator warm-up.
inline double residual_floor(const Scenario& scenario) {
  Scenario pilot = scenario;
  pilot.faults_enabled = false;
  const RunRecord rec = run_scenario(pilot);
  const int warmup = 2 * pilot.window_samples - 1;
  double floor = 0.0;
  for (std::size_t k = static_cast<std::size_t>(warmup) + 5; k < rec.rows();
       ++k) {
    floor = std::max(floor, std::abs(rec.column("fest1")[k]));
    floor = std::max(floor, std::abs(rec.column("fest2")[k]));
  }
  return floor;
}

struct CalibrationResult {
  double floor;     // noise-free fault-free residual floor
  double noise_std; // fault-free estimate std under the configured noise
  double threshold; // recommended per-channel detection threshold
};

/**
 * Calibrate the detection threshold for a scenario: measure the noise-free
 * fault-free residual floor, then the estimate spread of a fault-free run
 * with the configured noise, and recommend
 *
 *   threshold = max(5 * floor, 4 * noise_std).
 *
 * With noise disabled this reduces to the plain 5x-floor rule.
 */
inline CalibrationResult calibrate_threshold(const Scenario& scenario) {
  Scenario quiet = scenario;
  quiet.noise_enabled = false;
  quiet.faults_enabled = false;
  CalibrationResult out{};
  out.floor = residual_floor(quiet);

  out.noise_std = 0.0;
  if (scenario.noise_enabled &&
      (scenario.sigma_y.maxCoeff() > 0.0 || scenario.sigma_u.maxCoeff() > 0.0)) {
    Scenario noisy = scenario;
    noisy.faults_enabled = false;
    const RunRecord rec = run_scenario(noisy);
    const std::size_t start =
        static_cast<std::size_t>(2 * noisy.window_samples - 1) + 5;
    for (const char* ch : {"fest1", "fest2"}) {
      const auto& col = rec.column(ch);
      double sum = 0.0, sum2 = 0.0;
      const double count = static_cast<double>(rec.rows() - start);
      for (std::size_t k = start; k < rec.rows(); ++k) {
        sum += col[k];
        sum2 += col[k] * col[k];
      }
      const double mean = sum / count;
      out.noise_std =
          std::max(out.noise_std, std::sqrt(std::max(0.0, sum2 / count - mean * mean)));
    }
  }
  out.threshold = std::max(5.0 * out.floor, 4.0 * out.noise_std);
  return out;
}

} // namespace algfdi
