#pragma once

#include "algfdi/dynamics.hpp"
#include "algfdi/kernel.hpp"
#include "algfdi/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace algfdi {

/// Parameters shared by the streaming residual and fault estimators.
struct ResidualConfig {
  double alpha = 3.0;
  double beta = 3.0;
  int order = 1;         // approximation order N
  int product_order = 2; // expansion order N* for matrix-times-signal products
  WindowSpec window;
  Eigen::VectorXd thresholds; // per fault channel, detection units
  int hold = 3;               // samples above threshold before a decision
};

/// Raw residual M qdd + C qd + G - u; equals F f + D d on exact signals.
inline Eigen::VectorXd residual_raw(const MechanicalModel& model,
                                    const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& qd,
                                    const Eigen::VectorXd& qdd,
                                    const Eigen::VectorXd& u) {
  return model.mass(q) * qdd + model.coriolis(q, qd) * qd + model.gravity(q) -
         u;
}

/// Disturbance-decoupled residual: premultiplies the raw residual by the
/// left annihilator of D, leaving Dperp F f independent of d.
inline Eigen::VectorXd residual_decoupled(const MechanicalModel& model,
                                          const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qd,
                                          const Eigen::VectorXd& qdd,
                                          const Eigen::VectorXd& u) {
  const Eigen::MatrixXd Dperp =
      left_annihilator(model.disturbance_input(q, qd));
  return Dperp * residual_raw(model, q, qd, qdd, u);
}

/// Algebraic fault recovery on exact signals, valid when Dperp F has full
/// column rank. Throws otherwise and points at the partial variant.
inline Eigen::VectorXd fault_identify_exact(const MechanicalModel& model,
                                            const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& qd,
                                            const Eigen::VectorXd& qdd,
                                            const Eigen::VectorXd& u) {
  const Eigen::MatrixXd Dperp =
      left_annihilator(model.disturbance_input(q, qd));
  const Eigen::MatrixXd DF = Dperp * model.fault_input(q, qd);
  if (numeric_rank(DF) < model.n_f) {
    throw std::runtime_error(
        "fault_identify_exact: rank(Dperp*F) < n_f; use "
        "fault_identify_partial with a selector");
  }
  return pseudoinverse(DF) * Dperp * residual_raw(model, q, qd, qdd, u);
}

/**
 * Partial identification when Dperp F is rank deficient: returns the
 * unambiguous combination T f with T = selector * (Dperp F). The selector
 * must have rank(selector * Dperp F) = rank(Dperp F) rows.
 */
inline Eigen::VectorXd fault_identify_partial(const MechanicalModel& model,
                                              const Eigen::VectorXd& q,
                                              const Eigen::VectorXd& qd,
                                              const Eigen::VectorXd& qdd,
                                              const Eigen::VectorXd& u,
                                              const Eigen::MatrixXd& selector) {
  const Eigen::MatrixXd Dperp =
      left_annihilator(model.disturbance_input(q, qd));
  const Eigen::MatrixXd DF = Dperp * model.fault_input(q, qd);
  const int r = numeric_rank(DF);
  if (selector.rows() != r || numeric_rank(selector * DF) != r) {
    throw std::invalid_argument(
        "fault_identify_partial: selector must satisfy rank(selector * "
        "Dperp * F) = rank(Dperp * F) with that many rows");
  }
  return selector * DF * moore_penrose(DF) * Dperp *
         residual_raw(model, q, qd, qdd, u);
}

/// Smallest norm over a joint-space grid of any single fault column after
/// disturbance decoupling; zero means that fault is undetectable there.
inline double fault_detectability_margin(const MechanicalModel& model) {
  const int n = model.n;
  const double grid[] = {-M_PI, -M_PI / 2.0, 0.0, M_PI / 2.0, M_PI};
  const Eigen::VectorXd qd = Eigen::VectorXd::Zero(n);
  double margin = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const int points = static_cast<int>(std::size(grid));
  long combos = 1;
  for (int j = 0; j < n; ++j) {
    combos *= points;
  }
  for (long c = 0; c < combos; ++c) {
    Eigen::VectorXd q(n);
    long rem = c;
    for (int j = 0; j < n; ++j) {
      q(j) = grid[rem % points];
      rem /= points;
    }
    const Eigen::MatrixXd DF =
        left_annihilator(model.disturbance_input(q, qd)) *
        model.fault_input(q, qd);
    for (int i = 0; i < model.n_f; ++i) {
      margin = std::min(margin, DF.col(i).norm());
    }
  }
  return margin;
}

/// Per-fault detection status produced by threshold-with-hold logic.
struct DetectionDecision {
  std::vector<bool> flags;
  std::vector<double> onset;    // NaN until the flag fires
  Eigen::VectorXd estimate;     // most recent estimate seen
};

class DetectionLogic {
public:
  DetectionLogic(Eigen::VectorXd thresholds, int hold)
      : thresholds_(std::move(thresholds)), hold_(hold) {
    if (hold_ < 1) {
      throw std::invalid_argument("DetectionLogic: hold must be >= 1");
    }
    for (Eigen::Index i = 0; i < thresholds_.size(); ++i) {
      if (!(thresholds_(i) > 0.0)) {
        throw std::invalid_argument(
            "DetectionLogic: thresholds must be positive");
      }
    }
    const std::size_t n = static_cast<std::size_t>(thresholds_.size());
    state_.flags.assign(n, false);
    state_.onset.assign(n, std::numeric_limits<double>::quiet_NaN());
    state_.estimate = Eigen::VectorXd::Zero(thresholds_.size());
    run_.assign(n, 0);
    run_start_.assign(n, 0.0);
  }

  const DetectionDecision& update(double t, const Eigen::VectorXd& estimate) {
    state_.estimate = estimate;
    for (Eigen::Index i = 0; i < thresholds_.size(); ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      if (std::abs(estimate(i)) > thresholds_(i)) {
        if (run_[k] == 0) {
          run_start_[k] = t;
        }
        ++run_[k];
        if (run_[k] >= hold_ && !state_.flags[k]) {
          state_.flags[k] = true;
          state_.onset[k] = run_start_[k];
        }
      } else {
        run_[k] = 0;
      }
    }
    return state_;
  }

  const DetectionDecision& state() const { return state_; }

private:
  Eigen::VectorXd thresholds_;
  int hold_;
  DetectionDecision state_;
  std::vector<int> run_;
  std::vector<double> run_start_;
};

/**
 * Streaming residual / fault estimator over measured (q, u) samples.
 *
 * Each update pushes the newest measurement into per-channel windows and,
 * once everything is warm, assembles the window approximation of
 *
 *   Theta * (M qdd + C qd + G - u)
 *
 * with Theta = Dperp (residual) or K = pinv(Dperp F) Dperp (fault),
 * without ever differencing the measurements:
 *
 *   - the M qdd products run through coefficient/modified(.,2) filter
 *     pairs, with the second derivative transferred into the kernels;
 *   - the Coriolis term is evaluated pointwise at the delayed estimates
 *     (qhat, qdhat) from the plain and first-derivative filters;
 *   - the gravity term is the plain filter over the windowed Theta*G;
 *   - the input term runs through coefficient/modified(.,0) pairs.
 *
 * Matrix factors entering coefficient windows are evaluated at the raw
 * measured q paired with the delayed velocity estimate; the pointwise
 * Coriolis factor uses the delayed (qhat, qdhat) for time alignment.
 *
 * Output is empty during warm-up: the measurement windows need L samples
 * and the factor windows a further L - 1, so the first value appears on
 * update number 2L - 1.
 */
class StreamingEstimator {
public:
  enum class Target { Residual, Fault };

  StreamingEstimator(MechanicalModel model, ResidualConfig config,
                     Target target)
      : model_(std::move(model)), cfg_(std::move(config)), target_(target),
        out_dim_(target == Target::Fault ? model_.n_f : model_.n),
        basis_(cfg_.alpha, cfg_.beta,
               std::max({cfg_.order + 1, cfg_.product_order, 1})),
        plain_(fir_weights(KernelSpec::plain(basis_, cfg_.order, cfg_.window))),
        deriv1_(fir_weights(
            KernelSpec::derivative(basis_, cfg_.order, cfg_.window, 1))) {
    if (cfg_.order < 0 || cfg_.product_order < cfg_.order) {
      throw std::invalid_argument(
          "StreamingEstimator: need product_order >= order >= 0");
    }
    for (int j = 0; j <= cfg_.product_order; ++j) {
      coeff_.push_back(
          fir_weights(KernelSpec::coefficient(basis_, j, cfg_.window)));
      mod2_.push_back(
          fir_weights(KernelSpec::modified(basis_, cfg_.order, cfg_.window, j, 2)));
      mod0_.push_back(
          fir_weights(KernelSpec::modified(basis_, cfg_.order, cfg_.window, j, 0)));
    }
    if (target_ == Target::Fault) {
      const double margin = fault_detectability_margin(model_);
      if (!(margin > 1e-9)) {
        throw std::invalid_argument(
            "StreamingEstimator: a decoupled fault direction vanishes on "
            "the configuration grid; that fault is undetectable");
      }
    }
    const int L = cfg_.window.L;
    q_win_.assign(static_cast<std::size_t>(model_.n), SignalWindow(L));
    u_win_.assign(static_cast<std::size_t>(model_.n), SignalWindow(L));
    bm_win_.assign(static_cast<std::size_t>(out_dim_ * model_.n),
                   SignalWindow(L));
    bu_win_.assign(static_cast<std::size_t>(out_dim_ * model_.n),
                   SignalWindow(L));
    bg_win_.assign(static_cast<std::size_t>(out_dim_), SignalWindow(L));
  }

  int output_dim() const { return out_dim_; }
  const ResidualConfig& config() const { return cfg_; }

  /// Updates consumed before the first valid output.
  int warmup_updates() const { return 2 * cfg_.window.L - 1; }

  void reset() {
    for (auto& w : q_win_) w.reset();
    for (auto& w : u_win_) w.reset();
    for (auto& w : bm_win_) w.reset();
    for (auto& w : bu_win_) w.reset();
    for (auto& w : bg_win_) w.reset();
  }

  std::optional<Eigen::VectorXd> update(const Eigen::VectorXd& q,
                                        const Eigen::VectorXd& u) {
    const int n = model_.n;
    if (q.size() != n || u.size() != n) {
      throw std::invalid_argument("StreamingEstimator: dimension mismatch");
    }
    for (int b = 0; b < n; ++b) {
      q_win_[static_cast<std::size_t>(b)].push(q(b));
      u_win_[static_cast<std::size_t>(b)].push(u(b));
    }
    if (!q_win_[0].full()) {
      return std::nullopt;
    }

    Eigen::VectorXd qhat(n), qdhat(n);
    for (int b = 0; b < n; ++b) {
      qhat(b) = *apply(plain_, q_win_[static_cast<std::size_t>(b)]);
      qdhat(b) = *apply(deriv1_, q_win_[static_cast<std::size_t>(b)]);
    }

    const Eigen::MatrixXd theta_raw = gain(q, qdhat);
    const Eigen::MatrixXd factor_m = theta_raw * model_.mass(q);
    const Eigen::VectorXd factor_g = theta_raw * model_.gravity(q);
    for (int r = 0; r < out_dim_; ++r) {
      for (int b = 0; b < n; ++b) {
        bm_win_[flat(r, b)].push(factor_m(r, b));
        bu_win_[flat(r, b)].push(theta_raw(r, b));
      }
      bg_win_[static_cast<std::size_t>(r)].push(factor_g(r));
    }
    if (!bm_win_[0].full()) {
      return std::nullopt;
    }

    const Eigen::MatrixXd theta_hat = gain(qhat, qdhat);
    Eigen::VectorXd out =
        theta_hat * (model_.coriolis(qhat, qdhat) * qdhat);
    for (int r = 0; r < out_dim_; ++r) {
      out(r) += *apply(plain_, bg_win_[static_cast<std::size_t>(r)]);
    }
    const int terms = cfg_.product_order + 1;
    Eigen::MatrixXd m2(terms, n), m0(terms, n);
    for (int j = 0; j < terms; ++j) {
      for (int b = 0; b < n; ++b) {
        const std::size_t jb = static_cast<std::size_t>(j);
        m2(j, b) = *apply(mod2_[jb], q_win_[static_cast<std::size_t>(b)]);
        m0(j, b) = *apply(mod0_[jb], u_win_[static_cast<std::size_t>(b)]);
      }
    }
    for (int j = 0; j < terms; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      for (int r = 0; r < out_dim_; ++r) {
        for (int b = 0; b < n; ++b) {
          out(r) += *apply(coeff_[js], bm_win_[flat(r, b)]) * m2(j, b);
          out(r) -= *apply(coeff_[js], bu_win_[flat(r, b)]) * m0(j, b);
        }
      }
    }
    return out;
  }

private:
  std::size_t flat(int r, int b) const {
    return static_cast<std::size_t>(r * model_.n + b);
  }

  Eigen::MatrixXd gain(const Eigen::VectorXd& q,
                       const Eigen::VectorXd& qd) const {
    const Eigen::MatrixXd Dperp =
        left_annihilator(model_.disturbance_input(q, qd));
    if (target_ == Target::Residual) {
      return Dperp;
    }
    const Eigen::MatrixXd DF = Dperp * model_.fault_input(q, qd);
    if (numeric_rank(DF) < model_.n_f) {
      throw std::runtime_error(
          "StreamingEstimator: rank(Dperp*F) dropped below n_f");
    }
    return pseudoinverse(DF) * Dperp;
  }

  MechanicalModel model_;
  ResidualConfig cfg_;
  Target target_;
  int out_dim_;
  JacobiBasis basis_;
  FirFilter plain_;
  FirFilter deriv1_;
  std::vector<FirFilter> coeff_, mod2_, mod0_;
  std::vector<SignalWindow> q_win_, u_win_, bm_win_, bu_win_, bg_win_;
};

inline StreamingEstimator make_residual_estimator(const MechanicalModel& model,
                                                  const ResidualConfig& cfg) {
  return StreamingEstimator(model, cfg, StreamingEstimator::Target::Residual);
}

inline StreamingEstimator make_fault_estimator(const MechanicalModel& model,
                                               const ResidualConfig& cfg) {
  return StreamingEstimator(model, cfg, StreamingEstimator::Target::Fault);
}

} // namespace algfdi
