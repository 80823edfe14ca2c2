#pragma once

#include "algfdi/jacobi.hpp"
#include "algfdi/window.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace algfdi {

namespace detail {

// -------- small monomial-coefficient polynomial helpers (ascending powers)

inline double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) {
    acc = acc * x + c[j];
  }
  return acc;
}

inline std::vector<double> poly_mul(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) {
    return {0.0};
  }
  std::vector<double> out(c.size() - 1, 0.0);
  for (std::size_t j = 1; j < c.size(); ++j) {
    out[j - 1] = static_cast<double>(j) * c[j];
  }
  return out;
}

/// Nodes/weights of 16-point Gauss-Legendre quadrature on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
struct GaussLegendre16 {
  std::array<double, 16> node;
  std::array<double, 16> weight;

  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double pm1 = 1.0;
        double p = x;
        for (int m = 2; m <= n; ++m) {
          const double pm2 = pm1;
          pm1 = p;
          p = ((2.0 * m - 1.0) * x * pm1 - (m - 1.0) * pm2) / m;
        }
        dp = n * (x * p - pm1) / (x * x - 1.0);
        const double dx = p / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) {
          break;
        }
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      node[static_cast<std::size_t>(i)] = -x;
      node[static_cast<std::size_t>(n - 1 - i)] = x;
      weight[static_cast<std::size_t>(i)] = w;
      weight[static_cast<std::size_t>(n - 1 - i)] = w;
    }
  }
};

inline const GaussLegendre16& gl16() {
  static const GaussLegendre16 table;
  return table;
}

} // namespace detail

enum class KernelKind { Plain, Derivative, Coefficient, Modified };

/**
 * Description of one sliding-window approximation kernel.
 *
 * Plain          approximates x(t - t_d)
 * Derivative(k)  approximates the k-th derivative of x at t - t_d
 * Coefficient(i) extracts the i-th orthonormal expansion coefficient of x
 * Modified(i,k)  approximates the product of the i-th basis member with
 *                the k-th derivative of x, used by the product expansion
 *
 * Use the named factories; they enforce the compact-support requirement
 * alpha >= k and beta >= k for derivative transfer.
 */
struct KernelSpec {
  JacobiBasis basis;
  int order; // N
  WindowSpec window;
  KernelKind kind;
  int index; // i for Coefficient/Modified
  int deriv; // k for Derivative/Modified

  static KernelSpec plain(const JacobiBasis& basis, int order,
                          const WindowSpec& window) {
    KernelSpec s{basis, order, window, KernelKind::Plain, 0, 0};
    s.validate();
    return s;
  }

  static KernelSpec derivative(const JacobiBasis& basis, int order,
                               const WindowSpec& window, int k) {
    KernelSpec s{basis, order, window, KernelKind::Derivative, 0, k};
    s.validate();
    return s;
  }

  static KernelSpec coefficient(const JacobiBasis& basis, int index,
                                const WindowSpec& window) {
    // the coefficient kernel carries no evaluation delay
    WindowSpec w(window.Ts, window.L, 0.0);
    KernelSpec s{basis, 0, w, KernelKind::Coefficient, index, 0};
    s.validate();
    return s;
  }

  static KernelSpec modified(const JacobiBasis& basis, int order,
                             const WindowSpec& window, int index, int k) {
    KernelSpec s{basis, order, window, KernelKind::Modified, index, k};
    s.validate();
    return s;
  }

  void validate() const {
    if (order < 0) {
      throw std::invalid_argument("KernelSpec: order must be >= 0");
    }
    if (index < 0) {
      throw std::invalid_argument("KernelSpec: index must be >= 0");
    }
    if (deriv < 0) {
      throw std::invalid_argument("KernelSpec: derivative order must be >= 0");
    }
    const int needed = std::max(order, index);
    if (needed > basis.max_degree()) {
      throw std::invalid_argument("KernelSpec: basis max_degree too small");
    }
    if (deriv >= 1 &&
        (basis.alpha() < static_cast<double>(deriv) ||
         basis.beta() < static_cast<double>(deriv))) {
      throw std::invalid_argument(
          "KernelSpec: compact support requires alpha >= k and beta >= k "
          "for derivative order k = " +
          std::to_string(deriv));
    }
  }
};

/**
 * Delay that cancels the leading approximation-error term: maps the largest
 * zero of the degree-(N+1) basis member back to window time.
 */
inline double default_delay(const JacobiBasis& basis, int order, double T) {
  JacobiBasis b(basis.alpha(), basis.beta(),
                std::max(basis.max_degree(), order + 1));
  const std::vector<double> z = b.zeros(order + 1);
  return T * (1.0 - z.back()) / 2.0;
}

/**
 * A continuous approximation kernel over window time tau_bar in [0, T].
 *
 * Every kind reduces to the same closed form
 *
 *   (2/T) * (-2/T)^k * d^k/dtau^k [ Q(tau) * w(tau) ]   at tau = 1 - 2*tau_bar/T,
 *
 * where Q is a polynomial (the reproducing sum, one basis member, or their
 * product) and w the Jacobi weight. The derivative of the polynomial-times-
 * weight product is expanded symbolically so the compact-support
 * cancellation is preserved exactly; nothing is differenced numerically.
 */
class Kernel {
public:
  explicit Kernel(const KernelSpec& spec) : spec_(spec) {
    spec_.validate();
    const JacobiBasis& basis = spec_.basis;
    const double T = spec_.window.T();
    const double tau_d = 1.0 - 2.0 * spec_.window.t_d / T;

    std::vector<double> q;
    switch (spec_.kind) {
    case KernelKind::Plain:
    case KernelKind::Derivative:
      q = reproducing_sum(basis, spec_.order, tau_d);
      break;
    case KernelKind::Coefficient:
      q = basis.orthonormal_coefficients(spec_.index);
      break;
    case KernelKind::Modified:
      q = detail::poly_mul(basis.orthonormal_coefficients(spec_.index),
                           reproducing_sum(basis, spec_.order, tau_d));
      break;
    }

    const int k = effective_deriv();
    for (int m = 0; m < k; ++m) {
      // d/dtau [ U * (1-tau)^(a-m) (1+tau)^(b-m) ]
      //   = [ (1-tau^2) U' + ((b-a) - (a+b-2m) tau) U ] * (1-tau)^(a-m-1) (1+tau)^(b-m-1)
      const double a = basis.alpha();
      const double b = basis.beta();
      std::vector<double> dq = detail::poly_derivative(q);
      std::vector<double> next(q.size() + 1, 0.0);
      for (std::size_t j = 0; j < dq.size(); ++j) {
        next[j] += dq[j];
        if (j + 2 < next.size()) {
          next[j + 2] -= dq[j];
        }
      }
      const double c0 = b - a;
      const double c1 = -(a + b - 2.0 * m);
      for (std::size_t j = 0; j < q.size(); ++j) {
        next[j] += c0 * q[j];
        next[j + 1] += c1 * q[j];
      }
      q = std::move(next);
    }

    poly_ = std::move(q);
    exp_alpha_ = basis.alpha() - static_cast<double>(k);
    exp_beta_ = basis.beta() - static_cast<double>(k);
    scale_ = (2.0 / T) * std::pow(-2.0 / T, k);
  }

  /// Kernel value at window time tau_bar in [0, T] (0 = newest sample side).
  double value(double tau_bar) const {
    const double T = spec_.window.T();
    if (tau_bar < 0.0 || tau_bar > T) {
      throw std::domain_error("Kernel::value: tau_bar outside [0, T]");
    }
    const double tau = 1.0 - 2.0 * tau_bar / T;
    const double wa = exp_alpha_ == 0.0 ? 1.0 : std::pow(1.0 - tau, exp_alpha_);
    const double wb = exp_beta_ == 0.0 ? 1.0 : std::pow(1.0 + tau, exp_beta_);
    return scale_ * wa * wb * detail::poly_eval(poly_, tau);
  }

  const KernelSpec& spec() const { return spec_; }

private:
  int effective_deriv() const {
    return (spec_.kind == KernelKind::Derivative ||
            spec_.kind == KernelKind::Modified)
               ? spec_.deriv
               : 0;
  }

  static std::vector<double> reproducing_sum(const JacobiBasis& basis,
                                             int order, double tau_d) {
    std::vector<double> sum{0.0};
    for (int i = 0; i <= order; ++i) {
      const double scale = basis.eval_orthonormal(i, tau_d);
      std::vector<double> ci = basis.orthonormal_coefficients(i);
      if (sum.size() < ci.size()) {
        sum.resize(ci.size(), 0.0);
      }
      for (std::size_t j = 0; j < ci.size(); ++j) {
        sum[j] += scale * ci[j];
      }
    }
    return sum;
  }

  KernelSpec spec_;
  std::vector<double> poly_;
  double exp_alpha_ = 0.0;
  double exp_beta_ = 0.0;
  double scale_ = 1.0;
};

inline double kernel_value(const KernelSpec& spec, double tau_bar) {
  return Kernel(spec).value(tau_bar);
}

/// FIR realization of one kernel: weight j integrates the kernel over
/// [j*Ts, (j+1)*Ts] and multiplies the sample j steps in the past.
struct FirFilter {
  std::vector<double> weights;
  KernelSpec spec;
};

/**
 * Discretize a kernel into FIR weights. Each subinterval integral is taken
 * with fixed 16-point Gauss-Legendre quadrature, which is exact for the
 * polynomial kernels produced by integer alpha, beta and keeps the weights
 * bit-identical across runs for identical specs.
 */
inline FirFilter fir_weights(const KernelSpec& spec) {
  const Kernel kernel(spec);
  const double Ts = spec.window.Ts;
  const int L = spec.window.L;
  const auto& q = detail::gl16();
  std::vector<double> w(static_cast<std::size_t>(L), 0.0);
  for (int j = 0; j < L; ++j) {
    const double lo = j * Ts;
    double acc = 0.0;
    for (std::size_t m = 0; m < q.node.size(); ++m) {
      const double tb = lo + 0.5 * Ts * (q.node[m] + 1.0);
      acc += q.weight[m] * kernel.value(tb);
    }
    w[static_cast<std::size_t>(j)] = 0.5 * Ts * acc;
  }
  return FirFilter{std::move(w), spec};
}

/**
 * Evaluate the weighted sum over the stored history. Returns nothing while
 * the window is still warming up (fewer than L samples seen).
 */
inline std::optional<double> apply(const FirFilter& filter,
                                   const SignalWindow& window) {
  const int L = filter.spec.window.L;
  if (window.capacity() != L) {
    throw std::invalid_argument("apply: window capacity does not match filter");
  }
  if (!window.full()) {
    return std::nullopt;
  }
  double acc = 0.0;
  for (int j = 0; j < L; ++j) {
    acc += filter.weights[static_cast<std::size_t>(j)] * window.past(j);
  }
  return acc;
}

/**
 * Product expansion: approximates the window operator applied to the
 * product a*b (with b optionally differentiated, per the modified filters)
 * as sum_i coeff_i{a} * modified_i{b}.
 */
inline std::optional<double>
approximate_product(std::span<const FirFilter> coeff_filters,
                    std::span<const FirFilter> modified_filters,
                    const SignalWindow& window_a, const SignalWindow& window_b) {
  if (coeff_filters.size() != modified_filters.size()) {
    throw std::invalid_argument(
        "approximate_product: filter lists must have equal length");
  }
  if (!window_a.full() || !window_b.full()) {
    return std::nullopt;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < coeff_filters.size(); ++i) {
    const auto ci = apply(coeff_filters[i], window_a);
    const auto mi = apply(modified_filters[i], window_b);
    acc += *ci * *mi;
  }
  return acc;
}

} // namespace algfdi
