#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace algfdi {

/// Sliding-window timing: L samples of period Ts spanning T = L*Ts seconds,
/// with an evaluation delay t_d in [0, T].
struct WindowSpec {
  double Ts;
  int L;
  double t_d;

  WindowSpec(double sample_period, int sample_count, double delay)
      : Ts(sample_period), L(sample_count), t_d(delay) {
    if (!(Ts > 0.0)) {
      throw std::invalid_argument("WindowSpec: Ts must be positive");
    }
    if (L < 1) {
      throw std::invalid_argument("WindowSpec: L must be a positive integer");
    }
    if (t_d < 0.0 || t_d > T()) {
      throw std::invalid_argument("WindowSpec: t_d must lie in [0, L*Ts]");
    }
  }

  /// Window length in seconds.
  double T() const { return static_cast<double>(L) * Ts; }
};

/**
 * Ring buffer over the most recent L samples of one scalar channel.
 * The window reports itself usable only once L samples have arrived;
 * consumers treat anything earlier as warm-up.
 */
class SignalWindow {
public:
  explicit SignalWindow(int capacity)
      : buf_(static_cast<std::size_t>(capacity), 0.0) {
    if (capacity < 1) {
      throw std::invalid_argument("SignalWindow: capacity must be >= 1");
    }
  }

  void push(double x) {
    buf_[head_] = x;
    head_ = (head_ + 1) % buf_.size();
    if (count_ < buf_.size()) {
      ++count_;
    }
  }

  bool full() const { return count_ == buf_.size(); }
  std::size_t count() const { return count_; }
  int capacity() const { return static_cast<int>(buf_.size()); }

  /// Sample pushed steps_back pushes ago (0 = newest). Requires full().
  double past(int steps_back) const {
    const std::size_t n = buf_.size();
    const std::size_t j = static_cast<std::size_t>(steps_back);
    if (j >= count_) {
      throw std::out_of_range("SignalWindow::past: not enough samples");
    }
    return buf_[(head_ + n - 1 - j) % n];
  }

  void reset() {
    head_ = 0;
    count_ = 0;
    buf_.assign(buf_.size(), 0.0);
  }

private:
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

} // namespace algfdi
