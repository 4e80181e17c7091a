#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace gdms::detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Streaming log-sum-exp with a running max; merge() is associative.
class LogSumExp {
 public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max_) {
      if (max_ != -std::numeric_limits<double>::infinity()) sum_ *= std::exp(max_ - x);
      max_ = x;
    }
    sum_ += std::exp(x - max_);
  }
  void merge(const LogSumExp& other) noexcept {
    if (other.max_ == -std::numeric_limits<double>::infinity()) return;
    if (other.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
  }
  double value() const noexcept {
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// Two-pass log(Σ exp(scale·x_k)).
inline double log_sum_exp_scaled(std::span<const double> xs, double scale) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::fmax(m, scale * x);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(scale * x - m));
  return m + std::log(s.value());
}

}  // namespace gdms::detail
