#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "gdms/error.hpp"

namespace gdms {

using cplx = std::complex<double>;

/// Dense complex polynomial, coefficients ascending by power. Exact trailing zeros are trimmed,
/// so the zero polynomial has no coefficients and degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim(); }

  static Polynomial monomial(cplx coeff, int power) {
    std::vector<cplx> c(static_cast<std::size_t>(power) + 1, cplx{});
    c.back() = coeff;
    return Polynomial(std::move(c));
  }

  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  const std::vector<cplx>& coeffs() const noexcept { return c_; }
  cplx leading() const noexcept { return c_.empty() ? cplx{} : c_.back(); }
  cplx coeff(int k) const noexcept {
    return k >= 0 && k < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(k)] : cplx{};
  }

  cplx operator()(cplx z) const noexcept {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative in one Horner pass.
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const noexcept {
    cplx p{}, dp{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  double max_abs_coeff() const noexcept {
    double m = 0.0;
    for (const auto& a : c_) m = std::max(m, std::abs(a));
    return m;
  }

  /// Drops leading coefficients below `rel * max|coeff|`; used after cancelling subtractions.
  Polynomial trimmed(double rel) const {
    std::vector<cplx> c = c_;
    const double cut = rel * max_abs_coeff();
    while (!c.empty() && std::abs(c.back()) <= cut) c.pop_back();
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> c(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(cplx s, const Polynomial& p) {
    std::vector<cplx> c = p.c_;
    for (auto& a : c) a *= s;
    return Polynomial(std::move(c));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
  }

  std::vector<cplx> c_;
};

struct RootOptions {
  double tol = 1e-12;     ///< accepted residual |p(z)| <= tol * scale(p, z)
  int max_iters = 200;
  double cluster_tol = 1e-7;  ///< roots within cluster_tol*(1+|z|) are merged
};

/// Roots with multiplicity; `clustered[k]` marks roots that were merged with a neighbour.
struct RootSet {
  std::vector<cplx> values;
  std::vector<bool> clustered;
};

namespace detail {

inline double root_scale(const Polynomial& p, cplx z) {
  return p.max_abs_coeff() * std::pow(std::max(1.0, std::abs(z)), p.degree());
}

/// Horner rounding-error bound Σ|a_k||z|^k, times a small safety factor.
inline double horner_error_bound(const std::vector<cplx>& a, double r) {
  double acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * r + std::abs(*it);
  return 8.0 * std::numeric_limits<double>::epsilon() * acc;
}

/// Merge roots that agree to within `tol*(1+|z|)` into their average, keeping multiplicity.
inline void cluster_roots(RootSet& rs, double tol) {
  const std::size_t n = rs.values.size();
  std::vector<int> group(n, -1);
  int groups = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] >= 0) continue;
    group[i] = groups;
    // Transitive closure over the tolerance graph.
    std::vector<std::size_t> stack{i};
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (group[j] >= 0) continue;
        if (std::abs(rs.values[k] - rs.values[j]) <= tol * (1.0 + std::abs(rs.values[k]))) {
          group[j] = groups;
          stack.push_back(j);
        }
      }
    }
    ++groups;
  }
  for (int g = 0; g < groups; ++g) {
    cplx sum{};
    int count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (group[j] == g) {
        sum += rs.values[j];
        ++count;
      }
    if (count < 2) continue;
    const cplx mean = sum / static_cast<double>(count);
    for (std::size_t j = 0; j < n; ++j)
      if (group[j] == g) {
        rs.values[j] = mean;
        rs.clustered[j] = true;
      }
  }
}

}  // namespace detail

/// All deg(p) roots of p with multiplicity, by Aberth–Ehrlich simultaneous iteration started on a
/// Fujiwara-bound circle. Exact zero roots are split off first.
inline RootSet find_roots(const Polynomial& p, const RootOptions& opt = {}) {
  const int deg = p.degree();
  if (deg < 1) throw ComputationError("roots: polynomial of degree " + std::to_string(deg) + " has no roots to find");

  RootSet out;
  const auto& all = p.coeffs();
  std::size_t zeros = 0;
  while (all[zeros] == cplx{}) ++zeros;
  out.values.assign(zeros, cplx{});

  const std::size_t m = all.size() - 1 - zeros;
  if (m == 1) {
    out.values.push_back(-all[zeros] / all[zeros + 1]);
  } else if (m > 1) {
    std::vector<cplx> a(all.begin() + static_cast<std::ptrdiff_t>(zeros), all.end());
    const cplx lead = a.back();
    for (auto& c : a) c /= lead;

    double radius = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
      double term = std::abs(a[m - k]);
      if (k == m) term *= 0.5;
      radius = std::max(radius, std::pow(term, 1.0 / static_cast<double>(k)));
    }
    radius *= 2.0;
    if (!(radius > 0.0)) radius = 1.0;

    // Fixed irrational offset keeps the start points off any symmetry axis of the input.
    constexpr double kOffset = 0.4 * std::numbers::pi * (std::numbers::sqrt2 - 1.0);
    std::vector<cplx> z(m);
    for (std::size_t k = 0; k < m; ++k)
      z[k] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m) + kOffset);

    const Polynomial monic(a);
    std::vector<bool> done(m, false);
    for (int it = 0; it < opt.max_iters; ++it) {
      bool all_done = true;
      for (std::size_t i = 0; i < m; ++i) {
        if (done[i]) continue;
        const auto [pv, dv] = monic.eval_with_derivative(z[i]);
        if (std::abs(pv) <= detail::horner_error_bound(a, std::abs(z[i]))) {
          done[i] = true;
          continue;
        }
        all_done = false;
        const cplx ratio = pv / dv;
        cplx repel{};
        for (std::size_t j = 0; j < m; ++j)
          if (j != i) repel += 1.0 / (z[i] - z[j]);
        cplx step = ratio / (1.0 - ratio * repel);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = ratio;
        z[i] -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z[i])) done[i] = true;
      }
      if (all_done) break;
    }
    for (const auto& r : z) out.values.push_back(r);
  }

  std::vector<double> residuals;
  bool ok = true;
  for (const auto& r : out.values) {
    const double res = std::abs(p(r));
    residuals.push_back(res);
    if (!(res <= opt.tol * detail::root_scale(p, r))) ok = false;
  }
  if (!ok)
    throw RootFindingError("roots: Aberth iteration did not converge in " + std::to_string(opt.max_iters) + " iterations",
                           std::move(residuals));

  out.clustered.assign(out.values.size(), false);
  detail::cluster_roots(out, opt.cluster_tol);
  return out;
}

inline std::vector<cplx> roots(const Polynomial& p, double tol = 1e-12) {
  RootOptions opt;
  opt.tol = tol;
  return find_roots(p, opt).values;
}

/// Finite preimages of a point. `at_infinity` counts preimages lost to a degree drop of P - wQ.
struct PreimageSet {
  std::vector<cplx> points;
  std::vector<bool> clustered;
  int at_infinity = 0;
};

/// Non-constant rational map P/Q in Euclidean coordinates.
class RationalMap {
 public:
  static constexpr double kTolPole = 1e-12;
  static constexpr double kTolCoprime = 1e-8;

  RationalMap() = default;

  explicit RationalMap(Polynomial num, Polynomial den = Polynomial{cplx{1.0, 0.0}})
      : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw ComputationError("rational map: zero denominator polynomial");
    if (degree() < 1) throw ComputationError("rational map: degree must be at least 1");
    if (num_.degree() >= 1 && den_.degree() >= 1) {
      const auto rn = roots(num_);
      const auto rd = roots(den_);
      for (const auto& a : rn)
        for (const auto& b : rd)
          if (std::abs(a - b) <= kTolCoprime * (1.0 + std::abs(a)))
            throw ComputationError("rational map: numerator and denominator share a root");
    }
  }

  const Polynomial& num() const noexcept { return num_; }
  const Polynomial& den() const noexcept { return den_; }
  int degree() const noexcept { return std::max(num_.degree(), den_.degree()); }
  bool is_polynomial() const noexcept { return den_.degree() == 0; }

  cplx operator()(cplx z) const {
    const cplx q = den_(z);
    check_pole(q, z);
    return num_(z) / q;
  }

  /// (P'Q - PQ')/Q².
  cplx derivative(cplx z) const { return eval_with_derivative(z).second; }

  std::pair<cplx, cplx> eval_with_derivative(cplx z) const {
    const auto [p, dp] = num_.eval_with_derivative(z);
    const auto [q, dq] = den_.eval_with_derivative(z);
    check_pole(q, z);
    return {p / q, (dp * q - p * dq) / (q * q)};
  }

  /// Roots of P - wQ. Missing roots (degree drop) are reported as preimages at infinity.
  PreimageSet preimages(cplx w, const RootOptions& opt = {}) const {
    const Polynomial eq = (num_ - w * den_).trimmed(1e-14);
    PreimageSet out;
    out.at_infinity = degree() - std::max(eq.degree(), 0);
    if (eq.degree() >= 1) {
      auto rs = find_roots(eq, opt);
      out.points = std::move(rs.values);
      out.clustered = std::move(rs.clustered);
    }
    return out;
  }

  /// Finite critical points with multiplicity (roots of P'Q - PQ').
  std::vector<cplx> critical_points() const {
    const Polynomial w = (num_.derivative() * den_ - num_ * den_.derivative()).trimmed(1e-13);
    if (w.degree() < 1) return {};
    return roots(w);
  }

  /// this ∘ inner.
  RationalMap compose(const RationalMap& inner) const {
    const int d = degree();
    std::vector<Polynomial> pw(static_cast<std::size_t>(d) + 1), qw(static_cast<std::size_t>(d) + 1);
    pw[0] = qw[0] = Polynomial{cplx{1.0, 0.0}};
    for (int k = 1; k <= d; ++k) {
      pw[static_cast<std::size_t>(k)] = pw[static_cast<std::size_t>(k) - 1] * inner.num_;
      qw[static_cast<std::size_t>(k)] = qw[static_cast<std::size_t>(k) - 1] * inner.den_;
    }
    Polynomial n, m;
    for (int k = 0; k <= d; ++k) {
      const Polynomial basis = pw[static_cast<std::size_t>(k)] * qw[static_cast<std::size_t>(d - k)];
      n = n + num_.coeff(k) * basis;
      m = m + den_.coeff(k) * basis;
    }
    RationalMap out;
    out.num_ = std::move(n);
    out.den_ = std::move(m);
    return out;
  }

  friend bool operator==(const RationalMap&, const RationalMap&) = default;

 private:
  void check_pole(cplx q, cplx z) const {
    const double scale = den_.max_abs_coeff() * std::pow(std::max(1.0, std::abs(z)), den_.degree());
    if (std::abs(q) < kTolPole * scale)
      throw PoleError("evaluation at a pole of the map (z = " + std::to_string(z.real()) + "+" +
                      std::to_string(z.imag()) + "i); the orbit left the finite plane");
  }

  Polynomial num_;
  Polynomial den_{cplx{1.0, 0.0}};
};

}  // namespace gdms
