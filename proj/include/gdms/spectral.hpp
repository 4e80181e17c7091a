#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gdms/error.hpp"
#include "gdms/system.hpp"

namespace gdms {

/// Small dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    for (const auto& r : rows) {
      if (r.size() != n_) throw ComputationError("matrix must be square");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }
  /// xᵀ M.
  std::vector<double> apply_left(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) y[j] += x[i] * (*this)(i, j);
    return y;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// M^(t)_{ij} = Σ_{α: i→j} deg(g_α)^t.
struct DegreeMatrix {
  double t = 1.0;
  Matrix entries;
};

inline DegreeMatrix degree_matrix(const GdmsSystem& s, double t) {
  DegreeMatrix m{t, Matrix(s.vertex_count())};
  for (const auto& g : s.generators()) m.entries(g.from, g.to) += std::pow(static_cast<double>(g.degree), t);
  return m;
}

/// Spectral radius with positive left/right eigenvectors, each normalized to sum 1.
struct PerronData {
  double rho = 0.0;
  std::vector<double> left;
  std::vector<double> right;
};

struct PerronOptions {
  int max_iters = 100000;
  double rel_tol = 1e-13;
};

namespace detail {

/// Primitive (some power strictly positive) iff irreducible and aperiodic; Wielandt's bound
/// (n-1)²+1 on the exponent makes the check finite.
inline bool is_primitive(const Matrix& m) {
  const std::size_t n = m.size();
  std::vector<char> pos(n * n), acc(n * n);
  for (std::size_t i = 0; i < n * n; ++i) pos[i] = acc[i] = m(i / n, i % n) > 0.0;
  const std::size_t bound = (n - 1) * (n - 1) + 1;
  for (std::size_t k = 1; k <= bound; ++k) {
    if (std::all_of(acc.begin(), acc.end(), [](char c) { return c != 0; })) return true;
    std::vector<char> next(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        if (acc[i * n + l])
          for (std::size_t j = 0; j < n; ++j)
            if (pos[l * n + j]) next[i * n + j] = 1;
    acc.swap(next);
  }
  return std::all_of(acc.begin(), acc.end(), [](char c) { return c != 0; });
}

struct PowerResult {
  bool converged = false;
  double rho = 0.0;
  std::vector<double> vec;
};

/// Sum-normalized power iteration on M + shift·I (or its transpose).
inline PowerResult power_iterate(const Matrix& m, double shift, bool left, const PerronOptions& opt) {
  const std::size_t n = m.size();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  double prev = -1.0;
  for (int it = 0; it < opt.max_iters; ++it) {
    std::vector<double> y = left ? m.apply_left(x) : m.apply(x);
    for (std::size_t i = 0; i < n; ++i) y[i] += shift * x[i];
    const double total = std::accumulate(y.begin(), y.end(), 0.0);
    if (!(total > 0.0)) return {};
    for (auto& v : y) v /= total;
    const double rho = total - shift;  // x sums to 1
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(y[i] - x[i]));
    x.swap(y);
    if (std::abs(rho - prev) <= opt.rel_tol * rho && change <= 1e-14) return {true, rho, x};
    prev = rho;
  }
  return {false, prev, x};
}

inline double eigen_residual(const Matrix& m, const PerronData& p) {
  const auto mv = m.apply(p.right);
  const auto um = m.apply_left(p.left);
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    r = std::max(r, std::abs(mv[i] - p.rho * p.right[i]));
    r = std::max(r, std::abs(um[i] - p.rho * p.left[i]));
  }
  return r;
}

}  // namespace detail

/// Perron–Frobenius data of a nonnegative irreducible matrix by power iteration. Imprimitive
/// (periodic) matrices are iterated on M + sI with s the max row sum, which has the same
/// eigenvectors and is primitive; s is subtracted from the eigenvalue afterwards.
inline PerronData perron(const Matrix& m, const PerronOptions& opt = {}) {
  const std::size_t n = m.size();
  if (n == 0) throw ComputationError("perron: empty matrix");
  double max_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) < 0.0) throw ComputationError("perron: matrix has a negative entry");
      r += m(i, j);
    }
    max_row = std::max(max_row, r);
  }
  if (!(max_row > 0.0)) throw ComputationError("perron: zero matrix");

  auto attempt = [&](double shift) -> std::optional<PerronData> {
    auto r = detail::power_iterate(m, shift, false, opt);
    auto l = detail::power_iterate(m, shift, true, opt);
    if (!r.converged || !l.converged) return std::nullopt;
    PerronData p{0.5 * (r.rho + l.rho), std::move(l.vec), std::move(r.vec)};
    if (detail::eigen_residual(m, p) > 1e-10 * p.rho) return std::nullopt;
    return p;
  };

  if (detail::is_primitive(m))
    if (auto p = attempt(0.0)) return *p;
  if (auto p = attempt(max_row)) return *p;
  throw ComputationError("perron: power iteration did not converge in " + std::to_string(opt.max_iters) +
                         " iterations (is the system irreducible?)");
}

inline PerronData perron(const DegreeMatrix& m, const PerronOptions& opt = {}) { return perron(m.entries, opt); }

/// Vertex-wise weights a^(t); a[α] indexed by generator id.
struct WeightFamily {
  double t = 1.0;
  std::vector<double> a;
};

inline WeightFamily canonical_weights(const GdmsSystem& s, double t) {
  const auto m = degree_matrix(s, t);
  const auto p = perron(m);
  WeightFamily w{t, {}};
  w.a.reserve(s.generators().size());
  for (const auto& g : s.generators())
    w.a.push_back(std::pow(static_cast<double>(g.degree), t) * p.left[g.from] / (p.rho * p.left[g.to]));
  return w;
}

/// log ρ(M^(1)).
inline double topological_entropy(const GdmsSystem& s) { return std::log(perron(degree_matrix(s, 1.0)).rho); }

struct VertexDistribution {
  std::vector<double> c;
  double residual = 0.0;
};

/// Stationary vertex distribution c = Bc with B_{ij} = Σ_{α: i→j} a_α (column-stochastic).
inline VertexDistribution vertex_stationary(const GdmsSystem& s, const WeightFamily& w) {
  Matrix b(s.vertex_count());
  for (GeneratorId g = 0; g < s.generators().size(); ++g) b(s.generator(g).from, s.generator(g).to) += w.a.at(g);
  const auto p = perron(b);
  VertexDistribution out{p.right, 0.0};
  const auto bc = b.apply(out.c);
  for (std::size_t i = 0; i < out.c.size(); ++i) out.residual = std::max(out.residual, std::abs(bc[i] - out.c[i]));
  if (out.residual > 1e-10) throw ComputationError("vertex_stationary: fixed-point residual too large");
  return out;
}

/// Closed-form terms of the entropy identity h + (t-1)E = log ρ(M^(t)).
struct EntropyIdentity {
  double t = 1.0;
  double entropy = 0.0;        ///< h
  double mean_log_degree = 0.0;  ///< E
  double log_rho = 0.0;
  double residual = 0.0;
};

inline EntropyIdentity entropy_identity(const GdmsSystem& s, double t) {
  const auto w = canonical_weights(s, t);
  const auto c = vertex_stationary(s, w);
  EntropyIdentity out;
  out.t = t;
  for (VertexId i = 0; i < s.vertex_count(); ++i) {
    double hi = 0.0, ei = 0.0;
    for (const auto g : s.generators_into(i)) {
      const double a = w.a[g];
      const double ld = std::log(static_cast<double>(s.generator(g).degree));
      hi += -a * std::log(a) + a * ld;
      ei += a * ld;
    }
    out.entropy += c.c[i] * hi;
    out.mean_log_degree += c.c[i] * ei;
  }
  out.log_rho = std::log(perron(degree_matrix(s, t)).rho);
  out.residual = std::abs(out.entropy + (t - 1.0) * out.mean_log_degree - out.log_rho);
  return out;
}

inline double entropy_identity_residual(const GdmsSystem& s, double t) { return entropy_identity(s, t).residual; }

}  // namespace gdms
