#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gdms/backward.hpp"
#include "gdms/detail/numeric.hpp"
#include "gdms/error.hpp"
#include "gdms/holes.hpp"
#include "gdms/spectral.hpp"
#include "gdms/system.hpp"

namespace gdms {

/// log|g_ξ'(z)| for every ξ ∈ Xⁿ and every z ∈ g_ξ^{-1}(y_{𝒕(ξ)}), for each level n in
/// [first_level, last_level]. Weights are taken at the hole centers only, so nothing here depends
/// on the hole radius.
struct GeomSpectrum {
  std::size_t first_level = 1;
  std::vector<std::vector<double>> levels;  ///< levels[n - first_level]
  TreeStats stats;

  const std::vector<double>& at(std::size_t n) const {
    if (n < first_level || n >= first_level + levels.size())
      throw ComputationError("geometric spectrum: level " + std::to_string(n) + " was not computed");
    return levels[n - first_level];
  }

  /// log Z_n^geom(u) = log Σ exp(-u · log|g_ξ'|).
  double log_partition(std::size_t n, double u) const { return detail::log_sum_exp_scaled(at(n), -u); }
};

inline GeomSpectrum geom_spectrum(const GdmsSystem& s, const HoleFamily& holes, std::size_t first_level,
                                  std::size_t last_level, const TreeOptions& opt = {}) {
  detail::require_valid_holes(holes);
  if (first_level < 1 || last_level < first_level) throw ComputationError("geometric spectrum: bad level range");
  using Levels = std::vector<std::vector<double>>;
  const std::size_t count = last_level - first_level + 1;
  GeomSpectrum out{first_level, Levels(count), {}};
  for (VertexId j = 0; j < s.vertex_count(); ++j) {
    TreeStats st;
    auto lv = fold_preimage_tree(
        s, j, holes.centers[j], last_level, Levels(count),
        [first_level](Levels& acc, const TreeNode& node) {
          if (node.level >= first_level) acc[node.level - first_level].push_back(node.log_deriv);
        },
        [](Levels& into, Levels&& from) {
          for (std::size_t k = 0; k < into.size(); ++k) into[k].insert(into[k].end(), from[k].begin(), from[k].end());
        },
        opt, &st);
    detail::check_tree(st, j);
    out.stats.merge(st);
    for (std::size_t k = 0; k < count; ++k) {
      for (double x : lv[k])
        if (!std::isfinite(x))
          throw ComputationError("hole center at vertex " + s.vertices()[j].name + " is a critical value of some g_ξ");
      out.levels[k].insert(out.levels[k].end(), lv[k].begin(), lv[k].end());
    }
  }
  return out;
}

struct GeomPartitionRow {
  std::size_t n = 0;
  double u = 0.0;
  double log_Z = 0.0;
  double pressure_hat() const { return log_Z / static_cast<double>(n); }
};

inline GeomPartitionRow geom_partition(const GdmsSystem& s, const HoleFamily& holes, double u, std::size_t n,
                                       const TreeOptions& opt = {}) {
  const auto spec = geom_spectrum(s, holes, n, n, opt);
  return {n, u, spec.log_partition(n, u)};
}

/// 𝒫̂_n(u) = (1/n) log Z_n^geom(u).
inline double pressure_function(const GdmsSystem& s, const HoleFamily& holes, double u, std::size_t n,
                                const TreeOptions& opt = {}) {
  return geom_partition(s, holes, u, n, opt).pressure_hat();
}

struct BowenEstimate {
  double delta_hat = 0.0;
  std::size_t depth = 0;
  std::size_t window_lo = 0;  ///< first level of the regression window
  double lo = 0.0;
  double hi = 0.0;
  double residual = 0.0;        ///< |𝒫̂_depth(delta_hat)|
  double slope_residual = 0.0;  ///< |growth rate of log Z_n(delta_hat) over the window|
};

namespace detail {

/// Least-squares slope of log Z_n(u) against n for n in [lo, hi].
inline double growth_rate(const GeomSpectrum& spec, std::size_t lo, std::size_t hi, double u) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t n = lo; n <= hi; ++n) {
    const double x = static_cast<double>(n);
    const double y = spec.log_partition(n, u);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(hi - lo + 1);
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace detail

/// First level of the window used by the Bowen estimator at a given depth.
constexpr std::size_t bowen_window_start(std::size_t depth) { return depth < 2 ? 1 : (depth + 1) / 2; }

/// Zero of u ↦ (growth rate of log Z_n^geom(u) over n ∈ [⌈depth/2⌉, depth]). The regression removes
/// the constant offset of log Z_n (for instance log #V when every vertex contributes equally) that
/// biases the zero of (1/depth) log Z_depth by O(1/depth). Bracket [0, 2^k] by doubling, then
/// bisection to width tol_u; the rate must be strictly decreasing on sampled points.
inline BowenEstimate bowen_parameter(const GeomSpectrum& spec, std::size_t depth, double tol_u = 1e-6) {
  if (depth < 2) throw ComputationError("bowen_parameter: depth must be at least 2");
  const std::size_t wlo = bowen_window_start(depth);
  auto rate = [&](double u) { return detail::growth_rate(spec, wlo, depth, u); };
  if (!(spec.log_partition(depth, 0.0) > 0.0))
    throw ComputationError("bowen_parameter: pressure at u = 0 is not positive");
  double lo = 0.0, hi = 1.0;
  double r_lo = rate(lo);
  if (!(r_lo > 0.0)) throw ComputationError("bowen_parameter: growth rate at u = 0 is not positive");
  double r_hi = rate(hi);
  while (!(r_hi < 0.0)) {
    if (r_hi > r_lo) throw ComputationError("bowen_parameter: pressure is not decreasing; expansion along fibres is violated");
    lo = hi;
    r_lo = r_hi;
    hi *= 2.0;
    if (hi > 64.0)
      throw ComputationError("bowen_parameter: no sign change for u <= 64; the input does not look expanding");
    r_hi = rate(hi);
  }
  double prev = r_lo;
  for (int k = 1; k <= 16; ++k) {
    const double v = rate(lo + (hi - lo) * k / 16.0);
    if (!(v < prev)) throw ComputationError("bowen_parameter: pressure samples are not strictly decreasing");
    prev = v;
  }
  while (hi - lo > tol_u) {
    const double mid = 0.5 * (lo + hi);
    const double rm = rate(mid);
    if (rm > r_lo || rm < r_hi) throw ComputationError("bowen_parameter: non-monotone pressure sample during bisection");
    if (rm > 0.0) {
      lo = mid;
      r_lo = rm;
    } else {
      hi = mid;
      r_hi = rm;
    }
  }
  BowenEstimate b;
  b.delta_hat = 0.5 * (lo + hi);
  b.depth = depth;
  b.window_lo = wlo;
  b.lo = lo;
  b.hi = hi;
  b.residual = std::abs(spec.log_partition(depth, b.delta_hat) / static_cast<double>(depth));
  b.slope_residual = std::abs(rate(b.delta_hat));
  return b;
}

inline BowenEstimate bowen_parameter(const GdmsSystem& s, const HoleFamily& holes, std::size_t depth = 10,
                                     double tol_u = 1e-6, const TreeOptions& opt = {}) {
  return bowen_parameter(geom_spectrum(s, holes, bowen_window_start(depth), depth, opt), depth, tol_u);
}

/// Exponential growth rate of Z_n^geom(δ) over a window of levels.
struct GeomPressure {
  double delta = 0.0;
  std::size_t n_lo = 0, n_hi = 0;
  double slope = 0.0;          ///< least-squares slope of log Z_n against n
  double intercept = 0.0;
  double last_rate = 0.0;      ///< (1/n_hi) log Z_{n_hi}
  double tail_max_rate = 0.0;  ///< max of (1/n) log Z_n over the upper half of the window
  std::vector<GeomPartitionRow> rows;
  bool estimators_disagree = false;  ///< |slope - tail_max_rate| > 0.05
};

inline GeomPressure geom_pressure(const GeomSpectrum& spec, double delta, std::size_t n_lo, std::size_t n_hi) {
  if (n_lo < 2 || n_hi <= n_lo) throw ComputationError("geom_pressure: window must satisfy 2 <= lo < hi");
  GeomPressure g;
  g.delta = delta;
  g.n_lo = n_lo;
  g.n_hi = n_hi;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    const GeomPartitionRow row{n, delta, spec.log_partition(n, delta)};
    g.rows.push_back(row);
    const double x = static_cast<double>(n);
    sx += x;
    sy += row.log_Z;
    sxx += x * x;
    sxy += x * row.log_Z;
  }
  const double m = static_cast<double>(g.rows.size());
  g.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  g.intercept = (sy - g.slope * sx) / m;
  g.last_rate = g.rows.back().pressure_hat();
  g.tail_max_rate = -std::numeric_limits<double>::infinity();
  for (const auto& r : g.rows)
    if (2 * r.n >= n_lo + n_hi) g.tail_max_rate = std::max(g.tail_max_rate, r.pressure_hat());
  g.estimators_disagree = std::abs(g.slope - g.tail_max_rate) > 0.05;
  return g;
}

inline GeomPressure geom_pressure(const GdmsSystem& s, const HoleFamily& holes, double delta, std::size_t n_lo,
                                  std::size_t n_hi, const TreeOptions& opt = {}) {
  if (n_lo < 2 || n_hi <= n_lo) throw ComputationError("geom_pressure: window must satisfy 2 <= lo < hi");
  return geom_pressure(geom_spectrum(s, holes, n_lo, n_hi, opt), delta, n_lo, n_hi);
}

struct DecayReport {
  double e_hat = 0.0;          ///< log ρ(M) - geometric pressure slope
  double entropy = 0.0;        ///< log ρ(M)
  GeomPressure pressure;
  double lambda_hat = 0.0;     ///< expansion proxy used for the floor
  double floor = 0.0;          ///< δ · log λ̂
  std::vector<std::string> warnings;
};

inline constexpr const char* kRadiusNote =
    "Z_n^geom is evaluated at the hole centers only, so the computed decay exponent does not depend on R; "
    "R enters through hole validation and the Koebe enclosures.";

inline DecayReport decay_exponent(const GdmsSystem& s, const GeomPressure& gp, double lambda_hat) {
  DecayReport d;
  d.entropy = topological_entropy(s);
  d.pressure = gp;
  d.e_hat = d.entropy - gp.slope;
  d.lambda_hat = lambda_hat;
  d.floor = gp.delta * std::log(lambda_hat);
  if (!(d.e_hat > 0.0)) d.warnings.push_back("decay exponent estimate is not positive");
  if (d.e_hat < d.floor - 0.05)
    d.warnings.push_back("decay exponent estimate is below delta*log(lambda_hat) - 0.05; estimators are inconsistent");
  if (gp.estimators_disagree)
    d.warnings.push_back("regression slope and tail-max rate of the geometric pressure differ by more than 0.05");
  return d;
}

inline DecayReport decay_exponent(const GdmsSystem& s, const HoleFamily& holes, double delta, std::size_t n_lo,
                                  std::size_t n_hi, const TreeOptions& opt = {}) {
  const auto gp = geom_pressure(s, holes, delta, n_lo, n_hi, opt);
  const auto lambda = expansion_estimate(s, n_hi, opt);
  return decay_exponent(s, gp, lambda.back());
}

}  // namespace gdms
