#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdms/detail/numeric.hpp"
#include "gdms/detail/parallel.hpp"
#include "gdms/error.hpp"
#include "gdms/spectral.hpp"
#include "gdms/system.hpp"

namespace gdms {

/// Admissible finite word ξ = (ξ_1, ..., ξ_n): the terminal vertex of each letter is the initial
/// vertex of the next one. g_ξ = g_{ξ_n} ∘ ... ∘ g_{ξ_1}.
struct Word {
  std::vector<GeneratorId> letters;

  std::size_t size() const noexcept { return letters.size(); }
  VertexId initial_vertex(const GdmsSystem& s) const { return s.generator(letters.front()).from; }
  VertexId terminal_vertex(const GdmsSystem& s) const { return s.generator(letters.back()).to; }

  bool admissible(const GdmsSystem& s) const {
    for (std::size_t k = 1; k < letters.size(); ++k)
      if (s.generator(letters[k - 1]).to != s.generator(letters[k]).from) return false;
    return !letters.empty();
  }

  /// Product of letter degrees.
  std::uint64_t degree(const GdmsSystem& s) const {
    std::uint64_t d = 1;
    for (const auto g : letters) d *= static_cast<std::uint64_t>(s.generator(g).degree);
    return d;
  }

  /// Dash-joined generator ids, e.g. "0-1-1".
  std::string to_string() const {
    std::string out;
    for (std::size_t k = 0; k < letters.size(); ++k) out += (k ? "-" : "") + std::to_string(letters[k]);
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;
};

struct EnumerationOptions {
  std::uint64_t budget = 10'000'000;  ///< maximum number of words a brute-force fold may visit
  unsigned threads = 0;
};

namespace detail {

/// can_end[k][v]: some admissible path of exactly k letters leads from v to `end`.
inline std::vector<std::vector<char>> reachability_table(const GdmsSystem& s, std::size_t n, std::optional<VertexId> end) {
  std::vector<std::vector<char>> can(n + 1, std::vector<char>(s.vertex_count(), 0));
  for (VertexId v = 0; v < s.vertex_count(); ++v) can[0][v] = !end || *end == v;
  for (std::size_t k = 1; k <= n; ++k)
    for (const auto& g : s.generators())
      if (can[k - 1][g.to]) can[k][g.from] = 1;
  return can;
}

template <class Visit>
void enumerate_from(const GdmsSystem& s, std::vector<GeneratorId>& prefix, std::size_t n,
                    const std::vector<std::vector<char>>& can, Visit& visit) {
  if (prefix.size() == n) {
    visit(std::span<const GeneratorId>(prefix));
    return;
  }
  const VertexId at = s.generator(prefix.back()).to;
  const std::size_t remaining = n - prefix.size();
  for (const auto g : s.generators_out_of(at)) {
    if (!can[remaining - 1][s.generator(g).to]) continue;
    prefix.push_back(g);
    enumerate_from(s, prefix, n, can, visit);
    prefix.pop_back();
  }
}

}  // namespace detail

/// Depth-first stream of the admissible words of length n (optionally with fixed initial and/or
/// terminal vertex), each exactly once, in lexicographic generator order. `visit` receives a span
/// that is only valid during the call.
template <class Visit>
void enumerate_words(const GdmsSystem& s, std::size_t n, std::optional<VertexId> start, std::optional<VertexId> end,
                     Visit&& visit) {
  if (n == 0) throw ComputationError("enumerate_words: length must be at least 1");
  const auto can = detail::reachability_table(s, n, end);
  std::vector<GeneratorId> prefix;
  prefix.reserve(n);
  for (GeneratorId g = 0; g < s.generators().size(); ++g) {
    if (start && s.generator(g).from != *start) continue;
    if (!can[n - 1][s.generator(g).to]) continue;
    prefix.assign(1, g);
    detail::enumerate_from(s, prefix, n, can, visit);
  }
}

/// 1ᵀ (M^(t))ⁿ 1 by repeated matrix-vector products.
inline double partition_deg_matrix(const GdmsSystem& s, std::size_t n, double t) {
  if (n == 0) throw ComputationError("partition_deg_matrix: n must be at least 1");
  const auto m = degree_matrix(s, t);
  std::vector<double> x(s.vertex_count(), 1.0);
  for (std::size_t k = 0; k < n; ++k) x = m.entries.apply(x);
  detail::CompensatedSum sum;
  for (double v : x) sum.add(v);
  return sum.value();
}

/// Number of admissible words of length n, from the t = 0 matrix.
inline double count_words(const GdmsSystem& s, std::size_t n) { return partition_deg_matrix(s, n, 0.0); }

/// Z_n^deg(t) = Σ_{ξ ∈ Xⁿ} deg(g_ξ)^t by explicit enumeration (split on the first letter).
inline double partition_deg(const GdmsSystem& s, std::size_t n, double t, const EnumerationOptions& opt = {}) {
  if (n == 0) throw ComputationError("partition_deg: n must be at least 1");
  const double words = count_words(s, n);
  if (words > static_cast<double>(opt.budget))
    throw BudgetExceeded("partition_deg: " + std::to_string(static_cast<std::uint64_t>(words)) +
                         " words exceed the enumeration budget; use partition_deg_matrix instead");
  const auto can = detail::reachability_table(s, n, std::nullopt);
  const auto& gens = s.generators();
  std::vector<double> logdeg(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) logdeg[g] = std::log(static_cast<double>(gens[g].degree));

  auto partial = detail::parallel_map(gens.size(), opt.threads, [&](std::size_t first) {
    detail::CompensatedSum sum;
    if (!can[n - 1][gens[first].to]) return sum;
    std::vector<GeneratorId> prefix{first};
    prefix.reserve(n);
    auto visit = [&](std::span<const GeneratorId> w) {
      double ld = 0.0;
      for (const auto g : w) ld += logdeg[g];
      sum.add(std::exp(t * ld));
    };
    detail::enumerate_from(s, prefix, n, can, visit);
    return sum;
  });
  detail::CompensatedSum total;
  for (const auto& p : partial) total.merge(p);
  return total.value();
}

struct PressureSequence {
  double t = 1.0;
  std::vector<double> rates;  ///< rates[k] = (1/n) log Z_n^deg(t), n = k+1
  double limit = 0.0;         ///< log ρ(M^(t))
};

inline PressureSequence pressure_deg(const GdmsSystem& s, double t, std::size_t n_max) {
  if (n_max < 2) throw ComputationError("pressure_deg: n_max must be at least 2");
  PressureSequence out{t, {}, std::log(perron(degree_matrix(s, t)).rho)};
  const auto m = degree_matrix(s, t);
  std::vector<double> x(s.vertex_count(), 1.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    x = m.entries.apply(x);
    detail::CompensatedSum sum;
    for (double v : x) sum.add(v);
    out.rates.push_back(std::log(sum.value()) / static_cast<double>(n));
  }
  return out;
}

}  // namespace gdms
