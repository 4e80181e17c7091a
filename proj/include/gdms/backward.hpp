#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdms/complex_poly.hpp"
#include "gdms/detail/parallel.hpp"
#include "gdms/detail/rng.hpp"
#include "gdms/error.hpp"
#include "gdms/spectral.hpp"
#include "gdms/symbolic.hpp"
#include "gdms/system.hpp"

namespace gdms {

struct TreeOptions {
  double blowup_bound = 1e6;
  std::uint64_t budget = 10'000'000;  ///< maximum number of leaves of one tree
  unsigned threads = 0;
  RootOptions roots;
};

/// A node of a backward tree as seen by visitors. `suffix` holds the letters chosen so far in
/// backward order (suffix[0] = ξ_n, the letter entering the target vertex) and is only valid for
/// the duration of the call.
struct TreeNode {
  std::size_t level = 0;
  std::span<const GeneratorId> suffix;
  cplx point;
  double log_deriv = 0.0;  ///< log |(g_{ξ_{n-level+1}..ξ_n})'(point)|
  bool clustered = false;  ///< some preimage on the chain was merged with a neighbour
};

/// One leaf of a depth-n preimage tree: g_word(point) = target.
struct BackwardLeaf {
  Word word;
  cplx point;
  double log_deriv = 0.0;
  bool clustered = false;
};

struct TreeStats {
  std::uint64_t leaves = 0;
  std::uint64_t nodes = 0;
  std::uint64_t infinite_leaves = 0;  ///< leaves lost to degree drops (preimages at ∞)
  std::uint64_t clustered_leaves = 0;

  void merge(const TreeStats& o) {
    leaves += o.leaves;
    nodes += o.nodes;
    infinite_leaves += o.infinite_leaves;
    clustered_leaves += o.clustered_leaves;
  }
};

namespace detail {

/// below[r][v] = Σ_{words ξ of length r with 𝒕(ξ) = v} deg(g_ξ): the leaves under a point at v.
inline std::vector<std::vector<double>> leaves_below(const GdmsSystem& s, std::size_t depth) {
  const auto m = degree_matrix(s, 1.0);
  std::vector<std::vector<double>> below(depth + 1, std::vector<double>(s.vertex_count(), 1.0));
  for (std::size_t r = 1; r <= depth; ++r) below[r] = m.entries.apply_left(below[r - 1]);
  return below;
}

[[noreturn]] inline void throw_blowup(cplx z, double bound) {
  throw BlowupError("backward orbit reached |z| = " + std::to_string(std::abs(z)) + " > " + std::to_string(bound) +
                    "; the Julia set is assumed to be a bounded subset of the plane, which this system appears to violate");
}

struct TreeContext {
  const GdmsSystem& sys;
  std::size_t depth;
  const TreeOptions& opt;
  const std::vector<std::vector<double>>& below;
};

template <class Acc, class Visit>
void descend(const TreeContext& ctx, VertexId at, cplx w, double logd, bool clustered, std::vector<GeneratorId>& suffix,
             Acc& acc, Visit& visit, TreeStats& stats) {
  const std::size_t level = suffix.size() + 1;
  for (const auto g : ctx.sys.generators_into(at)) {
    const auto& map = ctx.sys.map(g);
    const VertexId from = ctx.sys.generator(g).from;
    const auto pre = map.preimages(w, ctx.opt.roots);
    if (pre.at_infinity > 0)
      stats.infinite_leaves += static_cast<std::uint64_t>(pre.at_infinity) *
                               static_cast<std::uint64_t>(ctx.below[ctx.depth - level][from]);
    suffix.push_back(g);
    for (std::size_t k = 0; k < pre.points.size(); ++k) {
      const cplx z = pre.points[k];
      if (!(std::abs(z) <= ctx.opt.blowup_bound)) throw_blowup(z, ctx.opt.blowup_bound);
      const double ld = logd + std::log(std::abs(map.derivative(z)));
      const bool cl = clustered || pre.clustered[k];
      ++stats.nodes;
      visit(acc, TreeNode{level, std::span<const GeneratorId>(suffix), z, ld, cl});
      if (level < ctx.depth) {
        descend(ctx, from, z, ld, cl, suffix, acc, visit, stats);
      } else {
        ++stats.leaves;
        if (cl) ++stats.clustered_leaves;
      }
    }
    suffix.pop_back();
  }
}

}  // namespace detail

/// Folds `visit(acc, node)` over every node (levels 1..depth) of the backward tree of `target` at
/// `target_vertex`: all z with g_ξ(z) = target for admissible ξ with 𝒕(ξ) = target_vertex, together
/// with log|g_ξ'(z)| accumulated by the chain rule. Work is split over the first backward step; each
/// branch starts from a copy of `init` (which must be an identity for `merge`) and branch results
/// are merged in a fixed order, so the result does not depend on the thread count.
template <class Acc, class Visit, class Merge>
Acc fold_preimage_tree(const GdmsSystem& s, VertexId target_vertex, cplx target, std::size_t depth, Acc init,
                       Visit visit, Merge merge, const TreeOptions& opt = {}, TreeStats* stats_out = nullptr) {
  if (depth == 0) throw ComputationError("preimage tree: depth must be at least 1");
  const auto below = detail::leaves_below(s, depth);
  if (below[depth][target_vertex] > static_cast<double>(opt.budget))
    throw BudgetExceeded("preimage tree: " + std::to_string(static_cast<std::uint64_t>(below[depth][target_vertex])) +
                         " leaves exceed the budget of " + std::to_string(opt.budget));
  const detail::TreeContext ctx{s, depth, opt, below};

  struct Branch {
    GeneratorId g;
    cplx z;
    bool clustered;
  };
  std::vector<Branch> branches;
  TreeStats stats;
  for (const auto g : s.generators_into(target_vertex)) {
    const auto pre = s.map(g).preimages(target, opt.roots);
    if (pre.at_infinity > 0)
      stats.infinite_leaves += static_cast<std::uint64_t>(pre.at_infinity) *
                               static_cast<std::uint64_t>(below[depth - 1][s.generator(g).from]);
    for (std::size_t k = 0; k < pre.points.size(); ++k) branches.push_back({g, pre.points[k], pre.clustered[k]});
  }

  auto results = detail::parallel_map(branches.size(), opt.threads, [&](std::size_t b) {
    const auto& br = branches[b];
    if (!(std::abs(br.z) <= opt.blowup_bound)) detail::throw_blowup(br.z, opt.blowup_bound);
    std::pair<Acc, TreeStats> out{init, TreeStats{}};
    std::vector<GeneratorId> suffix{br.g};
    suffix.reserve(depth);
    const double ld = std::log(std::abs(s.map(br.g).derivative(br.z)));
    ++out.second.nodes;
    visit(out.first, TreeNode{1, std::span<const GeneratorId>(suffix), br.z, ld, br.clustered});
    if (depth > 1) {
      detail::descend(ctx, s.generator(br.g).from, br.z, ld, br.clustered, suffix, out.first, visit, out.second);
    } else {
      ++out.second.leaves;
      if (br.clustered) ++out.second.clustered_leaves;
    }
    return out;
  });

  Acc acc = init;
  bool first = true;
  for (auto& r : results) {
    if (first)
      acc = std::move(r.first);
    else
      merge(acc, std::move(r.first));
    first = false;
    stats.merge(r.second);
  }
  if (stats_out) *stats_out = stats;
  return acc;
}

/// Leaf-only convenience fold: `visit(acc, leaf_node)` is called for depth-n nodes only.
template <class Acc, class Visit, class Merge>
Acc fold_leaves(const GdmsSystem& s, VertexId target_vertex, cplx target, std::size_t depth, Acc init, Visit visit,
                Merge merge, const TreeOptions& opt = {}, TreeStats* stats = nullptr) {
  return fold_preimage_tree(
      s, target_vertex, target, depth, std::move(init),
      [&visit, depth](Acc& acc, const TreeNode& node) {
        if (node.level == depth) visit(acc, node);
      },
      std::move(merge), opt, stats);
}

/// Materialized leaves of the depth-n preimage tree, words in forward order.
inline std::vector<BackwardLeaf> preimage_tree(const GdmsSystem& s, VertexId target_vertex, cplx target, std::size_t depth,
                                               const TreeOptions& opt = {}, TreeStats* stats = nullptr) {
  using Leaves = std::vector<BackwardLeaf>;
  return fold_leaves(
      s, target_vertex, target, depth, Leaves{},
      [](Leaves& acc, const TreeNode& node) {
        Word w{std::vector<GeneratorId>(node.suffix.rbegin(), node.suffix.rend())};
        acc.push_back({std::move(w), node.point, node.log_deriv, node.clustered});
      },
      [](Leaves& into, Leaves&& from) { into.insert(into.end(), from.begin(), from.end()); }, opt, stats);
}

/// g_ξ(z) and log|g_ξ'(z)| by forward evaluation along the word.
inline std::pair<cplx, double> forward_evaluate(const GdmsSystem& s, const Word& w, cplx z) {
  double ld = 0.0;
  for (const auto g : w.letters) {
    const auto [v, d] = s.map(g).eval_with_derivative(z);
    ld += std::log(std::abs(d));
    z = v;
  }
  return {z, ld};
}

// ---------------------------------------------------------------------------------------------
// Repelling fixed points
// ---------------------------------------------------------------------------------------------

struct RepellingPoint {
  VertexId vertex = 0;
  Word loop;
  cplx point;
  double multiplier_modulus = 0.0;
};

/// First repelling fixed point of g_loop over loop words at `vertex`, scanned by increasing
/// length and then lexicographically. Fixed points of one loop are tried in order of decreasing
/// real part. Loops whose composed degree exceeds `max_degree` are skipped.
inline RepellingPoint repelling_fixed_point(const GdmsSystem& s, VertexId vertex, int max_loop_len = 6,
                                            int max_degree = 512) {
  std::optional<RepellingPoint> found;
  for (int len = 1; len <= max_loop_len && !found; ++len) {
    enumerate_words(s, static_cast<std::size_t>(len), vertex, vertex, [&](std::span<const GeneratorId> letters) {
      if (found) return;
      Word w{std::vector<GeneratorId>(letters.begin(), letters.end())};
      if (w.degree(s) > static_cast<std::uint64_t>(max_degree)) return;
      RationalMap composite = s.map(w.letters.front());
      for (std::size_t k = 1; k < w.letters.size(); ++k) composite = s.map(w.letters[k]).compose(composite);
      const Polynomial eq = (composite.num() - Polynomial{cplx{}, cplx{1.0, 0.0}} * composite.den()).trimmed(1e-14);
      if (eq.degree() < 1) return;
      std::vector<cplx> candidates;
      try {
        candidates = roots(eq, 1e-10);
      } catch (const RootFindingError&) {
        return;
      }
      std::sort(candidates.begin(), candidates.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
      });
      for (cplx z : candidates) {
        try {
          // Newton polish on g_loop(z) - z with the chain-rule derivative.
          for (int it = 0; it < 8; ++it) {
            const auto [v, _] = forward_evaluate(s, w, z);
            cplx d = 1.0;
            cplx x = z;
            for (const auto g : w.letters) {
              const auto [gx, gd] = s.map(g).eval_with_derivative(x);
              d *= gd;
              x = gx;
            }
            const cplx step = (v - z) / (d - 1.0);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            z -= step;
            if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
          }
          const auto [v, ld] = forward_evaluate(s, w, z);
          const double mult = std::exp(ld);
          if (std::abs(v - z) <= 1e-8 && mult > 1.0 + 1e-6) {
            found = RepellingPoint{vertex, w, z, mult};
            return;
          }
        } catch (const PoleError&) {
        }
      }
    });
  }
  if (!found)
    throw ComputationError("no repelling fixed point found at vertex " + s.vertices()[vertex].name +
                           " among loops of length <= " + std::to_string(max_loop_len));
  return *found;
}

inline std::vector<RepellingPoint> repelling_points(const GdmsSystem& s, int max_loop_len = 6) {
  std::vector<RepellingPoint> out;
  for (VertexId v = 0; v < s.vertex_count(); ++v) out.push_back(repelling_fixed_point(s, v, max_loop_len));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Julia clouds
// ---------------------------------------------------------------------------------------------

struct PointCloud {
  VertexId vertex = 0;
  std::vector<cplx> points;
  std::size_t depth = 0;
  std::uint64_t seed = 0;
};

struct CloudOptions {
  double blowup_bound = 1e6;
  unsigned threads = 0;
};

/// Random backward walks landing at `vertex`. Each sample draws a forward admissible word of the
/// given depth from `vertex` (letters uniform among generators out of the current vertex), starts at
/// the repelling point of the word's terminal vertex, and pulls it back letter by letter choosing a
/// uniformly random preimage. Sample k uses its own random stream, so the cloud is reproducible for
/// any thread count. The walks approximate the geometry of J_vertex, not any particular measure.
inline PointCloud julia_cloud(const GdmsSystem& s, const std::vector<RepellingPoint>& seeds, VertexId vertex,
                              std::size_t samples, std::size_t depth, std::uint64_t seed, const CloudOptions& opt = {}) {
  PointCloud cloud{vertex, {}, depth, seed};
  cloud.points = detail::parallel_map(samples, opt.threads, [&](std::size_t k) {
    CounterRng rng(seed, k);
    std::vector<GeneratorId> word;
    word.reserve(depth);
    VertexId at = vertex;
    for (std::size_t step = 0; step < depth; ++step) {
      const auto& out = s.generators_out_of(at);
      if (out.empty()) throw ComputationError("julia_cloud: no admissible continuation from vertex " + s.vertices()[at].name);
      const auto g = out[rng.below(out.size())];
      word.push_back(g);
      at = s.generator(g).to;
    }
    cplx z = seeds.at(at).point;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      const auto pre = s.map(*it).preimages(z);
      if (pre.points.empty()) throw ComputationError("julia_cloud: all preimages are at infinity");
      z = pre.points[rng.below(pre.points.size())];
      if (!(std::abs(z) <= opt.blowup_bound)) detail::throw_blowup(z, opt.blowup_bound);
    }
    return z;
  });
  return cloud;
}

inline PointCloud julia_cloud(const GdmsSystem& s, VertexId vertex, std::size_t samples, std::size_t depth,
                              std::uint64_t seed, const CloudOptions& opt = {}) {
  return julia_cloud(s, repelling_points(s), vertex, samples, depth, seed, opt);
}

// ---------------------------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------------------------

/// λ̂_n = (min over the depth-n backward trees of every vertex's repelling point of |g_ξ'|)^{1/n},
/// for n = 1..depth (index n-1). A lower-bound proxy for the fibrewise expansion constant.
inline std::vector<double> expansion_estimate(const GdmsSystem& s, const std::vector<RepellingPoint>& seeds,
                                              std::size_t depth, const TreeOptions& opt = {}) {
  if (depth < 2) throw ComputationError("expansion_estimate: depth must be at least 2");
  using Mins = std::vector<double>;
  Mins mins(depth, std::numeric_limits<double>::infinity());
  for (VertexId v = 0; v < s.vertex_count(); ++v) {
    const auto m = fold_preimage_tree(
        s, v, seeds.at(v).point, depth, Mins(depth, std::numeric_limits<double>::infinity()),
        [](Mins& acc, const TreeNode& node) { acc[node.level - 1] = std::min(acc[node.level - 1], node.log_deriv); },
        [](Mins& into, Mins&& from) {
          for (std::size_t k = 0; k < into.size(); ++k) into[k] = std::min(into[k], from[k]);
        },
        opt);
    for (std::size_t k = 0; k < depth; ++k) mins[k] = std::min(mins[k], m[k]);
  }
  std::vector<double> out(depth);
  for (std::size_t k = 0; k < depth; ++k) out[k] = std::exp(mins[k] / static_cast<double>(k + 1));
  return out;
}

inline std::vector<double> expansion_estimate(const GdmsSystem& s, std::size_t depth, const TreeOptions& opt = {}) {
  return expansion_estimate(s, repelling_points(s), depth, opt);
}

// ---------------------------------------------------------------------------------------------
// Separation heuristic
// ---------------------------------------------------------------------------------------------

inline constexpr const char* kVscHeuristicNote =
    "HEURISTIC: separation is measured between finite point samples of the pulled-back Julia sets; "
    "emptiness of their intersection cannot be decided from samples.";

struct VertexSeparation {
  VertexId vertex = 0;
  std::size_t pairs = 0;               ///< generator pairs out of the vertex that were compared
  std::optional<double> min_separation;  ///< empty when no pair exists (vacuous pass)
  std::optional<std::pair<GeneratorId, GeneratorId>> closest_pair;
  double scale = 1.0;                  ///< diameter of the compared point sets (at least 1)
  bool pass = true;
};

struct VscReport {
  double threshold = 1e-3;  ///< relative to `scale`
  std::vector<VertexSeparation> vertices;
  bool pass = true;
  std::string note = kVscHeuristicNote;
};

namespace detail {

inline double min_distance(std::vector<cplx> a, std::vector<cplx> b) {
  auto by_re = [](cplx x, cplx y) { return x.real() < y.real(); };
  std::sort(a.begin(), a.end(), by_re);
  std::sort(b.begin(), b.end(), by_re);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a) {
    auto it = std::lower_bound(b.begin(), b.end(), p, by_re);
    for (auto r = it; r != b.end() && r->real() - p.real() < best; ++r) best = std::min(best, std::abs(*r - p));
    for (auto l = it; l != b.begin();) {
      --l;
      if (p.real() - l->real() >= best) break;
      best = std::min(best, std::abs(*l - p));
    }
  }
  return best;
}

inline double diameter_bound(const std::vector<cplx>& pts) {
  if (pts.empty()) return 0.0;
  double lo_re = pts[0].real(), hi_re = lo_re, lo_im = pts[0].imag(), hi_im = lo_im;
  for (const auto& p : pts) {
    lo_re = std::min(lo_re, p.real());
    hi_re = std::max(hi_re, p.real());
    lo_im = std::min(lo_im, p.imag());
    hi_im = std::max(hi_im, p.imag());
  }
  return std::hypot(hi_re - lo_re, hi_im - lo_im);
}

}  // namespace detail

/// For each vertex i and each pair of distinct generators α, β out of i, the minimum distance
/// between g_α^{-1}(cloud at 𝒕(α)) and g_β^{-1}(cloud at 𝒕(β)). A vertex fails when that distance is
/// at most `threshold` times the diameter of the compared sets.
inline VscReport vsc_check(const GdmsSystem& s, std::size_t cloud_samples, std::size_t depth, std::uint64_t seed,
                           double threshold = 1e-3, const CloudOptions& opt = {}) {
  VscReport report;
  report.threshold = threshold;
  const auto seeds = repelling_points(s);
  std::vector<std::optional<PointCloud>> clouds(s.vertex_count());
  auto cloud_at = [&](VertexId v) -> const PointCloud& {
    if (!clouds[v]) clouds[v] = julia_cloud(s, seeds, v, cloud_samples, depth, seed, opt);
    return *clouds[v];
  };
  auto pulled_back = [&](GeneratorId g) {
    std::vector<cplx> out;
    for (const auto& p : cloud_at(s.generator(g).to).points)
      for (const auto& z : s.map(g).preimages(p).points) out.push_back(z);
    return out;
  };

  for (VertexId v = 0; v < s.vertex_count(); ++v) {
    VertexSeparation sep;
    sep.vertex = v;
    const auto& out = s.generators_out_of(v);
    std::vector<std::vector<cplx>> sets;
    for (const auto g : out) sets.push_back(pulled_back(g));
    for (std::size_t a = 0; a < out.size(); ++a)
      for (std::size_t b = a + 1; b < out.size(); ++b) {
        ++sep.pairs;
        const double d = detail::min_distance(sets[a], sets[b]);
        std::vector<cplx> both = sets[a];
        both.insert(both.end(), sets[b].begin(), sets[b].end());
        const double scale = std::max(1.0, detail::diameter_bound(both));
        const bool ok = d > threshold * scale;
        if (!sep.min_separation || d < *sep.min_separation) {
          sep.min_separation = d;
          sep.closest_pair = std::make_pair(out[a], out[b]);
          sep.scale = scale;
        }
        sep.pass = sep.pass && ok;
      }
    report.pass = report.pass && sep.pass;
    report.vertices.push_back(sep);
  }
  return report;
}

}  // namespace gdms
