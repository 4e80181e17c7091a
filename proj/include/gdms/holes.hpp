#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gdms/backward.hpp"
#include "gdms/complex_poly.hpp"
#include "gdms/error.hpp"
#include "gdms/system.hpp"

namespace gdms {

/// Classical distortion bound k(t) = ((1+t)/(1-t))⁴ for univalent maps on the unit disk.
constexpr double koebe_distortion(double t) {
  const double r = (1.0 + t) / (1.0 - t);
  return r * r * r * r;
}

/// Distortion constant used for hole-preimage enclosures: k(1/2) = 81.
inline constexpr double kKoebe = koebe_distortion(0.5);

// ---------------------------------------------------------------------------------------------
// Post-critical approximation
// ---------------------------------------------------------------------------------------------

/// Inner (truncated) approximation of the post-critical set at one vertex.
struct PostcriticalCloud {
  VertexId vertex = 0;
  std::vector<cplx> points;
  std::size_t depth = 0;
  double pitch = 1e-4;     ///< dedup grid pitch
  bool truncated = false;  ///< budget hit; points are a partial cloud
  std::size_t escaped = 0;  ///< orbit points dropped for exceeding the modulus bound
};

struct PostcriticalOptions {
  std::size_t depth = 8;
  std::uint64_t budget = 1'000'000;  ///< total points over all vertices
  double blowup_bound = 1e6;
};

namespace detail {

struct GridSet {
  double pitch;
  std::set<std::pair<long long, long long>> cells;
  std::vector<cplx> points;

  std::pair<long long, long long> cell(cplx z) const {
    return {std::llround(z.real() / pitch), std::llround(z.imag() / pitch)};
  }
  bool insert(cplx z) {
    if (!cells.insert(cell(z)).second) return false;
    points.push_back(z);
    return true;
  }
  bool contains(cplx z) const { return cells.count(cell(z)) > 0; }
};

}  // namespace detail

/// Critical values of g_ξ for all words of length <= depth ending at each vertex, obtained by
/// pushing each letter's critical values forward through the remaining letters. Points are
/// deduplicated on a grid of pitch 1e-4·scale, scale = max(1, max |critical value|).
inline std::vector<PostcriticalCloud> postcritical_clouds(const GdmsSystem& s, const PostcriticalOptions& opt = {}) {
  if (opt.depth < 1) throw ComputationError("postcritical_approx: depth must be at least 1");
  const std::size_t nv = s.vertex_count();

  std::vector<std::vector<cplx>> cv(s.generators().size());
  double scale = 1.0;
  for (GeneratorId g = 0; g < s.generators().size(); ++g) {
    for (const auto& c : s.map(g).critical_points()) {
      try {
        const cplx v = s.map(g)(c);
        if (std::abs(v) <= opt.blowup_bound) {
          cv[g].push_back(v);
          scale = std::max(scale, std::abs(v));
        }
      } catch (const PoleError&) {
        // critical value at infinity
      }
    }
  }
  const double pitch = 1e-4 * scale;

  std::vector<PostcriticalCloud> out(nv);
  std::vector<detail::GridSet> sets(nv, detail::GridSet{pitch, {}, {}});
  std::uint64_t total = 0;
  bool truncated = false;
  std::vector<std::size_t> escaped(nv, 0);

  // Level-by-level: P^(m)_j = ∪_{α into j} CV(α) ∪ g_α(P^(m-1)_{𝒊(α)}).
  std::vector<std::vector<cplx>> frontier(nv);
  for (GeneratorId g = 0; g < s.generators().size(); ++g) {
    const VertexId j = s.generator(g).to;
    for (const auto& v : cv[g])
      if (sets[j].insert(v)) {
        frontier[j].push_back(v);
        ++total;
      }
  }
  for (std::size_t level = 2; level <= opt.depth && !truncated; ++level) {
    std::vector<std::vector<cplx>> next(nv);
    for (GeneratorId g = 0; g < s.generators().size() && !truncated; ++g) {
      const auto& gen = s.generator(g);
      for (const auto& p : frontier[gen.from]) {
        cplx v;
        try {
          v = s.map(g)(p);
        } catch (const PoleError&) {
          ++escaped[gen.to];
          continue;
        }
        if (!(std::abs(v) <= opt.blowup_bound)) {
          ++escaped[gen.to];
          continue;
        }
        if (sets[gen.to].insert(v)) {
          next[gen.to].push_back(v);
          if (++total >= opt.budget) {
            truncated = true;
            break;
          }
        }
      }
    }
    frontier.swap(next);
  }
  for (VertexId v = 0; v < nv; ++v) out[v] = {v, std::move(sets[v].points), opt.depth, pitch, truncated, escaped[v]};
  return out;
}

inline PostcriticalCloud postcritical_approx(const GdmsSystem& s, VertexId vertex, std::size_t depth,
                                             std::uint64_t budget = 1'000'000) {
  PostcriticalOptions opt;
  opt.depth = depth;
  opt.budget = budget;
  return postcritical_clouds(s, opt).at(vertex);
}

// ---------------------------------------------------------------------------------------------
// Hole families
// ---------------------------------------------------------------------------------------------

struct HoleValidation {
  double dist_to_cloud = 0.0;  ///< distance from the center to the sampled Julia set at the vertex
  double cloud_scale = 1.0;    ///< max(1, max |cloud point|)
  double postcritical_clearance = std::numeric_limits<double>::infinity();
  bool on_julia = false;  ///< dist_to_cloud <= 1e-3 · cloud_scale
  bool clear = false;     ///< clearance > 2R
};

/// Vertex-wise holes D(y_i, R) ∩ J_i. Clearance is measured against a truncated post-critical cloud
/// and is therefore a necessary-condition check only.
struct HoleFamily {
  double radius = 0.0;
  std::vector<cplx> centers;
  std::vector<HoleValidation> validation;

  bool valid() const {
    return !centers.empty() && std::all_of(validation.begin(), validation.end(),
                                           [](const HoleValidation& v) { return v.on_julia && v.clear; });
  }
};

struct HoleOptions {
  std::size_t cloud_samples = 2048;
  std::size_t cloud_depth = 12;
  std::uint64_t seed = 0;
  double julia_tol = 1e-3;
  PostcriticalOptions postcritical;
  CloudOptions cloud;
};

class HoleValidationError : public ComputationError {
 public:
  HoleValidationError(const std::string& what, double best_clearance)
      : ComputationError(what), best_clearance_(best_clearance) {}
  double best_clearance() const noexcept { return best_clearance_; }

 private:
  double best_clearance_;
};

namespace detail {

inline double distance_to_set(cplx z, const std::vector<cplx>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, std::abs(z - p));
  return best;
}

struct HoleGeometry {
  std::vector<RepellingPoint> seeds;
  std::vector<std::vector<cplx>> julia;  ///< repelling point followed by the sampled cloud
  std::vector<PostcriticalCloud> postcritical;
};

inline HoleGeometry hole_geometry(const GdmsSystem& s, const HoleOptions& opt) {
  HoleGeometry g;
  g.seeds = repelling_points(s);
  g.postcritical = postcritical_clouds(s, opt.postcritical);
  for (VertexId v = 0; v < s.vertex_count(); ++v) {
    std::vector<cplx> pts{g.seeds[v].point};
    const auto cloud = julia_cloud(s, g.seeds, v, opt.cloud_samples, opt.cloud_depth, opt.seed, opt.cloud);
    pts.insert(pts.end(), cloud.points.begin(), cloud.points.end());
    g.julia.push_back(std::move(pts));
  }
  return g;
}

inline HoleValidation validate_center(cplx y, double radius, const std::vector<cplx>& julia,
                                      const PostcriticalCloud& pc, double julia_tol) {
  HoleValidation v;
  v.dist_to_cloud = distance_to_set(y, julia);
  for (const auto& p : julia) v.cloud_scale = std::max(v.cloud_scale, std::abs(p));
  v.postcritical_clearance = distance_to_set(y, pc.points);
  v.on_julia = v.dist_to_cloud <= julia_tol * v.cloud_scale;
  v.clear = v.postcritical_clearance > 2.0 * radius;
  return v;
}

}  // namespace detail

/// Validates the given centers (one per vertex) at radius R without throwing.
inline HoleFamily validate_hole_family(const GdmsSystem& s, double radius, const std::vector<cplx>& centers,
                                       const HoleOptions& opt = {}) {
  if (!(radius > 0.0)) throw ComputationError("hole family: radius must be positive");
  if (centers.size() != s.vertex_count()) throw ComputationError("hole family: need exactly one center per vertex");
  const auto geo = detail::hole_geometry(s, opt);
  HoleFamily h{radius, centers, {}};
  for (VertexId v = 0; v < s.vertex_count(); ++v)
    h.validation.push_back(detail::validate_center(centers[v], radius, geo.julia[v], geo.postcritical[v], opt.julia_tol));
  return h;
}

/// Builds a validated hole family. Without explicit centers, each vertex takes the Julia sample
/// (repelling point first, then cloud points) farthest from its post-critical cloud; earlier
/// candidates win ties. Throws HoleValidationError with the best achievable clearance otherwise.
inline HoleFamily build_hole_family(const GdmsSystem& s, double radius,
                                    const std::optional<std::vector<cplx>>& centers = std::nullopt,
                                    const HoleOptions& opt = {}) {
  if (!(radius > 0.0)) throw ComputationError("hole family: radius must be positive");
  const auto geo = detail::hole_geometry(s, opt);
  HoleFamily h{radius, {}, {}};
  if (centers) {
    if (centers->size() != s.vertex_count()) throw ComputationError("hole family: need exactly one center per vertex");
    h.centers = *centers;
  } else {
    for (VertexId v = 0; v < s.vertex_count(); ++v) {
      cplx best = geo.julia[v].front();
      double best_clear = detail::distance_to_set(best, geo.postcritical[v].points);
      for (const auto& c : geo.julia[v]) {
        const double cl = detail::distance_to_set(c, geo.postcritical[v].points);
        if (cl > best_clear * (1.0 + 1e-9)) {
          best = c;
          best_clear = cl;
        }
      }
      h.centers.push_back(best);
    }
  }
  for (VertexId v = 0; v < s.vertex_count(); ++v)
    h.validation.push_back(detail::validate_center(h.centers[v], radius, geo.julia[v], geo.postcritical[v], opt.julia_tol));

  for (VertexId v = 0; v < s.vertex_count(); ++v) {
    const auto& val = h.validation[v];
    if (!val.on_julia)
      throw HoleValidationError("hole center at vertex " + s.vertices()[v].name + " is " +
                                    std::to_string(val.dist_to_cloud) + " away from the sampled Julia set",
                                val.postcritical_clearance);
    if (!val.clear) {
      double best = 0.0;
      for (const auto& c : geo.julia[v]) best = std::max(best, detail::distance_to_set(c, geo.postcritical[v].points));
      throw HoleValidationError("no valid hole center at vertex " + s.vertices()[v].name + " for radius " +
                                    std::to_string(radius) + ": post-critical clearance " +
                                    std::to_string(val.postcritical_clearance) + " <= 2R; best achievable clearance " +
                                    std::to_string(best) + " (try R < " + std::to_string(best / 2.0) + ")",
                                best);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------------------------
// Hole preimages
// ---------------------------------------------------------------------------------------------

/// One component of the n-hole preimage, represented by its center z ∈ g_ξ^{-1}(y_{𝒕(ξ)}) and the
/// disk sandwich D(z, r_inner) ⊂ component ⊂ D(z, r_outer).
struct HolePreimageAtom {
  Word word;
  VertexId target_vertex = 0;
  cplx center;
  double log_deriv = 0.0;  ///< log |g_ξ'(center)|
  double r_inner = 0.0;    ///< R / (K |g_ξ'|)
  double r_outer = 0.0;    ///< K R / |g_ξ'|
  double weight = 0.0;     ///< |g_ξ'(center)|^{-δ}
};

namespace detail {

inline void require_valid_holes(const HoleFamily& h) {
  if (!h.valid()) throw ComputationError("hole family is not valid; rebuild it with a smaller radius or other centers");
}

inline void check_tree(const TreeStats& st, VertexId v) {
  if (st.infinite_leaves > 0)
    throw ComputationError("hole center at vertex " + std::to_string(v) +
                           " has preimages at infinity (degree drop); it is not a valid hole target");
}

}  // namespace detail

inline std::vector<HolePreimageAtom> hole_preimages(const GdmsSystem& s, const HoleFamily& holes, double delta,
                                                    std::size_t n, const TreeOptions& opt = {}) {
  detail::require_valid_holes(holes);
  std::vector<HolePreimageAtom> atoms;
  for (VertexId j = 0; j < s.vertex_count(); ++j) {
    TreeStats st;
    auto leaves = preimage_tree(s, j, holes.centers[j], n, opt, &st);
    detail::check_tree(st, j);
    for (auto& leaf : leaves) {
      if (!std::isfinite(leaf.log_deriv))
        throw ComputationError("hole center at vertex " + std::to_string(j) + " is a critical value of some g_ξ");
      const double inv = std::exp(-leaf.log_deriv);
      atoms.push_back({std::move(leaf.word), j, leaf.point, leaf.log_deriv, holes.radius * inv / kKoebe,
                       kKoebe * holes.radius * inv, std::exp(-delta * leaf.log_deriv)});
    }
  }
  return atoms;
}

inline constexpr const char* kMeasureBracketStatement =
    "The conformal mass of the n-hole preimage lies between C1*S and C2*S, where S is the sum of the atom "
    "weights and C1 <= C2 are positive constants depending only on the system and R; their values are not "
    "computed.";

struct MeasureBracket {
  double weight_sum = 0.0;
  std::size_t atoms = 0;
  std::string statement = kMeasureBracketStatement;
};

inline MeasureBracket measure_bracket_report(const std::vector<HolePreimageAtom>& atoms) {
  if (atoms.empty()) throw ComputationError("measure bracket: no atoms");
  detail::CompensatedSum sum;
  for (const auto& a : atoms) sum.add(a.weight);
  return {sum.value(), atoms.size(), kMeasureBracketStatement};
}

}  // namespace gdms
