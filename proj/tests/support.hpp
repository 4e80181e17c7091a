#pragma once

#include <json.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gdms/gdms.hpp"

namespace gdms::test {

inline std::string sample_path(const std::string& name) { return std::string(GDMS_SAMPLE_DIR) + "/" + name + ".json"; }

inline GdmsSystem sample(const std::string& name) { return load_system(sample_path(name)); }

/// Systems with a valid hole family at R = 0.1 and known closed forms.
inline const std::vector<std::string>& solvable_samples() {
  static const std::vector<std::string> names{"z2", "z3", "z4", "two_vertex", "degrees23", "cantor"};
  return names;
}

inline nlohmann::json coeff_json(const std::vector<cplx>& c) {
  auto a = nlohmann::json::array();
  for (const auto& z : c) a.push_back({z.real(), z.imag()});
  return a;
}

struct RandomSystemShape {
  std::size_t max_vertices = 3;
  std::size_t max_generators = 4;
  int max_degree = 4;
  bool rational = false;  ///< add random denominators of lower degree
  bool force_irreducible = true;
};

/// Random map of degree d. Polynomial maps are z ↦ c_d z^d + ... with |c_d| in [0.5, 2]; rational maps
/// divide by 1 + (lower-degree terms).
inline nlohmann::json random_map_json(std::mt19937_64& rng, int d, bool rational) {
  std::uniform_real_distribution<double> box(-0.5, 0.5), mag(0.5, 2.0), phase(0.0, 2.0 * std::numbers::pi);
  std::vector<cplx> num;
  for (int k = 0; k < d; ++k) num.emplace_back(box(rng), box(rng));
  num.push_back(std::polar(mag(rng), phase(rng)));
  nlohmann::json m{{"num", coeff_json(num)}};
  if (rational && d >= 2) {
    std::uniform_int_distribution<int> dd(1, d - 1);
    std::vector<cplx> den{cplx{1.0, 0.0}};
    const int dq = dd(rng);
    for (int k = 1; k <= dq; ++k) den.emplace_back(box(rng), box(rng));
    m["den"] = coeff_json(den);
  }
  return m;
}

/// Random system document. With force_irreducible, the first generators form the cycle 0 → 1 → ... → 0
/// and the rest join random vertex pairs.
inline nlohmann::json random_system_json(std::mt19937_64& rng, const RandomSystemShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> nv(1, shape.max_vertices);
  const std::size_t k = nv(rng);
  std::uniform_int_distribution<std::size_t> ng(shape.force_irreducible ? k : 1, std::max(k, shape.max_generators));
  const std::size_t gens = ng(rng);
  std::uniform_int_distribution<std::size_t> vert(0, k - 1);
  std::uniform_int_distribution<int> deg(1, shape.max_degree);

  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (std::size_t v = 0; v < k; ++v) doc["vertices"].push_back("v" + std::to_string(v));
  doc["edges"] = nlohmann::json::array();
  for (std::size_t g = 0; g < gens; ++g) {
    std::size_t from, to;
    if (shape.force_irreducible && g < k) {
      from = g;
      to = (g + 1) % k;
    } else {
      from = vert(rng);
      to = vert(rng);
    }
    doc["edges"].push_back({{"id", "e" + std::to_string(g)},
                            {"from", "v" + std::to_string(from)},
                            {"to", "v" + std::to_string(to)},
                            {"maps", nlohmann::json::array({random_map_json(rng, deg(rng), shape.rational)})}});
  }
  return doc;
}

inline GdmsSystem random_system(std::mt19937_64& rng, const RandomSystemShape& shape = {}) {
  return system_from_json(random_system_json(rng, shape));
}

/// The 25 randomized systems shared by several suites.
inline std::vector<GdmsSystem> random_systems(std::size_t count = 25, std::uint64_t seed = 20240601) {
  std::mt19937_64 rng(seed);
  std::vector<GdmsSystem> out;
  while (out.size() < count) out.push_back(random_system(rng));
  return out;
}

inline bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

/// |g_ξ'(z)| by a central difference of the forward composition.
inline double fd_derivative_modulus(const GdmsSystem& s, const Word& w, cplx z, double h) {
  const cplx plus = forward_evaluate(s, w, z + h).first;
  const cplx minus = forward_evaluate(s, w, z - h).first;
  return std::abs((plus - minus) / (2.0 * h));
}

}  // namespace gdms::test
