#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gdms/complex_poly.hpp"
#include "gdms/error.hpp"

namespace gdms {

using VertexId = std::size_t;
using GeneratorId = std::size_t;

struct Vertex {
  VertexId index = 0;
  std::string name;
};

struct Edge {
  std::size_t index = 0;
  std::string id;
  VertexId from = 0;  ///< initial vertex
  VertexId to = 0;    ///< terminal vertex
  std::vector<RationalMap> maps;
};

/// One element (map, edge) of the generator index set; endpoints are inherited from the edge.
struct Generator {
  std::size_t edge = 0;
  std::size_t map_slot = 0;
  VertexId from = 0;
  VertexId to = 0;
  int degree = 1;
};

/// Immutable rational graph-directed Markov system: a directed multigraph whose edges carry finite,
/// nonempty sets of rational maps. Generators are numbered edge by edge, map slot by map slot.
class GdmsSystem {
 public:
  GdmsSystem(std::vector<Vertex> vertices, std::vector<Edge> edges)
      : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    into_.resize(vertices_.size());
    out_of_.resize(vertices_.size());
    for (const auto& e : edges_) {
      for (std::size_t s = 0; s < e.maps.size(); ++s) {
        const GeneratorId id = generators_.size();
        generators_.push_back({e.index, s, e.from, e.to, e.maps[s].degree()});
        out_of_[e.from].push_back(id);
        into_[e.to].push_back(id);
      }
    }
  }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }
  const Generator& generator(GeneratorId g) const { return generators_.at(g); }
  const RationalMap& map(GeneratorId g) const {
    const auto& gen = generators_.at(g);
    return edges_[gen.edge].maps[gen.map_slot];
  }

  /// Generators α with terminal vertex j.
  const std::vector<GeneratorId>& generators_into(VertexId j) const { return into_.at(j); }
  /// Generators α with initial vertex i.
  const std::vector<GeneratorId>& generators_out_of(VertexId i) const { return out_of_.at(i); }

  std::optional<VertexId> find_vertex(std::string_view name) const {
    for (const auto& v : vertices_)
      if (v.name == name) return v.index;
    return std::nullopt;
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<Generator> generators_;
  std::vector<std::vector<GeneratorId>> into_;
  std::vector<std::vector<GeneratorId>> out_of_;
};

// ---------------------------------------------------------------------------------------------
// JSON document format
//
// { "vertices": ["v1", ...],
//   "edges": [ { "id": "e1", "from": "v1", "to": "v2",
//                "maps": [ { "num": [[re,im],...], "den": [[re,im],...] } ] } ] }
//
// Coefficients ascend by power; "den" defaults to [[1,0]].
// ---------------------------------------------------------------------------------------------

namespace detail {

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline std::vector<cplx> parse_coeffs(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a nonempty array of [re, im] pairs");
  std::vector<cplx> out;
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw ParseError(where + ": each coefficient must be a [re, im] pair of numbers");
    out.emplace_back(c[0].get<double>(), c[1].get<double>());
  }
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
  return obj.at(key);
}

}  // namespace detail

inline GdmsSystem system_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("system document must be a JSON object");
  const auto& jv = detail::require(doc, "vertices", "document");
  if (!jv.is_array() || jv.empty()) throw ParseError("\"vertices\" must be a nonempty array of names");

  std::vector<Vertex> vertices;
  std::map<std::string, VertexId> by_name;
  for (const auto& v : jv) {
    if (!v.is_string()) throw ParseError("vertex names must be strings");
    const auto name = v.get<std::string>();
    if (by_name.count(name)) throw ParseError("duplicate vertex \"" + name + "\"");
    by_name[name] = vertices.size();
    vertices.push_back({vertices.size(), name});
  }

  const auto& je = detail::require(doc, "edges", "document");
  if (!je.is_array()) throw ParseError("\"edges\" must be an array");
  std::vector<Edge> edges;
  std::map<std::string, bool> edge_ids;
  for (const auto& e : je) {
    const std::string where = "edge " + std::to_string(edges.size());
    Edge edge;
    edge.index = edges.size();
    const auto& id = detail::require(e, "id", where);
    if (!id.is_string()) throw ParseError(where + ": \"id\" must be a string");
    edge.id = id.get<std::string>();
    if (edge_ids.count(edge.id)) throw ParseError("duplicate edge id \"" + edge.id + "\"");
    edge_ids[edge.id] = true;

    for (const char* key : {"from", "to"}) {
      const auto& ref = detail::require(e, key, where);
      if (!ref.is_string()) throw ParseError(where + ": \"" + key + "\" must be a vertex name");
      const auto it = by_name.find(ref.get<std::string>());
      if (it == by_name.end()) throw ParseError("unknown vertex \"" + ref.get<std::string>() + "\" in edge \"" + edge.id + "\"");
      (std::string_view(key) == "from" ? edge.from : edge.to) = it->second;
    }

    const auto& jm = detail::require(e, "maps", where);
    if (!jm.is_array() || jm.empty()) throw ParseError("edge \"" + edge.id + "\" has an empty map set");
    std::vector<std::pair<std::vector<cplx>, std::vector<cplx>>> seen;
    for (const auto& m : jm) {
      const std::string mwhere = "edge \"" + edge.id + "\" map " + std::to_string(edge.maps.size());
      auto num = detail::parse_coeffs(detail::require(m, "num", mwhere), mwhere + " num");
      auto den = m.contains("den") ? detail::parse_coeffs(m.at("den"), mwhere + " den") : std::vector<cplx>{cplx{1.0, 0.0}};
      const Polynomial pd(den);
      if (pd.is_zero()) throw ParseError(mwhere + ": zero denominator polynomial");
      const Polynomial pn(num);
      auto key = std::make_pair(pn.coeffs(), pd.coeffs());
      if (std::find(seen.begin(), seen.end(), key) != seen.end())
        throw ParseError(mwhere + ": duplicate map on the same edge");
      seen.push_back(std::move(key));
      try {
        edge.maps.emplace_back(pn, pd);
      } catch (const ComputationError& err) {
        throw ParseError(mwhere + ": " + err.what());
      }
    }
    edges.push_back(std::move(edge));
  }
  return GdmsSystem(std::move(vertices), std::move(edges));
}

inline GdmsSystem parse_system(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& err) {
    const auto [line, col] = detail::line_column(text, err.byte > 0 ? err.byte - 1 : 0);
    throw ParseError(std::string("malformed JSON: ") + err.what(), line, col);
  }
  return system_from_json(doc);
}

inline GdmsSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

inline nlohmann::json to_json(const GdmsSystem& s) {
  auto coeffs = [](const Polynomial& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : p.coeffs()) arr.push_back({c.real(), c.imag()});
    if (arr.empty()) arr.push_back({0.0, 0.0});
    return arr;
  };
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const auto& v : s.vertices()) doc["vertices"].push_back(v.name);
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : s.edges()) {
    nlohmann::json je{{"id", e.id}, {"from", s.vertices()[e.from].name}, {"to", s.vertices()[e.to].name}};
    je["maps"] = nlohmann::json::array();
    for (const auto& m : e.maps) je["maps"].push_back({{"num", coeffs(m.num())}, {"den", coeffs(m.den())}});
    doc["edges"].push_back(std::move(je));
  }
  return doc;
}

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
inline std::string system_digest(const GdmsSystem& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

// ---------------------------------------------------------------------------------------------
// Graph structure and diagnostics
// ---------------------------------------------------------------------------------------------

/// A_{ij} = number of edges i -> j.
inline std::vector<std::vector<long>> adjacency_counts(const GdmsSystem& s) {
  std::vector<std::vector<long>> a(s.vertex_count(), std::vector<long>(s.vertex_count(), 0));
  for (const auto& e : s.edges()) ++a[e.from][e.to];
  return a;
}

/// Strong connectivity of the edge graph.
inline bool check_irreducible(const GdmsSystem& s) {
  const std::size_t n = s.vertex_count();
  const auto a = adjacency_counts(s);
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w) {
        const long c = transpose ? a[w][v] : a[v][w];
        if (c > 0 && !seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return n > 0 && reach_all(false) && reach_all(true);
}

struct MobiusLoop {
  std::vector<GeneratorId> word;
  cplx trace_squared;  ///< tr²/det of the composed 2x2 matrix
  bool loxodromic = false;
};

struct SystemDiagnostics {
  bool irreducible = false;
  bool has_degree_ge2 = false;
  std::vector<MobiusLoop> mobius_loop_report;
  std::vector<std::string> warnings;
};

/// Scans closed words of length <= max_loop_len made only of degree-1 generators (one
/// representative per cyclic rotation) and classifies each composed Möbius map. A loop that is not
/// loxodromic violates a necessary condition for expansion along fibres.
inline std::vector<MobiusLoop> check_loxodromic_loops(const GdmsSystem& s, int max_loop_len = 6) {
  using Mat = std::array<cplx, 4>;
  auto matrix_of = [&](GeneratorId g) {
    const auto& m = s.map(g);
    // (a z + b) / (c z + d)
    return Mat{m.num().coeff(1), m.num().coeff(0), m.den().coeff(1), m.den().coeff(0)};
  };
  auto mul = [](const Mat& x, const Mat& y) {
    return Mat{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  std::vector<GeneratorId> mobius;
  for (GeneratorId g = 0; g < s.generators().size(); ++g)
    if (s.generator(g).degree == 1) mobius.push_back(g);

  std::vector<MobiusLoop> out;
  std::vector<GeneratorId> word;
  auto canonical = [&] {
    const std::size_t n = word.size();
    for (std::size_t r = 1; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) {
        const auto a = word[(k + r) % n], b = word[k];
        if (a < b) return false;
        if (a > b) break;
      }
    }
    return true;
  };
  auto emit = [&] {
    Mat acc{1.0, 0.0, 0.0, 1.0};
    for (const auto g : word) acc = mul(matrix_of(g), acc);  // g_n ∘ ... ∘ g_1
    const cplx det = acc[0] * acc[3] - acc[1] * acc[2];
    const cplx tr = acc[0] + acc[3];
    const cplx t2 = tr * tr / det;
    constexpr double tol = 1e-9;
    const bool on_segment = std::abs(t2.imag()) <= tol && t2.real() >= -tol && t2.real() <= 4.0 + tol;
    out.push_back({word, t2, !on_segment});
  };
  auto extend = [&](auto&& self, VertexId start, VertexId at) -> void {
    if (!word.empty() && at == start && canonical()) emit();
    if (static_cast<int>(word.size()) >= max_loop_len) return;
    for (const auto g : mobius) {
      if (s.generator(g).from != at) continue;
      if (!word.empty() && g < word.front()) continue;
      word.push_back(g);
      self(self, start, s.generator(g).to);
      word.pop_back();
    }
  };
  for (const auto g : mobius) {
    word.assign(1, g);
    extend(extend, s.generator(g).from, s.generator(g).to);
  }
  return out;
}

inline SystemDiagnostics diagnose(const GdmsSystem& s, int max_loop_len = 6) {
  SystemDiagnostics d;
  d.irreducible = check_irreducible(s);
  d.has_degree_ge2 = std::any_of(s.generators().begin(), s.generators().end(), [](const Generator& g) { return g.degree >= 2; });
  d.mobius_loop_report = check_loxodromic_loops(s, max_loop_len);
  if (!d.irreducible) d.warnings.push_back("graph is not strongly connected; the system is not irreducible");
  for (const auto& loop : d.mobius_loop_report)
    if (!loop.loxodromic) {
      std::string w = "non-loxodromic Möbius loop (";
      for (std::size_t k = 0; k < loop.word.size(); ++k) w += (k ? "-" : "") + std::to_string(loop.word[k]);
      d.warnings.push_back(w + "); the skew product cannot be expanding along fibres");
    }
  return d;
}

}  // namespace gdms
