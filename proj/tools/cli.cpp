#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "gdms/gdms.hpp"

namespace gdms::cli {
namespace {

using json = nlohmann::json;

/// Bad flag values and unusable paths; mapped to the input-failure exit code.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Params {
  std::string command;
  std::string system_path;
  std::string window;
  std::string out;
  std::string format = "json";
  std::string vertex = "0";
  double radius = 0.1;
  double t = 1.0;
  double u = 1.0;
  std::size_t depth = 10;
  std::size_t n = 0;
  bool n_given = false;
  int width = 512;
  int height = 512;
  std::size_t samples = 4096;
  std::uint64_t seed = 0;
  std::uint64_t budget = 10'000'000;
  unsigned threads = 0;
};

struct Window {
  std::size_t lo = 0, hi = 0;
};

Window parse_window(const Params& p) {
  if (p.window.empty()) {
    if (p.depth < 3) throw InputError("--depth must be at least 3 when --window is omitted");
    return {p.depth > 4 ? std::size_t{4} : std::size_t{2}, p.depth};
  }
  const auto colon = p.window.find(':');
  Window w;
  try {
    if (colon == std::string::npos) throw std::invalid_argument("colon");
    std::size_t used = 0;
    w.lo = std::stoul(p.window.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("lo");
    const std::string rest = p.window.substr(colon + 1);
    w.hi = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("hi");
  } catch (const std::exception&) {
    throw InputError("--window expects LO:HI, got \"" + p.window + "\"");
  }
  if (w.lo < 2 || w.hi <= w.lo) throw InputError("--window needs 2 <= LO < HI");
  return w;
}

json point(cplx z) { return json::array({z.real(), z.imag()}); }

json points(const std::vector<cplx>& zs) {
  json a = json::array();
  for (const auto& z : zs) a.push_back(point(z));
  return a;
}

VertexId resolve_vertex(const GdmsSystem& s, const std::string& text) {
  if (auto v = s.find_vertex(text)) return *v;
  try {
    std::size_t used = 0;
    const auto idx = std::stoul(text, &used);
    if (used == text.size() && idx < s.vertex_count()) return idx;
  } catch (const std::exception&) {
  }
  throw InputError("--vertex \"" + text + "\" names no vertex of the system");
}

/// Accumulates one RunReport and times its stages.
class Run {
 public:
  explicit Run(const Params& p) {
    doc_["command"] = p.command;
    doc_["results"] = json::object();
    doc_["warnings"] = json::array();
    doc_["timings"] = json::object();
  }

  template <class F>
  decltype(auto) stage(const std::string& name, F&& f) {
    stage_ = name;
    const auto start = std::chrono::steady_clock::now();
    struct Stamp {
      json& timings;
      std::string name;
      std::chrono::steady_clock::time_point start;
      ~Stamp() {
        timings[name] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
    } stamp{doc_["timings"], name, start};
    return f();
  }

  json& results() { return doc_["results"]; }
  json& doc() { return doc_; }
  void warn(const std::string& w) { doc_["warnings"].push_back(w); }
  const std::string& current_stage() const { return stage_; }

 private:
  json doc_;
  std::string stage_ = "load";
};

json parameters_json(const Params& p) {
  json j{{"system", p.system_path}, {"radius", p.radius}, {"depth", p.depth}, {"t", p.t},    {"u", p.u},
         {"seed", p.seed},          {"budget", p.budget}, {"format", p.format}, {"vertex", p.vertex},
         {"samples", p.samples},    {"width", p.width},   {"height", p.height}};
  j["window"] = p.window.empty() ? json(nullptr) : json(p.window);
  j["n"] = p.n_given ? json(p.n) : json(nullptr);
  return j;
}

json validation_json(const HoleFamily& h) {
  json a = json::array();
  for (std::size_t v = 0; v < h.validation.size(); ++v) {
    const auto& val = h.validation[v];
    a.push_back({{"vertex", v},
                 {"center", point(h.centers[v])},
                 {"dist_to_cloud", val.dist_to_cloud},
                 {"cloud_scale", val.cloud_scale},
                 {"postcritical_clearance", val.postcritical_clearance},
                 {"on_julia", val.on_julia},
                 {"clear", val.clear}});
  }
  return {{"radius", h.radius}, {"centers", points(h.centers)}, {"validation", a}, {"valid", h.valid()}};
}

json rows_json(const std::vector<GeomPartitionRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back({{"n", r.n}, {"u", r.u}, {"log_Z", r.log_Z}, {"pressure_hat", r.pressure_hat()}});
  return a;
}

json vsc_json(const VscReport& r) {
  json verts = json::array();
  for (const auto& v : r.vertices) {
    json j{{"vertex", v.vertex}, {"pairs", v.pairs}, {"scale", v.scale}, {"pass", v.pass}};
    j["min_separation"] = v.min_separation ? json(*v.min_separation) : json(nullptr);
    j["closest_pair"] = v.closest_pair ? json::array({v.closest_pair->first, v.closest_pair->second}) : json(nullptr);
    verts.push_back(j);
  }
  return {{"pass", r.pass}, {"threshold", r.threshold}, {"note", r.note}, {"vertices", verts}};
}

struct Context {
  const Params& p;
  const GdmsSystem& s;
  Run& run;
  std::ostringstream text;  ///< CSV output, when requested
  TreeOptions tree;
  CloudOptions cloud;
  HoleOptions holes;
};

HoleFamily make_holes(Context& c) {
  return c.run.stage("holes", [&] { return build_hole_family(c.s, c.p.radius, std::nullopt, c.holes); });
}

// --- subcommands ---------------------------------------------------------------------------------

void cmd_validate(Context& c, bool standalone) {
  auto diag = c.run.stage("validate", [&] { return diagnose(c.s); });
  json& r = c.run.results()["validation"];
  r["irreducible"] = diag.irreducible;
  r["vertex_count"] = c.s.vertex_count();
  r["edge_count"] = c.s.edges().size();
  r["generator_count"] = c.s.generators().size();
  json degrees = json::array(), gens = json::array();
  for (const auto& g : c.s.generators()) {
    degrees.push_back(g.degree);
    gens.push_back({{"edge", c.s.edges()[g.edge].id},
                    {"slot", g.map_slot},
                    {"from", c.s.vertices()[g.from].name},
                    {"to", c.s.vertices()[g.to].name},
                    {"degree", g.degree}});
  }
  r["degrees"] = degrees;
  r["generators"] = gens;
  r["adjacency"] = adjacency_counts(c.s);
  r["has_degree_ge2"] = diag.has_degree_ge2;
  json loops = json::array();
  for (const auto& l : diag.mobius_loop_report)
    loops.push_back({{"word", l.word}, {"trace_squared", point(l.trace_squared)}, {"loxodromic", l.loxodromic}});
  r["mobius_loops"] = loops;
  for (const auto& w : diag.warnings) c.run.warn(w);
  if (!diag.irreducible) {
    r["vsc"] = nullptr;
    if (!standalone) throw ComputationError("system is not irreducible");
    return;
  }
  try {
    const auto vsc = c.run.stage("vsc", [&] { return vsc_check(c.s, c.p.samples, c.p.depth, c.p.seed, 1e-3, c.cloud); });
    r["vsc"] = vsc_json(vsc);
    if (!vsc.pass) c.run.warn("heuristic vertex-separation check failed; see results.vsc");
  } catch (const Error& e) {
    if (!standalone) throw;
    r["vsc"] = nullptr;
    c.run.warn(std::string("vertex-separation check skipped: ") + e.what());
  }
}

json entropy_identity_json(const GdmsSystem& s, double t) {
  const auto e = entropy_identity(s, t);
  return {{"t", e.t}, {"entropy", e.entropy}, {"mean_log_degree", e.mean_log_degree}, {"log_rho", e.log_rho},
          {"residual", e.residual}};
}

void cmd_entropy(Context& c) {
  const auto m = degree_matrix(c.s, c.p.t);
  const auto pd = c.run.stage("entropy", [&] { return perron(m); });
  const auto seq = c.run.stage("convergence", [&] { return pressure_deg(c.s, c.p.t, std::max<std::size_t>(c.p.depth, 2)); });
  json matrix = json::array();
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.entries.size(); ++j) row.push_back(m.entries(i, j));
    matrix.push_back(row);
  }
  json table = json::array();
  for (std::size_t k = 0; k < seq.rates.size(); ++k) table.push_back({{"n", k + 1}, {"rate", seq.rates[k]}});
  auto& r = c.run.results();
  r["t"] = c.p.t;
  r["matrix"] = matrix;
  r["rho"] = pd.rho;
  r["log_rho"] = std::log(pd.rho);
  r["left"] = pd.left;
  r["right"] = pd.right;
  r["convergence"] = table;
  if (c.p.format == "csv") {
    c.text << "n,rate\n";
    for (std::size_t k = 0; k < seq.rates.size(); ++k) c.text << k + 1 << ',' << format_double(seq.rates[k]) << '\n';
  }
}

void cmd_partition(Context& c) {
  const std::size_t n_max = c.p.n_given ? c.p.n : c.p.depth;
  if (n_max < 1) throw InputError("--n must be at least 1");
  json rows = json::array();
  bool budget_hit = false;
  c.run.stage("partition", [&] {
    for (std::size_t n = 1; n <= n_max; ++n) {
      json row{{"n", n}, {"t", c.p.t}, {"words", count_words(c.s, n)}, {"Z_matrix", partition_deg_matrix(c.s, n, c.p.t)}};
      row["Z_bruteforce"] = nullptr;
      if (!budget_hit) {
        try {
          row["Z_bruteforce"] = partition_deg(c.s, n, c.p.t, {c.p.budget, c.tree.threads});
        } catch (const BudgetExceeded& e) {
          budget_hit = true;
          c.run.warn(e.what());
        }
      }
      rows.push_back(row);
    }
  });
  c.run.results()["rows"] = rows;
  if (c.p.format == "csv") {
    c.text << "n,t,words,Z_matrix,Z_bruteforce\n";
    for (const auto& r : rows)
      c.text << r["n"].get<std::size_t>() << ',' << format_double(c.p.t) << ',' << format_double(r["words"].get<double>())
             << ',' << format_double(r["Z_matrix"].get<double>()) << ','
             << (r["Z_bruteforce"].is_null() ? std::string() : format_double(r["Z_bruteforce"].get<double>())) << '\n';
  }
}

void cmd_geom(Context& c) {
  const auto holes = make_holes(c);
  c.run.results()["holes"] = validation_json(holes);
  const auto spec = c.run.stage("spectrum", [&] { return geom_spectrum(c.s, holes, 1, c.p.depth, c.tree); });
  std::vector<GeomPartitionRow> rows;
  for (std::size_t n = 1; n <= c.p.depth; ++n) rows.push_back({n, c.p.u, spec.log_partition(n, c.p.u)});
  c.run.results()["u"] = c.p.u;
  c.run.results()["rows"] = rows_json(rows);
  if (c.p.format == "csv") write_partition_csv(c.text, rows);
}

json bowen_json(const BowenEstimate& b) {
  return {{"delta_hat", b.delta_hat}, {"depth", b.depth},       {"window_lo", b.window_lo},
          {"bracket", {b.lo, b.hi}},  {"residual", b.residual}, {"slope_residual", b.slope_residual}};
}

void cmd_bowen(Context& c) {
  if (c.p.depth < 2) throw InputError("--depth must be at least 2");
  const auto holes = make_holes(c);
  c.run.results()["holes"] = validation_json(holes);
  const auto b = c.run.stage("bowen", [&] { return bowen_parameter(c.s, holes, c.p.depth, 1e-6, c.tree); });
  c.run.results()["bowen"] = bowen_json(b);
}

json atoms_json(const GdmsSystem& s, const std::vector<HolePreimageAtom>& atoms) {
  json a = json::array();
  for (const auto& at : atoms)
    a.push_back({{"word", at.word.to_string()},
                 {"start_vertex", s.vertices()[at.word.initial_vertex(s)].name},
                 {"target_vertex", s.vertices()[at.target_vertex].name},
                 {"center", point(at.center)},
                 {"log_deriv", at.log_deriv},
                 {"r_inner", at.r_inner},
                 {"r_outer", at.r_outer},
                 {"weight", at.weight}});
  return a;
}

void cmd_holes(Context& c) {
  if (c.p.format == "csv" && !c.p.n_given) throw InputError("--format csv for holes lists atoms and needs --n");
  const auto holes = make_holes(c);
  c.run.results()["holes"] = validation_json(holes);
  c.run.results()["koebe_constant"] = kKoebe;
  if (!c.p.n_given) return;
  if (c.p.n < 1) throw InputError("--n must be at least 1");
  const auto atoms = c.run.stage("preimages", [&] { return hole_preimages(c.s, holes, c.p.u, c.p.n, c.tree); });
  const auto mb = measure_bracket_report(atoms);
  c.run.results()["delta"] = c.p.u;
  c.run.results()["atoms"] = atoms_json(c.s, atoms);
  c.run.results()["measure_bracket"] = {{"weight_sum", mb.weight_sum}, {"atoms", mb.atoms}, {"statement", mb.statement}};
  if (c.p.format == "csv") write_atoms_csv(c.text, atoms);
}

void cmd_cloud(Context& c) {
  const auto v = resolve_vertex(c.s, c.p.vertex);
  const auto cloud = c.run.stage("cloud", [&] { return julia_cloud(c.s, v, c.p.samples, c.p.depth, c.p.seed, c.cloud); });
  c.run.results()["vertex"] = c.s.vertices()[v].name;
  c.run.results()["points"] = points(cloud.points);
  if (c.p.format == "csv") write_cloud_csv(c.text, cloud.points);
}

void cmd_report(Context& c, const Window& w) {
  auto& r = c.run.results();
  cmd_validate(c, false);

  c.run.stage("entropy", [&] {
    const auto pd = perron(degree_matrix(c.s, 1.0));
    json ids = json::array();
    for (double t : {0.5, 1.0, 2.0}) ids.push_back(entropy_identity_json(c.s, t));
    r["entropy"] = {{"rho", pd.rho}, {"log_rho", std::log(pd.rho)}, {"identity", ids}};
  });

  const std::size_t exp_depth = std::max(c.p.depth, w.hi);
  const auto lambda = c.run.stage("expansion", [&] {
    const auto seeds = repelling_points(c.s);
    json rp = json::array();
    for (const auto& p : seeds)
      rp.push_back({{"vertex", c.s.vertices()[p.vertex].name},
                    {"loop", p.loop.to_string()},
                    {"point", point(p.point)},
                    {"multiplier_modulus", p.multiplier_modulus}});
    auto lam = expansion_estimate(c.s, seeds, exp_depth, c.tree);
    r["expansion"] = {{"repelling_points", rp}, {"lambda_hat", lam}, {"lambda_hat_used", lam[w.hi - 1]}};
    return lam[w.hi - 1];
  });

  const auto holes = make_holes(c);
  r["holes"] = validation_json(holes);

  const std::size_t first = std::min(bowen_window_start(c.p.depth), w.lo);
  const std::size_t last = std::max(c.p.depth, w.hi);
  const auto spec = c.run.stage("spectrum", [&] { return geom_spectrum(c.s, holes, first, last, c.tree); });
  r["spectrum"] = {{"first_level", first},
                   {"last_level", last},
                   {"nodes", spec.stats.nodes},
                   {"clustered_leaves", spec.stats.clustered_leaves}};
  if (spec.stats.clustered_leaves > 0) c.run.warn("some preimages were merged by root clustering; atom counts may be reduced");

  const auto b = c.run.stage("bowen", [&] { return bowen_parameter(spec, c.p.depth, 1e-6); });
  r["bowen"] = bowen_json(b);

  const auto gp = c.run.stage("geom_pressure", [&] { return geom_pressure(spec, b.delta_hat, w.lo, w.hi); });
  r["geom_pressure"] = {{"delta", gp.delta},
                        {"window", {gp.n_lo, gp.n_hi}},
                        {"slope", gp.slope},
                        {"intercept", gp.intercept},
                        {"last_rate", gp.last_rate},
                        {"tail_max_rate", gp.tail_max_rate},
                        {"estimators_disagree", gp.estimators_disagree},
                        {"rows", rows_json(gp.rows)}};

  const auto d = c.run.stage("decay", [&] { return decay_exponent(c.s, gp, lambda); });
  r["decay"] = {{"e_hat", d.e_hat},   {"entropy", d.entropy},     {"pressure_slope", d.pressure.slope},
                {"lambda_hat", d.lambda_hat}, {"floor", d.floor}, {"radius_note", kRadiusNote}};
  for (const auto& wmsg : d.warnings) c.run.warn(wmsg);
  r["flags"] = {{"vsc_heuristic", true},
                {"estimators_disagree", gp.estimators_disagree},
                {"decay_positive", d.e_hat > 0.0},
                {"postcritical_truncated_check", "hole clearance uses a truncated post-critical cloud"}};
}

void cmd_render(Context& c) {
  if (c.p.out.empty()) throw InputError("render needs --out PATH for the image");
  if (c.p.width <= 0 || c.p.height <= 0) throw InputError("--width and --height must be positive");
  const auto v = resolve_vertex(c.s, c.p.vertex);
  const auto cloud = c.run.stage("cloud", [&] { return julia_cloud(c.s, v, c.p.samples, c.p.depth, c.p.seed, c.cloud); });
  std::vector<Disk> disks;
  json atoms = json::array();
  const auto vp = fit_viewport(cloud.points, c.p.width, c.p.height);
  if (c.p.n_given) {
    if (c.p.n < 1) throw InputError("--n must be at least 1");
    const auto holes = make_holes(c);
    const auto all = c.run.stage("preimages", [&] { return hole_preimages(c.s, holes, c.p.u, c.p.n, c.tree); });
    for (const auto& a : all) {
      if (a.word.initial_vertex(c.s) != v) continue;
      disks.push_back({a.center, a.r_outer});
      atoms.push_back({{"word", a.word.to_string()},
                       {"center", point(a.center)},
                       {"r_outer", a.r_outer},
                       {"pixel", {vp.px(a.center), vp.py(a.center)}}});
    }
  }
  const auto img = c.run.stage("render", [&] { return render_image(cloud.points, disks, vp); });
  std::ofstream f(c.p.out, std::ios::binary);
  if (!f) throw InputError("cannot write image \"" + c.p.out + "\"");
  write_ppm(f, img);
  if (!f.flush()) throw InputError("failed writing image \"" + c.p.out + "\"");
  auto& r = c.run.results();
  r["image"] = c.p.out;
  r["vertex"] = c.s.vertices()[v].name;
  r["width"] = img.width;
  r["height"] = img.height;
  r["points"] = cloud.points.size();
  r["viewport"] = {{"re_min", vp.re_min}, {"im_max", vp.im_max}, {"units_per_pixel", vp.units_per_pixel}};
  r["atoms"] = atoms;
}

bool write_text(const Params& p, const std::string& text, std::ostream& out, std::ostream& err) {
  if (p.out.empty() || p.command == "render") {
    out << text;
    return true;
  }
  std::ofstream f(p.out, std::ios::binary);
  if (!(f << text) || !f.flush()) {
    err << "gdms: cannot write \"" << p.out << "\"\n";
    return false;
  }
  return true;
}

void add_options(CLI::App* sub, Params& p, CLI::Option*& n_opt) {
  sub->add_option("--system", p.system_path, "system document (JSON)")->required();
  sub->add_option("--radius", p.radius, "hole radius R");
  sub->add_option("--depth", p.depth, "tree depth / number of levels");
  sub->add_option("--window", p.window, "regression window LO:HI");
  sub->add_option("--t", p.t, "degree exponent t");
  sub->add_option("--u", p.u, "geometric exponent u (also the atom weight exponent)");
  sub->add_option("--seed", p.seed, "random seed");
  sub->add_option("--out", p.out, "output file");
  sub->add_option("--budget", p.budget, "brute-force enumeration budget");
  sub->add_option("--format", p.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", p.threads, "worker threads (0 = hardware count)");
  sub->add_option("--vertex", p.vertex, "vertex name or index");
  auto* n = sub->add_option("--n", p.n, "level n");
  if (sub->get_name() == "holes" || sub->get_name() == "render" || sub->get_name() == "partition") n_opt = n;
  sub->add_option("--width", p.width, "image width");
  sub->add_option("--height", p.height, "image height");
  sub->add_option("--samples", p.samples, "cloud samples");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Params p;
  CLI::App app{"Rational graph-directed Markov systems: entropy, Bowen parameter, hole preimages"};
  app.name("gdms");
  app.require_subcommand(1);
  const std::vector<std::pair<const char*, const char*>> commands{
      {"validate", "structural diagnostics"},
      {"entropy", "degree matrix, Perron root and convergence table"},
      {"partition", "degree partition function, matrix and brute force"},
      {"geom", "geometric partition function at the hole centers"},
      {"bowen", "zero of the geometric pressure"},
      {"holes", "hole family and, with --n, its preimage atoms"},
      {"cloud", "sampled Julia set at a vertex"},
      {"report", "full pipeline"},
      {"render", "PPM image of a Julia cloud with optional atom overlay"}};
  std::vector<CLI::Option*> n_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    CLI::Option* n_opt = nullptr;
    add_options(sub, p, n_opt);
    sub->callback([&p, name = std::string(name)] { p.command = name; });
    if (n_opt) n_opts.push_back(n_opt);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "gdms: " << e.what() << '\n';
    return kInputFailure;
  }
  for (const auto* o : n_opts) p.n_given = p.n_given || o->count() > 0;

  const char* env = std::getenv("GDMS_THREADS");
  if (env && std::atoi(env) > 0) p.threads = static_cast<unsigned>(std::atoi(env));

  std::optional<GdmsSystem> system;
  try {
    system = load_system(p.system_path);
  } catch (const ParseError& e) {
    err << "gdms: " << e.what() << '\n';
    return kInputFailure;
  } catch (const Error& e) {
    err << "gdms: " << e.what() << '\n';
    return kInputFailure;
  }

  Run run(p);
  run.doc()["system_digest"] = system_digest(*system);
  run.doc()["parameters"] = parameters_json(p);
  Context c{p, *system, run, {}, {}, {}, {}};
  c.tree.threads = p.threads;
  c.tree.budget = p.budget;
  c.cloud.threads = p.threads;
  c.holes.seed = p.seed;
  c.holes.cloud.threads = p.threads;

  int code = kSuccess;
  try {
    const bool csv_capable = p.command == "entropy" || p.command == "partition" || p.command == "geom" ||
                             p.command == "holes" || p.command == "cloud";
    if (p.format == "csv" && !csv_capable) throw InputError("--format csv is not available for " + p.command);
    if (p.command == "validate") {
      cmd_validate(c, true);
      if (!run.results()["validation"]["irreducible"].get<bool>()) code = kComputationFailure;
    } else if (p.command == "entropy") {
      cmd_entropy(c);
    } else if (p.command == "partition") {
      cmd_partition(c);
    } else if (p.command == "geom") {
      cmd_geom(c);
    } else if (p.command == "bowen") {
      cmd_bowen(c);
    } else if (p.command == "holes") {
      cmd_holes(c);
    } else if (p.command == "cloud") {
      cmd_cloud(c);
    } else if (p.command == "report") {
      const auto w = parse_window(p);
      cmd_report(c, w);
    } else if (p.command == "render") {
      cmd_render(c);
    }
  } catch (const InputError& e) {
    err << "gdms: " << e.what() << '\n';
    return kInputFailure;
  } catch (const Error& e) {
    run.doc()["failed_stage"] = run.current_stage();
    json error{{"stage", run.current_stage()}, {"message", e.what()}};
    if (const auto* hv = dynamic_cast<const HoleValidationError*>(&e)) error["best_clearance"] = hv->best_clearance();
    run.doc()["error"] = error;
    err << "gdms: " << p.command << " failed at stage " << run.current_stage() << ": " << e.what() << '\n';
    code = kComputationFailure;
  }

  const bool csv = p.format == "csv" && code == kSuccess;
  const std::string text = csv ? c.text.str() : run.doc().dump(2) + "\n";
  if (!write_text(p, text, out, err)) return kInputFailure;
  return code;
}

}  // namespace gdms::cli
