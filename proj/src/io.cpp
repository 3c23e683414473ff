#include "polyreach/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace polyreach {

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  fail(ErrorKind::Parse, where + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where + "." + key, "missing key");
  return *it;
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(where, "expected a finite number");
  return v;
}

std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) parse_fail(where, "expected a non-negative integer");
  const auto v = j.get<long long>();
  if (v < 0) parse_fail(where, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> vec(const Json& j, const std::string& where, std::optional<std::size_t> len = std::nullopt) {
  if (!j.is_array()) parse_fail(where, "expected an array");
  if (len && j.size() != *len) {
    parse_fail(where, "expected " + std::to_string(*len) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at(where, i)));
  return out;
}

Matrix matrix(const Json& j, const std::string& where, std::size_t width) {
  if (!j.is_array()) parse_fail(where, "expected an array of rows");
  Matrix out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec(j[i], at(where, i), width));
  return out;
}

// Wraps library validation errors so the message names the key.
template <typename F>
auto guarded(const std::string& where, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    parse_fail(where, e.what());
  }
}

TemplatePolyhedron polyhedron(const Json& j, const std::string& where, std::size_t n) {
  Matrix h = matrix(field(j, "H", where), join(where, "H"), n);
  std::vector<double> c = vec(field(j, "c", where), join(where, "c"), h.size());
  if (h.empty()) return TemplatePolyhedron::universe(n);
  return guarded(where, [&] { return TemplatePolyhedron(std::move(h), std::move(c)); });
}

Json polyhedron_json(const TemplatePolyhedron& p) { return Json{{"H", p.h()}, {"c", p.c()}}; }

ParamPoly poly(const Json& j, const std::string& where, std::size_t n, std::size_t m) {
  if (!j.is_array()) parse_fail(where, "expected an array of terms");
  ParamPoly out(n, m);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = at(where, t);
    const Json& ex = field(j[t], "exponents", w);
    if (!ex.is_array() || ex.size() != n) {
      parse_fail(join(w, "exponents"), "expected " + std::to_string(n) + " exponents");
    }
    MultiIndex idx;
    for (std::size_t k = 0; k < n; ++k) idx.push_back(static_cast<int>(count(ex[k], at(join(w, "exponents"), k))));
    const double c = j[t].contains("coeff_const") ? number(j[t]["coeff_const"], join(w, "coeff_const")) : 0.0;
    std::vector<double> g(m, 0.0);
    if (j[t].contains("coeff_params")) g = vec(j[t]["coeff_params"], join(w, "coeff_params"), m);
    out.add_term(idx, AffineCoeff(c, std::move(g)));
  }
  return out;
}

Json poly_json(const ParamPoly& p) {
  Json terms = Json::array();
  for (const auto& [idx, c] : p.terms()) {
    Json t{{"exponents", idx}, {"coeff_const", c.constant}};
    if (!c.grad.empty()) t["coeff_params"] = c.grad;
    terms.push_back(std::move(t));
  }
  return terms;
}

PolyVector poly_vector(const Json& j, const std::string& where, std::size_t n, std::size_t m) {
  if (!j.is_array() || j.size() != n) parse_fail(where, "expected " + std::to_string(n) + " components");
  PolyVector out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(poly(j[k], at(where, k), n, m));
  return out;
}

Json poly_vector_json(const PolyVector& v) {
  Json out = Json::array();
  for (const auto& p : v) out.push_back(poly_json(p));
  return out;
}

// Dynamics given directly, or as a vector field plus Euler step.
DiscreteSystem system(const Json& j, const std::string& where, std::size_t n, const ParamSet& params) {
  DiscreteSystem sys;
  const std::size_t m = params.dim();
  if (j.contains("field")) {
    PolyVector f = poly_vector(j["field"], join(where, "field"), n, m);
    const double h = number(field(j, "h", where), join(where, "h"));
    sys = guarded(join(where, "h"), [&] { return DiscreteSystem::from_field(std::move(f), h, params); });
  } else if (j.contains("dynamics")) {
    sys.dynamics = poly_vector(j["dynamics"], join(where, "dynamics"), n, m);
    sys.params = params;
  } else {
    parse_fail(join(where, "dynamics"), "missing key (give 'dynamics' or 'field' with 'h')");
  }
  if (j.contains("invariant")) sys.invariant = polyhedron(j["invariant"], join(where, "invariant"), n);
  if (j.contains("events")) {
    const Json& ev = j["events"];
    if (!ev.is_array()) parse_fail(join(where, "events"), "expected an array");
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const std::string w = at(join(where, "events"), i);
      sys.events.push_back({count(field(ev[i], "step", w), join(w, "step")),
                            vec(field(ev[i], "shift", w), join(w, "shift"), n)});
    }
  }
  guarded(where, [&] {
    sys.validate();
    return 0;
  });
  return sys;
}

void system_json(const DiscreteSystem& sys, Json& out) {
  if (sys.euler) {
    out["field"] = poly_vector_json(sys.euler->field);
    out["h"] = sys.euler->h;
  } else {
    out["dynamics"] = poly_vector_json(sys.dynamics);
  }
  if (sys.invariant) out["invariant"] = polyhedron_json(*sys.invariant);
  if (!sys.events.empty()) {
    Json ev = Json::array();
    for (const auto& e : sys.events) ev.push_back({{"step", e.step}, {"shift", e.shift}});
    out["events"] = std::move(ev);
  }
}

std::vector<std::string> names(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where, "expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string s = text(j[i].is_object() ? field(j[i], "name", at(where, i)) : j[i], at(where, i));
    if (std::find(out.begin(), out.end(), s) != out.end()) parse_fail(at(where, i), "duplicate name '" + s + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Seed> seeds(const Json& j, const std::string& where, std::size_t n) {
  if (!j.is_array()) parse_fail(where, "expected an array of seeds");
  std::vector<Seed> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = at(where, i);
    out.push_back({text(field(j[i], "location", w), join(w, "location")),
                   set_from_json(field(j[i], "set", w), n, join(w, "set"))});
  }
  return out;
}

Json seeds_json(const std::vector<Seed>& s) {
  Json out = Json::array();
  for (const auto& seed : s) out.push_back({{"location", seed.location}, {"set", set_to_json(seed.set)}});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sets

Json set_to_json(const ReachSet& s) {
  if (const auto* b = std::get_if<Box>(&s)) return Json{{"type", "box"}, {"lower", b->lower}, {"upper", b->upper}};
  const auto& p = std::get<TemplatePolyhedron>(s);
  return Json{{"type", "template"}, {"H", p.h()}, {"c", p.c()}};
}

ReachSet set_from_json(const Json& j, std::size_t n, const std::string& where) {
  const std::string type = text(field(j, "type", where), join(where, "type"));
  if (type == "box") {
    auto lo = vec(field(j, "lower", where), join(where, "lower"), n);
    auto hi = vec(field(j, "upper", where), join(where, "upper"), n);
    return guarded(where, [&] { return Box(std::move(lo), std::move(hi)); });
  }
  if (type == "template") return polyhedron(j, where, n);
  parse_fail(join(where, "type"), "expected 'box' or 'template'");
}

// ---------------------------------------------------------------------------
// Models

std::size_t Model::axis(const std::string& name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) fail(ErrorKind::InvalidInput, "unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

Matrix Model::template_matrix() const {
  if (template_kind == "octagon") return octagon_template(dim());
  if (template_kind == "custom") return custom_template;
  return box_template(dim());
}

ReachStrategy Model::strategy(StrategyKind kind) const {
  if (kind == StrategyKind::MultiAffine) return ReachStrategy::multiaffine();
  return ReachStrategy::bernstein(template_matrix());
}

Model parse_model(const Json& j) {
  if (!j.is_object()) parse_fail("model", "expected an object");
  Model m;
  m.name = j.contains("name") ? text(j["name"], "name") : "model";
  m.variables = names(field(j, "variables", ""), "variables");
  if (m.variables.empty()) parse_fail("variables", "at least one variable is required");
  const std::size_t n = m.dim();

  ParamSet params;
  if (j.contains("parameters")) {
    const Json& ps = j["parameters"];
    m.parameters = names(ps, "parameters");
    if (j.contains("parameter_polytope")) {
      TemplatePolyhedron poly = polyhedron(j["parameter_polytope"], "parameter_polytope", m.parameters.size());
      params = guarded("parameter_polytope", [&] { return ParamSet(std::move(poly)); });
    } else if (!m.parameters.empty()) {
      std::vector<double> lo, hi;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto iv = vec(field(ps[i], "interval", at("parameters", i)), join(at("parameters", i), "interval"), 2);
        lo.push_back(iv[0]);
        hi.push_back(iv[1]);
      }
      params = guarded("parameters", [&] { return ParamSet(Box(lo, hi)); });
    }
  }

  if (j.contains("template")) {
    const Json& t = j["template"];
    if (t.is_string()) {
      m.template_kind = t.get<std::string>();
      if (m.template_kind != "box" && m.template_kind != "octagon") {
        parse_fail("template", "expected 'box', 'octagon' or an object with 'rows'");
      }
    } else {
      m.template_kind = "custom";
      m.custom_template = matrix(field(t, "rows", "template"), "template.rows", n);
      if (m.custom_template.empty()) parse_fail("template.rows", "at least one row is required");
    }
  }
  if (j.contains("steps")) m.steps = count(j["steps"], "steps");

  if (j.contains("hybrid")) {
    const Json& hj = j["hybrid"];
    HybridAutomaton ha;
    const Json& locs = field(hj, "locations", "hybrid");
    if (!locs.is_array() || locs.empty()) parse_fail("hybrid.locations", "expected a non-empty array");
    for (std::size_t i = 0; i < locs.size(); ++i) {
      const std::string w = at("hybrid.locations", i);
      Location loc{text(field(locs[i], "id", w), join(w, "id")), system(locs[i], w, n, params), std::nullopt};
      if (locs[i].contains("location_invariant")) {
        loc.invariant = polyhedron(locs[i]["location_invariant"], join(w, "location_invariant"), n);
      }
      ha.locations.push_back(std::move(loc));
    }
    if (hj.contains("transitions")) {
      const Json& ts = hj["transitions"];
      if (!ts.is_array()) parse_fail("hybrid.transitions", "expected an array");
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string w = at("hybrid.transitions", i);
        ha.transitions.push_back({text(field(ts[i], "source", w), join(w, "source")),
                                  text(field(ts[i], "target", w), join(w, "target")),
                                  polyhedron(field(ts[i], "guard", w), join(w, "guard"), n)});
      }
    }
    ha.initial = seeds(field(hj, "initial", "hybrid"), "hybrid.initial", n);
    if (hj.contains("unsafe")) {
      ha.unsafe = seeds(hj["unsafe"], "hybrid.unsafe", n);
      m.has_unsafe = true;
    }
    guarded("hybrid", [&] {
      ha.validate();
      return 0;
    });
    m.hybrid = std::move(ha);

    if (hj.contains("region")) {
      const Json& r = hj["region"];
      RegionSpec reg;
      if (r.contains("fix")) {
        const Json& fx = r["fix"];
        if (!fx.is_array()) parse_fail("hybrid.region.fix", "expected an array");
        for (std::size_t i = 0; i < fx.size(); ++i) {
          const std::string w = at("hybrid.region.fix", i);
          reg.fixes.emplace_back(text(field(fx[i], "axis", w), join(w, "axis")),
                                  number(field(fx[i], "value", w), join(w, "value")));
        }
      }
      const Json& ax = field(r, "axes", "hybrid.region");
      if (!ax.is_array() || ax.size() != 2) parse_fail("hybrid.region.axes", "expected two variable names");
      reg.axes = {text(ax[0], "hybrid.region.axes[0]"), text(ax[1], "hybrid.region.axes[1]")};
      if (r.contains("locations")) reg.locations = names(r["locations"], "hybrid.region.locations");
      if (r.contains("split")) {
        const Json& sp = r["split"];
        if (!sp.is_array() || sp.size() != 2) parse_fail("hybrid.region.split", "expected two counts");
        reg.split = {count(sp[0], "hybrid.region.split[0]"), count(sp[1], "hybrid.region.split[1]")};
      }
      for (const auto& name : {reg.axes[0], reg.axes[1]}) {
        if (std::find(m.variables.begin(), m.variables.end(), name) == m.variables.end()) {
          parse_fail("hybrid.region.axes", "unknown variable '" + name + "'");
        }
      }
      for (const auto& [name, value] : reg.fixes) {
        if (std::find(m.variables.begin(), m.variables.end(), name) == m.variables.end()) {
          parse_fail("hybrid.region.fix", "unknown variable '" + name + "'");
        }
      }
      m.region = std::move(reg);
    }
  } else {
    m.system = system(j, "", n, params);
    m.initial = set_from_json(field(j, "initial", ""), n, "initial");
  }

  if (j.contains("consensus")) {
    const Json& c = j["consensus"];
    ConsensusOptions opts;
    if (c.contains("N")) opts.N = number(c["N"], "consensus.N");
    if (c.contains("threshold")) opts.threshold = number(c["threshold"], "consensus.threshold");
    if (c.contains("window")) opts.window = count(c["window"], "consensus.window");
    if (n != 5) parse_fail("consensus", "consensus needs the five bee variables");
    m.consensus = opts;
  }
  return m;
}

Json model_to_json(const Model& m) {
  Json j;
  j["name"] = m.name;
  j["variables"] = m.variables;
  const ParamSet* params = nullptr;
  if (m.system) params = &m.system->params;
  if (m.hybrid) params = &m.hybrid->locations.front().system.params;
  if (params && params->dim() > 0) {
    Json ps = Json::array();
    for (std::size_t i = 0; i < params->dim(); ++i) {
      const std::string name = i < m.parameters.size() ? m.parameters[i] : "p" + std::to_string(i);
      Json p{{"name", name}};
      if (params->is_box()) p["interval"] = {params->box()->lower[i], params->box()->upper[i]};
      ps.push_back(std::move(p));
    }
    j["parameters"] = std::move(ps);
    if (!params->is_box()) j["parameter_polytope"] = polyhedron_json(params->polyhedron());
  }
  if (m.template_kind == "custom") {
    j["template"] = {{"rows", m.custom_template}};
  } else {
    j["template"] = m.template_kind;
  }
  if (m.steps > 0) j["steps"] = m.steps;
  if (m.system) {
    system_json(*m.system, j);
    j["initial"] = set_to_json(*m.initial);
  }
  if (m.hybrid) {
    Json h;
    Json locs = Json::array();
    for (const auto& loc : m.hybrid->locations) {
      Json l{{"id", loc.id}};
      system_json(loc.system, l);
      if (loc.invariant) l["location_invariant"] = polyhedron_json(*loc.invariant);
      locs.push_back(std::move(l));
    }
    h["locations"] = std::move(locs);
    Json ts = Json::array();
    for (const auto& t : m.hybrid->transitions) {
      ts.push_back({{"source", t.source}, {"target", t.target}, {"guard", polyhedron_json(t.guard)}});
    }
    h["transitions"] = std::move(ts);
    h["initial"] = seeds_json(m.hybrid->initial);
    if (m.has_unsafe) h["unsafe"] = seeds_json(m.hybrid->unsafe);
    if (m.region) {
      Json fx = Json::array();
      for (const auto& [name, value] : m.region->fixes) fx.push_back({{"axis", name}, {"value", value}});
      h["region"] = {{"fix", fx},
                     {"axes", m.region->axes},
                     {"locations", m.region->locations},
                     {"split", m.region->split}};
    }
    j["hybrid"] = std::move(h);
  }
  if (m.consensus) {
    j["consensus"] = {{"N", m.consensus->N}, {"threshold", m.consensus->threshold}, {"window", m.consensus->window}};
  }
  return j;
}

Model load_model(const std::string& path) {
  const std::string content = read_file(path);
  Json j;
  try {
    j = Json::parse(content);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
  return parse_model(j);
}

Model bees_model(const BeesConfig& cfg, const std::string& name) {
  BeesModel bm = build_bees(cfg);
  Model m;
  m.name = name;
  m.variables = bees::kVariables;
  m.parameters = {"beta2"};
  m.steps = cfg.steps;
  m.system = std::move(bm.system);
  m.initial = bm.initial;
  m.consensus = ConsensusOptions{cfg.N, 0.3, 500};
  return m;
}

Model cardiac_model(const CardiacConfig& cfg, const std::string& name) {
  Model m;
  m.name = name;
  m.variables = cardiac::kVariables;
  m.steps = cfg.horizon();
  m.hybrid = build_cardiac(cfg);
  m.has_unsafe = true;
  RegionSpec r;
  r.fixes = {{"u", cfg.u0}, {"t", 0.0}};
  r.axes = {"g1", "g2"};
  r.locations = {cardiac::kLoc1Stim};
  r.split = {20, 10};
  m.region = r;
  return m;
}

// ---------------------------------------------------------------------------
// Traces

std::string trace_to_ndjson(const ReachTrace& trace, const TraceMeta& meta) {
  std::string out;
  Json head{{"type", "metadata"},
            {"model", meta.model},
            {"strategy", meta.strategy},
            {"wall_time_ms", meta.wall_time_ms},
            {"dim", trace.dim},
            {"variables", meta.variables},
            {"config", meta.config}};
  out += head.dump() + "\n";
  for (const auto& e : trace.entries) {
    Json r{{"step", e.step}, {"location", e.location}, {"set", set_to_json(e.set)}};
    out += r.dump() + "\n";
  }
  return out;
}

ReachTrace trace_from_ndjson(const std::string& content, TraceMeta* meta) {
  std::istringstream in(content);
  std::string line;
  ReachTrace trace;
  bool have_head = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      parse_fail(where, e.what());
    }
    if (!have_head) {
      if (!j.contains("type") || j["type"] != "metadata") parse_fail(where, "expected the metadata record first");
      trace.dim = count(field(j, "dim", where), join(where, "dim"));
      if (meta) {
        meta->model = j.value("model", "");
        meta->strategy = j.value("strategy", "");
        meta->wall_time_ms = j.value("wall_time_ms", 0.0);
        if (j.contains("variables")) meta->variables = names(j["variables"], join(where, "variables"));
        meta->config = j.value("config", Json::object());
      }
      have_head = true;
      continue;
    }
    TraceEntry e;
    e.step = count(field(j, "step", where), join(where, "step"));
    e.location = j.contains("location") ? text(j["location"], join(where, "location")) : "";
    e.set = set_from_json(field(j, "set", where), trace.dim, join(where, "set"));
    if (!trace.entries.empty()) {
      const std::size_t prev = trace.entries.back().step;
      if (e.step != prev && e.step != prev + 1) parse_fail(join(where, "step"), "steps must be contiguous");
    } else if (e.step != 0) {
      parse_fail(join(where, "step"), "first step must be 0");
    }
    trace.entries.push_back(std::move(e));
  }
  if (!have_head) fail(ErrorKind::Parse, "trace file has no metadata record");
  return trace;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string projection_csv(const ReachTrace& trace, std::size_t a, std::size_t b, std::optional<std::size_t> first) {
  require(a < trace.dim && b < trace.dim, ErrorKind::DimensionMismatch,
          "projection axis out of range for a " + std::to_string(trace.dim) + "-dimensional trace");
  const bool hybrid = std::any_of(trace.entries.begin(), trace.entries.end(),
                                  [](const TraceEntry& e) { return !e.location.empty(); });
  // Box-template polyhedra project as boxes too.
  std::vector<Box> as_boxes;
  for (const auto& e : trace.entries) {
    if (const Box* bx = std::get_if<Box>(&e.set)) {
      as_boxes.push_back(*bx);
    } else if (auto bx2 = std::get<TemplatePolyhedron>(e.set).as_box()) {
      as_boxes.push_back(*bx2);
    } else {
      break;
    }
  }
  const bool boxes = as_boxes.size() == trace.entries.size();
  std::string out = hybrid ? "step,location," : "step,";
  out += boxes ? "axis1_min,axis1_max,axis2_min,axis2_max\n" : "vertex,axis1,axis2\n";
  for (std::size_t k = 0; k < trace.entries.size(); ++k) {
    const TraceEntry& e = trace.entries[k];
    if (first && e.step >= *first) break;
    const std::string prefix = std::to_string(e.step) + "," + (hybrid ? e.location + "," : "");
    if (boxes) {
      const Box& bx = as_boxes[k];
      out += prefix + format_double(bx.lower[a]) + "," + format_double(bx.upper[a]) + "," +
             format_double(bx.lower[b]) + "," + format_double(bx.upper[b]) + "\n";
      continue;
    }
    const auto poly = project_2d(as_polyhedron(e.set), a, b);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out += prefix + std::to_string(i) + "," + format_double(poly[i][0]) + "," + format_double(poly[i][1]) + "\n";
    }
  }
  return out;
}

std::string region_csv(const std::vector<Box>& boxes, const std::array<std::string, 2>& axes) {
  std::string out = axes[0] + "_min," + axes[0] + "_max," + axes[1] + "_min," + axes[1] + "_max\n";
  for (const auto& b : boxes) {
    out += format_double(b.lower[0]) + "," + format_double(b.upper[0]) + "," + format_double(b.lower[1]) + "," +
           format_double(b.upper[1]) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace polyreach
