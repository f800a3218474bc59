#pragma once

// Batch runner: JSON config in, JSON report out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "instanton/check_report.hpp"
#include "instanton/errors.hpp"
#include "instanton/instanton_zoo.hpp"
#include "instanton/sampling.hpp"
#include "instanton/structure_checks.hpp"
#include "instanton/toda.hpp"
#include "instanton/twistor.hpp"

namespace instanton::verify {

using json = nlohmann::ordered_json;

struct SuiteInfo {
  std::string name;
  std::string description;
};

inline const std::vector<SuiteInfo>& suite_registry() {
  static const std::vector<SuiteInfo> r = {
      {"curvature", "Ricci-flatness and vanishing self-dual Weyl block"},
      {"hyperkahler", "parallel self-dual triple: closed, parallel, quaternionic, moment maps"},
      {"conformal_kahler_sd", "self-dual conformal Kahler form kappa+ and its CKY vector along the fibre"},
      {"flat_pieces", "flat-piece decomposition of a collinear GH space and Hodge incompatibility"},
      {"twistor", "quadric conformal factors, Penrose contours and elementary states"},
      {"petrov_kt", "type D Weyl structure, ASD Kahler form and the Killing tensor pipeline"},
      {"ky", "Killing-Yano tensor built from the ASD CKY form (Taub-NUT branch)"},
      {"toda", "Toda frame: equation, sphere gauge, reconstruction of the metric"},
  };
  return r;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string nearest(const std::string& name, const std::vector<std::string>& options) {
  std::string best;
  std::size_t d = std::string::npos;
  for (const auto& o : options) {
    const std::size_t e = edit_distance(name, o);
    if (e < d) {
      d = e;
      best = o;
    }
  }
  return best;
}

inline std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& s : suite_registry()) out.push_back(s.name);
  return out;
}

// ---------------------------------------------------------------- config

enum class GeometryKind { gibbons_hawking, taub_nut, flat, toda };

struct GeometrySpec {
  GeometryKind kind = GeometryKind::flat;
  GHData gh;
  double n = 1.0;
  std::string toda_name = "taub_nut";
};

struct Sampling {
  int count = 100;
  std::uint64_t seed = 7;
  std::optional<Coords> lo;
  std::optional<Coords> hi;
  double exclusion_radius = 0.1;
};

struct TwistorSpec {
  std::vector<std::string> quadrics{"elementary", "dyon", "two_center(1.5)"};
  int random_quadrics = 200;
  int contour_points = 20;
};

struct RunConfig {
  GeometrySpec geometry;
  std::vector<std::string> suites;
  Sampling sampling;
  std::map<std::string, double> tolerances;
  std::string output;
  TwistorSpec twistor;
};

namespace detail {

inline void only_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + where + " (did you mean '" +
                        nearest(it.key(), allowed) + "'?)");
  }
}

inline double real(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
  return v;
}

inline Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be an array of 3 numbers");
  return {real(j[0], what), real(j[1], what), real(j[2], what)};
}

inline Coords coords(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(what + " must be an array of 4 numbers");
  return {real(j[0], what), real(j[1], what), real(j[2], what), real(j[3], what)};
}

inline GHData parse_gh(const json& j) {
  only_keys(j, {"V0", "centres", "masses", "axis"}, "gibbons_hawking");
  GHData d;
  if (j.contains("V0")) d.V0 = real(j["V0"], "V0");
  if (!j.contains("centres") || !j["centres"].is_array()) throw ConfigError("gibbons_hawking needs a centres array");
  for (const auto& c : j["centres"]) d.centres.push_back(vec3(c, "centre"));
  if (j.contains("masses")) {
    if (!j["masses"].is_array()) throw ConfigError("masses must be an array");
    for (const auto& m : j["masses"]) d.masses.push_back(real(m, "mass"));
  }
  if (j.contains("axis")) d.axis = vec3(j["axis"], "axis");
  validate(d);
  return d;
}

inline GeometrySpec parse_geometry(const json& j) {
  const std::vector<std::string> kinds{"gibbons_hawking", "taub_nut", "flat", "toda"};
  GeometrySpec g;
  if (j.is_string() && j.get<std::string>() == "flat") {
    g.kind = GeometryKind::flat;
    return g;
  }
  if (!j.is_object() || j.size() != 1)
    throw ConfigError("geometry must be an object with exactly one of gibbons_hawking, taub_nut, flat, toda");
  const std::string key = j.begin().key();
  const json& v = j.begin().value();
  if (key == "gibbons_hawking") {
    g.kind = GeometryKind::gibbons_hawking;
    g.gh = parse_gh(v);
  } else if (key == "taub_nut") {
    only_keys(v, {"n"}, "taub_nut");
    g.kind = GeometryKind::taub_nut;
    if (v.contains("n")) g.n = real(v["n"], "n");
    if (!(g.n > 0.0)) throw ConfigError("NUT charge must be positive");
  } else if (key == "flat") {
    if (!v.is_null() && !(v.is_object() && v.empty())) throw ConfigError("flat takes no parameters");
    g.kind = GeometryKind::flat;
  } else if (key == "toda") {
    only_keys(v, {"name", "n"}, "toda");
    g.kind = GeometryKind::toda;
    if (v.contains("name")) {
      if (!v["name"].is_string()) throw ConfigError("toda name must be a string");
      g.toda_name = v["name"].get<std::string>();
    }
    if (v.contains("n")) g.n = real(v["n"], "n");
    builtin_toda_frame(g.toda_name, g.n);
  } else {
    throw ConfigError("unknown geometry '" + key + "' (did you mean '" + nearest(key, kinds) + "'?)");
  }
  return g;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  detail::only_keys(j, {"geometry", "suites", "sampling", "tolerances", "output", "twistor"}, "config");
  RunConfig c;
  if (!j.contains("geometry")) throw ConfigError("config needs a geometry");
  c.geometry = detail::parse_geometry(j["geometry"]);
  if (!j.contains("suites") || !j["suites"].is_array() || j["suites"].empty())
    throw ConfigError("config needs a non-empty suites array");
  const auto names = suite_names();
  for (const auto& s : j["suites"]) {
    if (!s.is_string()) throw ConfigError("suite names must be strings");
    const std::string n = s.get<std::string>();
    if (std::find(names.begin(), names.end(), n) == names.end())
      throw ConfigError("unknown suite '" + n + "' (did you mean '" + nearest(n, names) + "'?)");
    c.suites.push_back(n);
  }
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    detail::only_keys(s, {"count", "seed", "box", "exclusion_radius"}, "sampling");
    if (s.contains("count")) {
      if (!s["count"].is_number_integer()) throw ConfigError("sampling count must be an integer");
      c.sampling.count = s["count"].get<int>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer() || s["seed"].get<long long>() < 0)
        throw ConfigError("sampling seed must be a non-negative integer");
      c.sampling.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("box")) {
      detail::only_keys(s["box"], {"lo", "hi"}, "box");
      if (!s["box"].contains("lo") || !s["box"].contains("hi")) throw ConfigError("box needs lo and hi");
      c.sampling.lo = detail::coords(s["box"]["lo"], "box lo");
      c.sampling.hi = detail::coords(s["box"]["hi"], "box hi");
      for (std::size_t a = 0; a < kDim; ++a)
        if (!((*c.sampling.lo)[a] < (*c.sampling.hi)[a])) throw ConfigError("box lo must be below hi");
    }
    if (s.contains("exclusion_radius")) c.sampling.exclusion_radius = detail::real(s["exclusion_radius"], "exclusion_radius");
  }
  if (c.sampling.count < 1) throw ConfigError("sample count must be at least 1");
  if (!(c.sampling.exclusion_radius > 0.0)) throw ConfigError("exclusion_radius must be positive");
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("tolerances must be an object");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
      const double t = detail::real(it.value(), "tolerance " + it.key());
      if (!(t >= 0.0)) throw ConfigError("tolerance " + it.key() + " must be non-negative");
      c.tolerances[it.key()] = t;
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output must be a path string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("twistor")) {
    const json& t = j["twistor"];
    detail::only_keys(t, {"quadrics", "random_quadrics", "contour_points"}, "twistor");
    if (t.contains("quadrics")) {
      if (!t["quadrics"].is_array()) throw ConfigError("twistor quadrics must be an array of names");
      c.twistor.quadrics.clear();
      for (const auto& q : t["quadrics"]) {
        if (!q.is_string()) throw ConfigError("twistor quadric names must be strings");
        twistor::builtin_quadric(q.get<std::string>());
        c.twistor.quadrics.push_back(q.get<std::string>());
      }
    }
    auto count = [&](const char* key, int& out) {
      if (!t.contains(key)) return;
      if (!t[key].is_number_integer() || t[key].get<int>() < 1) throw ConfigError(std::string(key) + " must be a positive integer");
      out = t[key].get<int>();
    };
    count("random_quadrics", c.twistor.random_quadrics);
    count("contour_points", c.twistor.contour_points);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Normalised config, echoed into the report.
inline json to_json(const RunConfig& c) {
  json g;
  switch (c.geometry.kind) {
    case GeometryKind::gibbons_hawking: {
      const GHData& d = c.geometry.gh;
      json v;
      v["V0"] = d.V0;
      v["centres"] = json::array();
      for (const auto& x : d.centres) v["centres"].push_back({x[0], x[1], x[2]});
      v["masses"] = json::array();
      for (std::size_t i = 0; i < d.centres.size(); ++i) v["masses"].push_back(d.mass(i));
      const Vec3 u = resolved_axis(d);
      v["axis"] = {u[0], u[1], u[2]};
      g["gibbons_hawking"] = v;
      break;
    }
    case GeometryKind::taub_nut:
      g["taub_nut"] = {{"n", c.geometry.n}};
      break;
    case GeometryKind::flat:
      g["flat"] = json::object();
      break;
    case GeometryKind::toda:
      g["toda"] = {{"name", c.geometry.toda_name}, {"n", c.geometry.n}};
      break;
  }
  json out;
  out["geometry"] = g;
  out["suites"] = c.suites;
  json s;
  s["count"] = c.sampling.count;
  s["seed"] = c.sampling.seed;
  if (c.sampling.lo) {
    const auto& lo = *c.sampling.lo;
    const auto& hi = *c.sampling.hi;
    s["box"] = {{"lo", {lo[0], lo[1], lo[2], lo[3]}}, {"hi", {hi[0], hi[1], hi[2], hi[3]}}};
  }
  s["exclusion_radius"] = c.sampling.exclusion_radius;
  out["sampling"] = s;
  out["tolerances"] = json::object();
  for (const auto& [k, v] : c.tolerances) out["tolerances"][k] = v;
  if (std::find(c.suites.begin(), c.suites.end(), "twistor") != c.suites.end())
    out["twistor"] = {{"quadrics", c.twistor.quadrics},
                      {"random_quadrics", c.twistor.random_quadrics},
                      {"contour_points", c.twistor.contour_points}};
  return out;
}

// ---------------------------------------------------------------- report

struct SuiteResult {
  std::string suite;
  std::vector<CheckReport> checks;
  double seconds = 0.0;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckReport& r) { return r.pass; });
  }
};

struct RunReport {
  RunConfig config;
  std::vector<SuiteResult> suites;
  bool pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
  }
};

inline json to_json(const CheckReport& r) {
  json j;
  j["check"] = r.check;
  j["n_samples"] = r.n_samples;
  j["max_residual"] = r.max_residual;
  j["mean_residual"] = r.mean_residual;
  j["min_residual"] = r.min_residual;
  j["tolerance"] = r.tolerance;
  j["bound"] = r.bound == Bound::upper ? "upper" : "lower";
  j["required_fraction"] = r.required_fraction;
  j["fraction"] = r.fraction;
  j["pass"] = r.pass;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const RunReport& r, bool timing) {
  json j;
  j["config"] = to_json(r.config);
  j["suites"] = json::array();
  for (const auto& s : r.suites) {
    json sj;
    sj["suite"] = s.suite;
    sj["pass"] = s.pass();
    if (timing) sj["wall_time_s"] = s.seconds;
    sj["checks"] = json::array();
    for (const auto& c : s.checks) sj["checks"].push_back(to_json(c));
    j["suites"].push_back(sj);
  }
  j["pass"] = r.pass();
  return j;
}

namespace detail {

inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void dump_to(const json& j, std::string& out, int level) {
  const std::string pad(static_cast<std::size_t>(2 * (level + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * level), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_to(it.value(), out, level + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        dump_to(e, out, level + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_real(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Indented JSON with reals printed to 17 significant digits.
inline std::string dump(const json& j) {
  std::string out;
  detail::dump_to(j, out, 0);
  out += "\n";
  return out;
}

inline std::string residual_csv(const RunReport& r) {
  std::string out = "suite,check,sample,residual\n";
  for (const auto& s : r.suites)
    for (const auto& c : s.checks)
      for (std::size_t i = 0; i < c.residuals.size(); ++i)
        out += s.suite + "," + c.check + "," + std::to_string(i) + "," + detail::format_real(c.residuals[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------- suites

namespace detail {

inline SampleSet gh_box_samples(const GeometryBundle& b, const Sampling& s, bool primary) {
  Coords lo{-3.0, -2.5, -2.5, -2.5}, hi{3.0, 2.5, 2.5, 2.5};
  if (primary && s.lo) {
    lo = *s.lo;
    hi = *s.hi;
  }
  return halton_samples(*b.metric.chart, lo, hi, s.count, s.seed, s.exclusion_radius);
}

inline SampleSet tn_box_samples(double n, const Sampling& s, bool primary) {
  Coords lo{-3.0, n + 0.4, 0.3, -3.0}, hi{3.0, n + 6.0, 2.8, 3.0};
  if (primary && s.lo) {
    lo = *s.lo;
    hi = *s.hi;
  }
  return halton_samples(*taub_nut_chart(n), lo, hi, s.count, s.seed, s.exclusion_radius);
}

inline SampleSet frame_box_samples(const TodaFrame& f, const Sampling& s, bool primary) {
  Coords lo = f.box_lo, hi = f.box_hi;
  if (primary && s.lo) {
    lo = *s.lo;
    hi = *s.hi;
  }
  return halton_samples(*f.chart, lo, hi, s.count, s.seed, s.exclusion_radius);
}

inline CheckReport renamed(CheckReport r, std::string name) {
  r.check = std::move(name);
  return r;
}

inline void append(std::vector<CheckReport>& out, const KahlerReport& k, const std::string& prefix = "") {
  for (const auto* r : k.all()) out.push_back(renamed(*r, prefix + r->check));
}

/// Per-run geometry, built once.
class Context {
 public:
  explicit Context(const RunConfig& c) : cfg(c) {
    switch (c.geometry.kind) {
      case GeometryKind::gibbons_hawking:
        bundle = make_gh_bundle(c.geometry.gh, c.sampling.exclusion_radius);
        break;
      case GeometryKind::flat: {
        GHData d;
        d.V0 = 1.0;
        bundle = make_gh_bundle(d, c.sampling.exclusion_radius);
        break;
      }
      case GeometryKind::taub_nut:
        bundle = taub_nut_bundle(c.geometry.n);
        break;
      case GeometryKind::toda:
        frame = builtin_toda_frame(c.geometry.toda_name, c.geometry.n);
        toda = toda_build(*frame);
        break;
    }
  }

  const RunConfig& cfg;
  std::optional<GeometryBundle> bundle;
  std::optional<TodaFrame> frame;
  std::optional<TodaGeometry> toda;

  bool is(GeometryKind k) const { return cfg.geometry.kind == k; }

  const MetricField& metric() const { return toda ? toda->metric : bundle->metric; }

  SampleSet samples() const {
    if (toda) return frame_box_samples(*frame, cfg.sampling, true);
    if (is(GeometryKind::taub_nut)) return tn_box_samples(cfg.geometry.n, cfg.sampling, true);
    return gh_box_samples(*bundle, cfg.sampling, true);
  }

  const GeometryBundle& need_bundle(const std::string& suite) const {
    if (!bundle)
      throw ConfigError("suite " + suite + " needs a gibbons_hawking, taub_nut or flat geometry");
    return *bundle;
  }
};

inline double rel_to(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

}  // namespace detail

inline std::vector<CheckReport> suite_curvature(const detail::Context& ctx) {
  const SampleSet s = ctx.samples();
  std::vector<CheckReport> out;
  out.push_back(ricci_residual(ctx.metric(), s));
  out.push_back(weyl_block_residual(ctx.metric(), s, Duality::self_dual));
  if (ctx.is(GeometryKind::flat)) out.push_back(riemann_residual(ctx.metric(), s));
  return out;
}

inline std::vector<CheckReport> suite_hyperkahler(const detail::Context& ctx) {
  const GeometryBundle& b = ctx.need_bundle("hyperkahler");
  const SampleSet s = ctx.samples();
  struct Row {
    double closed = 0.0, parallel = 0.0, sd = 0.0, quaternion = 0.0, moment = 0.0;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t k) {
    const Coords& x = s.points[k];
    const Connection c = connection(b.metric, x, 0);
    const auto m = instanton::detail::point_metric(c.metric);
    const Tensor<double> xi = values(b.fiber_killing.at(x, 0));
    std::array<Tensor<double>, 3> J;
    Row r;
    for (std::size_t i = 0; i < 3; ++i) {
      const Tensor<Jet> w = b.triple[i].at(x, 1);
      const Tensor<double> wv = values(w);
      const double wn = instanton::detail::gnorm(wv, 0, m);
      r.closed = std::max(r.closed, instanton::detail::ratio(instanton::detail::gnorm(values(exterior_derivative(w)), 0, m), wn));
      r.parallel = std::max(r.parallel, instanton::detail::ratio(instanton::detail::gnorm(values(covariant_derivative(w, 0, c.gamma)), 0, m), wn));
      const Tensor<double> star = hodge_star_2form(wv, m.g, m.ginv, b.metric.orientation);
      r.sd = std::max(r.sd, instanton::detail::ratio(instanton::detail::gnorm(star - wv, 0, m), wn));
      const Tensor<double> dmu = values(exterior_derivative(b.moment_maps[i].at(x, 1)));
      r.moment = std::max(r.moment, instanton::detail::ratio(max_abs(interior(xi, wv) - dmu), max_abs(dmu)));
      J[i] = transform_slot(wv, 0, m.ginv);
      const double jj = max_abs(J[i]);
      r.quaternion = std::max(r.quaternion, max_abs(matmul(J[i], J[i]) + identity2<double>()) / (jj * jj));
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& a = J[i];
      const auto& bb = J[(i + 1) % 3];
      const auto& cc = J[(i + 2) % 3];
      r.quaternion = std::max(r.quaternion, max_abs(matmul(a, bb) - cc) / (max_abs(a) * max_abs(bb)));
    }
    return r;
  });
  auto col = [&](double Row::*f) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.*f);
    return v;
  };
  return {make_report("triple_closed", col(&Row::closed), 1e-8),
          make_report("triple_parallel", col(&Row::parallel), 1e-8),
          make_report("triple_self_dual", col(&Row::sd), 1e-8),
          make_report("triple_quaternion_algebra", col(&Row::quaternion), 1e-8),
          make_report("moment_maps", col(&Row::moment), 1e-8)};
}

inline std::vector<CheckReport> suite_conformal_kahler_sd(const detail::Context& ctx) {
  const GeometryBundle& b = ctx.need_bundle("conformal_kahler_sd");
  const SampleSet s = ctx.samples();
  std::vector<CheckReport> out;
  detail::append(out, kahler_verify(b.metric, b.kahler_sd, s, Duality::self_dual));
  const CkyResult z = residual_cky(b.metric, b.cky, s);
  out.push_back(z.report);
  std::vector<double> angle;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto mj = metric_jets(b.metric, s.points[i], 0);
    const instanton::detail::PointMetric m = instanton::detail::point_metric(mj);
    const Tensor<double> xi = transform_slot(values(b.fiber_killing.at(s.points[i], 0)), 0, m.g);
    angle.push_back(instanton::detail::sine_angle(z.vectors[i], xi, m));
  }
  out.push_back(make_report("cky_vector_parallel_fibre", std::move(angle), 1e-8));
  return out;
}

inline std::vector<CheckReport> suite_flat_pieces(const detail::Context& ctx) {
  if (!ctx.is(GeometryKind::gibbons_hawking)) throw ConfigError("suite flat_pieces needs a gibbons_hawking geometry");
  const GHData& d = ctx.cfg.geometry.gh;
  const int P = piece_count(d);
  std::vector<FlatPiece> pieces;
  for (int I = (d.V0 != 0.0 ? 0 : 1); I <= static_cast<int>(d.centres.size()); ++I)
    pieces.push_back(flat_piece(d, I, ctx.cfg.sampling.exclusion_radius));
  const SampleSet s = ctx.samples();
  std::vector<CheckReport> out;
  for (const auto& p : pieces) {
    const std::string pre = "piece_" + std::to_string(p.index) + ":";
    out.push_back(detail::renamed(riemann_residual(p.bundle.metric, s, 1e-9), pre + "flat"));
    detail::append(out, kahler_verify(p.bundle.metric, p.bundle.kahler_sd, s, Duality::self_dual), pre);
  }
  out.push_back(instanton::detail::sample_check("piece_sum_reconstructs_kappa+", s, 1e-12, [&](const Coords& x) {
    Tensor<double> sum(2);
    for (const auto& p : pieces) sum += p.bundle.kahler_sd.value(x);
    const Tensor<double> k = ctx.bundle->kahler_sd.value(x);
    return max_abs(sum - k) / max_abs(k);
  }));
  for (const auto& a : pieces)
    for (const auto& c : pieces) {
      if (a.index == c.index) continue;
      out.push_back(detail::renamed(hodge_incompatibility(a.bundle.metric, c.bundle.kahler_sd, s),
                                    "hodge_incompatibility:" + std::to_string(a.index) + "," + std::to_string(c.index)));
    }
  if (P < 2) out.push_back(failed_report("hodge_incompatibility", "needs at least two flat pieces"));
  return out;
}

namespace detail {

inline double twistor_reference(const std::string& name, const std::array<double, 4>& x) {
  if (name == "elementary") return (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) / 4.0;
  if (name == "dyon") return std::sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  const double c = std::stod(name.substr(name.find('(') + 1));
  return twistor::two_center_radius(x, c);
}

inline double crel(twistor::cplx a, twistor::cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace detail

inline std::vector<CheckReport> suite_twistor(const detail::Context& ctx) {
  using namespace twistor;
  const RunConfig& c = ctx.cfg;
  std::mt19937_64 rng(c.sampling.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  auto gauss = [&] { return cplx(normal(rng), normal(rng)); };
  auto random_quadric = [&] {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = gauss();
    return TwistorQuadric((0.5 * (m + m.transpose())).eval());
  };
  auto euclid = [&] { return std::array<double, 4>{uni(rng), uni(rng), uni(rng), uni(rng)}; };

  std::vector<CheckReport> out;
  struct Case {
    TwistorQuadric q;
    ComplexPoint x;
  };
  std::vector<Case> random_cases;
  for (int k = 0; k < c.twistor.random_quadrics; ++k) {
    TwistorQuadric q = random_quadric();
    random_cases.push_back({q, ComplexPoint{{gauss(), gauss(), gauss(), gauss()}}});
  }
  const auto agree = parallel_map(random_cases.size(), [&](std::size_t i) {
    return omega_from_quadric(random_cases[i].q, random_cases[i].x).agreement;
  });
  out.push_back(make_report("formula_vs_roots:random", agree, 1e-10));

  auto contours = [&](const std::string& tag, const std::vector<Case>& cases) {
    struct Row {
      double h0 = 0.0, h1 = 0.0;
    };
    const auto rows = parallel_map(cases.size(), [&](std::size_t i) {
      const cplx om = omega_from_quadric(cases[i].q, cases[i].x).omega;
      const Mat2 want = kahler_spinor(cases[i].q, cases[i].x);
      Row r;
      r.h0 = detail::crel(penrose_contour(cases[i].q, cases[i].x, 0).scalar, om);
      r.h1 = (penrose_contour(cases[i].q, cases[i].x, 1).field - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
      return r;
    });
    std::vector<double> a, b;
    for (const auto& r : rows) {
      a.push_back(r.h0);
      b.push_back(r.h1);
    }
    out.push_back(make_report("penrose_h0:" + tag, std::move(a), 1e-8));
    out.push_back(make_report("penrose_h1:" + tag, std::move(b), 1e-8));
  };
  const int npts = std::min(c.twistor.contour_points, c.twistor.random_quadrics);
  contours("random", std::vector<Case>(random_cases.begin(), random_cases.begin() + npts));

  for (const auto& name : c.twistor.quadrics) {
    const TwistorQuadric q = builtin_quadric(name);
    std::vector<std::array<double, 4>> xs;
    for (int k = 0; k < c.sampling.count; ++k) xs.push_back(euclid());
    const auto cf = parallel_map(xs.size(), [&](std::size_t i) {
      const auto w = omega_from_quadric(q, euclidean_embed(xs[i]));
      return detail::crel(1.0 / w.omega, detail::twistor_reference(name, xs[i]));
    });
    out.push_back(make_report("inverse_conformal_factor:" + name, cf, 1e-9));
    std::vector<Case> cases;
    for (int k = 0; k < std::min(c.twistor.contour_points, c.sampling.count); ++k)
      cases.push_back({q, euclidean_embed(xs[static_cast<std::size_t>(k)])});
    contours(name, cases);
    const ElementaryTest e = elementary_state_test(q);
    const bool expect = name == "elementary";
    CheckReport r = make_report("elementary_state:" + name, {e.is_elementary == expect ? 0.0 : 1.0}, 0.5);
    r.note = std::string("elementary = ") + (e.is_elementary ? "true" : "false") + ", expected " +
             (expect ? "true" : "false");
    out.push_back(r);
  }
  return out;
}

inline std::vector<CheckReport> suite_petrov_kt(const detail::Context& ctx) {
  const SampleSet s = ctx.samples();
  std::vector<CheckReport> out;
  try {
    const PetrovResult p = petrov_reconstruct(ctx.metric(), s);
    for (const auto* r : {&p.trace, &p.pair_gap, &p.closed, &p.duality}) out.push_back(*r);
  } catch (const NotTypeDError& e) {
    out.push_back(failed_report("type_d", std::string("NotTypeD: ") + e.what()));
    return out;
  } catch (const NullWeylError& e) {
    out.push_back(failed_report("type_d", std::string("NullWeyl: ") + e.what()));
    return out;
  }
  KTOptions opt;
  if (ctx.bundle) opt.reference = ctx.bundle->fiber_killing;
  try {
    const KTResult kt = killing_tensor_pipeline(ctx.metric(), s, opt);
    for (auto r : kt.reports) {
      if (r.check == "t_killing" && !kt.note.empty()) r.note = kt.note;
      out.push_back(std::move(r));
    }
  } catch (const ChiZeroError& e) {
    out.push_back(failed_report("killing_tensor_pipeline", std::string("ChiZero: ") + e.what()));
  }
  return out;
}

namespace detail {

inline void ky_on(std::vector<CheckReport>& out, const GeometryBundle& b, const SampleSet& s, const std::string& tag) {
  const PetrovResult p = asd_structure_fields(b.metric);
  try {
    const KYCandidate ky = ky_candidate(b, p.cky_asd, s);
    CheckReport r = renamed(residual_ky(b.metric, ky.Y, s), "killing_yano" + tag);
    r.note = "scale " + format_real(ky.scale);
    out.push_back(r);
  } catch (const MismatchError& e) {
    out.push_back(failed_report("killing_yano" + tag, std::string("Mismatch: ") + e.what(), 1e-8));
    const ScaleScan scan = ky_min_over_scale(b.metric, b.cky, p.cky_asd, s);
    CheckReport r = make_report("killing_yano_min_over_scale" + tag, {scan.best_residual}, 1e-8);
    r.note = "best scale " + format_real(scan.best_scale);
    out.push_back(r);
  }
  const KillingVectorSurvey sv = killing_vector_survey(b.metric, s);
  out.push_back(make_report("chi_part_of_grad_xi" + tag, sv.chi_ratio, 1e-9));
}

}  // namespace detail

inline std::vector<CheckReport> suite_ky(const detail::Context& ctx) {
  const GeometryBundle& b = ctx.need_bundle("ky");
  std::vector<CheckReport> out;
  if (!ctx.is(GeometryKind::taub_nut)) {
    detail::ky_on(out, b, ctx.samples(), "");
    return out;
  }
  const double n = ctx.cfg.geometry.n;
  const SampleSet s = ctx.samples();
  detail::ky_on(out, b, s, ":tn_chart");
  Sampling string_tube = ctx.cfg.sampling;
  string_tube.exclusion_radius = std::max(string_tube.exclusion_radius, 0.3);
  const GeometryBundle gh = make_gh_bundle(taub_nut_gh_data(n), string_tube.exclusion_radius);
  detail::ky_on(out, gh, detail::gh_box_samples(gh, string_tube, false), ":gh_chart");
  const KillingVectorSurvey sv = killing_vector_survey(b.metric, s);
  const double want = std::pow(2.0 * n, -2.0 / 3.0);
  std::vector<double> e;
  for (double v : sv.ernst_plus) e.push_back(std::abs(v - want));
  out.push_back(make_report("ernst_plus_constant", std::move(e), 1e-6));
  return out;
}

inline std::vector<CheckReport> suite_toda(const detail::Context& ctx) {
  if (ctx.is(GeometryKind::gibbons_hawking) || ctx.is(GeometryKind::flat))
    throw ConfigError("suite toda needs a taub_nut or toda geometry");
  const double n = ctx.cfg.geometry.n;
  const TodaFrame f = ctx.frame ? *ctx.frame : taub_nut_frame(n);
  const TodaGeometry g = ctx.toda ? *ctx.toda : toda_build(f);
  const SampleSet s = detail::frame_box_samples(f, ctx.cfg.sampling, ctx.is(GeometryKind::toda));
  std::vector<CheckReport> out;
  out.push_back(toda_residual(f.u, s));
  out.push_back(sphere_gauge_check(f.h, s));
  out.push_back(toda_reference_check(g, taub_nut_metric(n), toda_to_taub_nut(n), s));
  detail::append(out, kahler_verify(g.metric, g.kahler_asd, s, Duality::anti_self_dual));
  out.push_back(residual_killing_vector(g.metric, g.killing, s));
  out.push_back(toda_fibre_norm_check(g, s));
  out.push_back(toda_conformal_factor_check(g, s));
  return out;
}

// ---------------------------------------------------------------- run

namespace detail {

inline void apply_tolerances(std::vector<CheckReport>& reports, const std::map<std::string, double>& tol) {
  for (auto& r : reports) {
    const auto it = tol.find(r.check);
    if (it == tol.end() || r.residuals.empty()) continue;
    CheckReport g = make_report(r.check, r.residuals, it->second, r.bound, r.required_fraction);
    g.note = r.note;
    r = std::move(g);
  }
}

}  // namespace detail

/// Suites run in order; library errors other than ConfigError are recorded
/// as failed checks.
inline RunReport run(const RunConfig& cfg) {
  RunReport report;
  report.config = cfg;
  const detail::Context ctx(cfg);
  for (const auto& name : cfg.suites) {
    SuiteResult sr;
    sr.suite = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (name == "curvature") sr.checks = suite_curvature(ctx);
      else if (name == "hyperkahler") sr.checks = suite_hyperkahler(ctx);
      else if (name == "conformal_kahler_sd") sr.checks = suite_conformal_kahler_sd(ctx);
      else if (name == "flat_pieces") sr.checks = suite_flat_pieces(ctx);
      else if (name == "twistor") sr.checks = suite_twistor(ctx);
      else if (name == "petrov_kt") sr.checks = suite_petrov_kt(ctx);
      else if (name == "ky") sr.checks = suite_ky(ctx);
      else if (name == "toda") sr.checks = suite_toda(ctx);
      else throw ConfigError("unknown suite '" + name + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      sr.checks.push_back(failed_report(name + ":error", e.what()));
    }
    detail::apply_tolerances(sr.checks, cfg.tolerances);
    sr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.suites.push_back(std::move(sr));
  }
  return report;
}

}  // namespace instanton::verify
