// Acceptance criteria 1-8: one PASS/FAIL line each.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "instanton/verify.hpp"

using namespace instanton;
using namespace instanton::verify;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

json gh(double V0, std::vector<std::array<double, 3>> centres, std::vector<double> masses = {}) {
  json v;
  v["V0"] = V0;
  v["centres"] = json::array();
  for (const auto& c : centres) v["centres"].push_back({c[0], c[1], c[2]});
  if (!masses.empty()) v["masses"] = masses;
  v["axis"] = {0.0, 0.0, 1.0};
  return {{"gibbons_hawking", v}};
}

json config(json geometry, std::vector<std::string> suites, double exclusion = 0.1) {
  json j;
  j["geometry"] = std::move(geometry);
  j["suites"] = suites;
  j["sampling"] = {{"count", 100}, {"seed", 7}, {"exclusion_radius", exclusion}};
  return j;
}

const std::vector<std::array<double, 3>> kTwo{{0, 0, 1}, {0, 0, -1}};
const std::vector<std::array<double, 3>> kThree{{0, 0, 1}, {1.2, 0.3, -0.5}, {-0.7, 0.9, 0.2}};

/// Runs a config; every check must pass. Returns the report.
RunReport expect_pass(Outcome& o, const std::string& label, const json& j) {
  const RunReport r = run(parse_config(j));
  for (const auto& s : r.suites)
    for (const auto& c : s.checks)
      if (!c.pass) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %s/%s max %.3g tol %.1g", label.c_str(), s.suite.c_str(), c.check.c_str(),
                      c.max_residual, c.tolerance);
        o.fail(buf);
      }
  return r;
}

const CheckReport* find(const RunReport& r, const std::string& name) {
  for (const auto& s : r.suites)
    for (const auto& c : s.checks)
      if (c.check == name) return &c;
  return nullptr;
}

Outcome criterion_1() {
  Outcome o;
  for (double V0 : {0.0, 1.0})
    for (std::size_t N = 1; N <= 3; ++N) {
      const std::vector<std::array<double, 3>> c(kThree.begin(), kThree.begin() + static_cast<long>(N));
      expect_pass(o, "N=" + std::to_string(N) + " V0=" + std::to_string(static_cast<int>(V0)), config(gh(V0, c), {"curvature"}));
    }
  return o;
}

Outcome criterion_2() {
  Outcome o;
  const std::vector<std::pair<std::string, json>> spaces = {
      {"ALE two-centre", gh(0.0, kTwo)}, {"ALF three-centre", gh(1.0, kThree)}, {"ALE three-centre", gh(0.0, kThree)},
      {"Taub-NUT", {{"taub_nut", {{"n", 1.0}}}}}};
  for (const auto& [label, g] : spaces) {
    const RunReport r = expect_pass(o, label, config(g, {"hyperkahler"}));
    if (!find(r, "triple_self_dual")) o.fail(label + " missing orientation check");
  }
  return o;
}

Outcome criterion_3() {
  Outcome o;
  for (const auto& [label, g] : std::vector<std::pair<std::string, json>>{
           {"two-centre", gh(0.0, kTwo)}, {"ALF two-centre", gh(1.0, {{0, 0, 0}, {0, 0, 1.5}})}, {"three-centre", gh(1.0, kThree)}}) {
    const RunReport r = expect_pass(o, label, config(g, {"conformal_kahler_sd"}));
    const CheckReport* p = find(r, "cky_vector_parallel_fibre");
    if (!p || p->max_residual > 1e-8) o.fail(label + " CKY vector not along the fibre");
  }
  return o;
}

Outcome criterion_4() {
  Outcome o;
  const RunReport r = expect_pass(o, "ALF two-centre", config(gh(1.0, {{0, 0, 0}, {0, 0, 1.5}}), {"flat_pieces"}));
  int hodge = 0;
  for (const auto& c : r.suites[0].checks)
    if (c.check.rfind("hodge_incompatibility:", 0) == 0) ++hodge;
  if (hodge != 6) o.fail("expected 6 ordered piece pairs, got " + std::to_string(hodge));
  return o;
}

Outcome criterion_5() {
  Outcome o;
  json j = config("flat", {"twistor"});
  j["twistor"] = {{"quadrics", {"elementary", "dyon", "two_center(1.5)", "two_center(0.4)"}},
                  {"random_quadrics", 200},
                  {"contour_points", 20}};
  const RunReport r = expect_pass(o, "twistor", j);
  const CheckReport* a = find(r, "formula_vs_roots:random");
  if (!a || a->n_samples != 200) o.fail("random quadric gate did not use 200 quadrics");
  return o;
}

Outcome criterion_6() {
  Outcome o;
  const RunReport r = expect_pass(o, "Taub-NUT", config({{"taub_nut", {{"n", 1.0}}}}, {"ky", "toda"}));
  for (const char* name : {"killing_yano:tn_chart", "killing_yano:gh_chart", "chi_part_of_grad_xi:tn_chart",
                           "ernst_plus_constant", "toda_equation", "toda_reproduces_reference"})
    if (!find(r, name)) o.fail(std::string("missing ") + name);
  // Eguchi-Hanson negative control
  GHData d;
  d.V0 = 0.0;
  d.centres = {{0, 0, 1}, {0, 0, -1}};
  const GeometryBundle b = make_gh_bundle(d);
  const SampleSet s = halton_samples(*b.metric.chart, {-3.0, -2.5, -2.5, -2.5}, {3.0, 2.5, 2.5, 2.5}, 100, 7);
  const PetrovResult p = asd_structure_fields(b.metric);
  const ScaleScan scan = ky_min_over_scale(b.metric, b.cky, p.cky_asd, s);
  if (!(scan.best_residual >= 1e-3)) o.fail("Eguchi-Hanson KY min-over-scale " + std::to_string(scan.best_residual));
  return o;
}

Outcome criterion_7() {
  Outcome o;
  for (const auto& [label, masses] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"equal masses", {}}, {"masses 1,2", {1.0, 2.0}}}) {
    const RunReport r = expect_pass(o, label, config(gh(0.0, kTwo, masses), {"petrov_kt"}, 0.3));
    const CheckReport* irr = find(r, "irreducibility");
    if (!irr || irr->min_residual < 0.01) o.fail(label + " irreducibility below 0.01");
  }
  const RunReport neg = run(parse_config(config(gh(1.0, kThree), {"petrov_kt"})));
  const CheckReport* t = find(neg, "type_d");
  if (neg.pass() || !t || t->note.find("NotTypeD") == std::string::npos) o.fail("three centres not reported as NotTypeD");
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_8() {
  Outcome o;
  const char* bin = std::getenv("INSTANTON_VERIFY_BIN");
  const char* dir = std::getenv("INSTANTON_CONFIG_DIR");
  if (!bin || !dir) {
    o.fail("INSTANTON_VERIFY_BIN and INSTANTON_CONFIG_DIR must be set");
    return o;
  }
  const auto tmp = std::filesystem::temp_directory_path() / "instanton_acceptance";
  std::filesystem::create_directories(tmp);
  for (const char* cfg : {"taub_nut_ky_toda.json", "ale_unequal_petrov_kt.json", "twistor_quadrics.json"}) {
    std::string outputs[2];
    int k = 0;
    for (const char* threads : {"1", "4"}) {
      const auto out = tmp / (std::string("t") + threads + "_" + cfg);
      const std::string cmd = std::string("INSTANTON_VERIFY_THREADS=") + threads + " \"" + bin + "\" run --config \"" +
                              dir + "/" + cfg + "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) > 1) o.fail(std::string(cfg) + " did not run");
      outputs[k++] = slurp(out);
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) o.fail(std::string(cfg) + " differs between 1 and 4 threads");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"curvature gate", criterion_1},
      {"hyper-Kahler gate", criterion_2},
      {"self-dual conformal Kahler", criterion_3},
      {"flat pieces", criterion_4},
      {"twistor gates", criterion_5},
      {"Taub-NUT Killing-Yano and Toda frame", criterion_6},
      {"Killing tensor on two-centre ALE", criterion_7},
      {"determinism across thread counts", criterion_8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu (%s): %s%s%s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
