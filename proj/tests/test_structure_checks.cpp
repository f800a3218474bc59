#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "instanton/structure_checks.hpp"
#include "support.hpp"

using namespace instanton;
using namespace testing_support;

namespace {

SampleSet gh_samples(const GeometryBundle& b, int count, std::uint64_t seed = 7, double ex = 0.1) {
  return halton_samples(*b.metric.chart, {-3.0, -2.5, -2.5, -2.5}, {3.0, 2.5, 2.5, 2.5}, count, seed, ex);
}

SampleSet tn_samples(double n, int count, std::uint64_t seed = 7) {
  return halton_samples(*taub_nut_chart(n), {-3.0, n + 0.4, 0.3, -3.0}, {3.0, n + 6.0, 2.8, 3.0}, count, seed);
}

MetricField flat_r4() {
  MetricField m;
  auto chart = std::make_shared<Chart>();
  chart->id = "r4";
  chart->names = {"x0", "x1", "x2", "x3"};
  chart->lo = {-10, -10, -10, -10};
  chart->hi = {10, 10, 10, 10};
  m.chart = chart;
  m.tensor = TensorField::closed_form("delta", 0, 2, Symmetry::symmetric,
                                      [](const JetPoint&) { return lift(identity2<double>()); });
  return m;
}

TensorField constant_form(std::string name, std::vector<std::array<int, 2>> pairs) {
  return TensorField::closed_form(name, 0, 2, Symmetry::antisymmetric, [pairs](const JetPoint&) {
    Tensor<Jet> w(2);
    for (auto [a, b] : pairs) {
      w(a, b) = Jet(1.0);
      w(b, a) = Jet(-1.0);
    }
    return w;
  });
}

TensorField vector_field(std::string name, std::function<Tensor<Jet>(const JetPoint&)> f) {
  return TensorField::closed_form(std::move(name), 1, 0, Symmetry::none, std::move(f));
}

TensorField scaled(const TensorField& f, double s) {
  return TensorField::pointwise(f.name(), f.up(), f.down(), f.symmetry(),
                                [f, s](const Coords& x, int order) { return f.at(x, order) * s; });
}

// tau-tau part of the metric times a, plus b times the metric.
TensorField fiber_square(const MetricField& m, double a, double b) {
  return TensorField::closed_form("H", 0, 2, Symmetry::symmetric, [m, a, b](const JetPoint& p) {
    const Tensor<Jet> g = m.tensor.on(p);
    Tensor<Jet> h(2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) h(i, j) = a * g(i, 0) * g(j, 0) + b * g(i, j);
    return h;
  });
}

GHData unequal_masses() {
  GHData d = two_centre_ale();
  d.masses = {1.0, 2.0};
  return d;
}

}  // namespace

TEST_CASE("Killing vectors on GH spaces") {
  const auto b = make_gh_bundle(two_centre_ale());
  const auto S = gh_samples(b, 40);
  CHECK(residual_killing_vector(b.metric, b.fiber_killing, S).pass);
  const auto rot = vector_field("d_phi", [](const JetPoint& p) {
    Tensor<Jet> v(1);
    v(1) = -1.0 * p[2];
    v(2) = p[1];
    return v;
  });
  const auto r = residual_killing_vector(b.metric, rot, S);
  CHECK(r.pass);
  CHECK(r.max_residual <= 1e-9);
  const auto bad = vector_field("x1 d_tau", [](const JetPoint& p) {
    Tensor<Jet> v(1);
    v(0) = p[1];
    return v;
  });
  const auto rb = residual_killing_vector(b.metric, bad, S);
  CHECK_FALSE(rb.pass);
  CHECK(rb.max_residual > 0.1);
}

TEST_CASE("CKY residuals and the extracted vector") {
  for (const auto& d : {two_centre_ale(), two_centre_alf(), three_centre()}) {
    const auto b = make_gh_bundle(d);
    const auto S = gh_samples(b, 30);
    const auto z = residual_cky(b.metric, b.cky, S);
    CHECK(z.report.max_residual <= 1e-8);
    for (std::size_t i = 0; i < S.size(); ++i) {
      const auto m = metric_jets(b.metric, S.points[i], 0);
      const auto up = detail::raise_vector(z.vectors[i], values(m.ginv));
      const double side = std::hypot(up(1), std::hypot(up(2), up(3)));
      CHECK(side <= 1e-8 * std::abs(up(0)));
      CHECK(up(0) == Catch::Approx(1.0).epsilon(1e-8));
    }
    const auto w = residual_cky(b.metric, b.triple[0], S);
    CHECK(w.report.max_residual <= 1e-10);
    for (const auto& t : w.vectors) CHECK(max_abs(t) <= 1e-10);
  }
  const auto b = make_gh_bundle(two_centre_ale());
  const auto S = gh_samples(b, 30);
  const TensorField w = b.triple[0];
  const auto sq = TensorField::closed_form("x1^2 omega1", 0, 2, Symmetry::antisymmetric,
                                           [w](const JetPoint& p) { return w.on(p) * (p[1] * p[1]); });
  CHECK(residual_cky(b.metric, sq, S).report.max_residual > 0.01);
}

TEST_CASE("Killing-Yano residuals") {
  const auto b = make_gh_bundle(two_centre_alf());
  const auto S = gh_samples(b, 20);
  CHECK(residual_ky(b.metric, b.triple[1], S).max_residual <= 1e-10);
  const auto flat = flat_r4();
  const auto Sf = halton_samples(*flat.chart, {-1, -1, -1, -1}, {1, 1, 1, 1}, 10, 3);
  CHECK(residual_ky(flat, constant_form("k", {{0, 1}, {2, 3}}), Sf).max_residual == 0.0);
}

TEST_CASE("Killing tensors from the metric and a Killing vector") {
  const auto b = make_gh_bundle(two_centre_alf());
  const auto S = gh_samples(b, 20);
  const auto g = residual_killing_tensor(b.metric, b.metric.tensor, S);
  CHECK(g.max_residual <= 1e-14);
  CHECK(residual_killing_tensor(b.metric, fiber_square(b.metric, 1.0, 0.0), S).max_residual <= 1e-9);
}

TEST_CASE("kahler_verify") {
  const auto flat = flat_r4();
  const auto S = halton_samples(*flat.chart, {-1, -1, -1, -1}, {1, 1, 1, 1}, 10, 3);
  const auto k = kahler_verify(flat, constant_form("k", {{0, 1}, {2, 3}}), S);
  for (auto* r : k.all()) CHECK(r->max_residual <= 1e-14);
  CHECK_THROWS_AS(kahler_verify(flat, constant_form("dx0^dx1", {{0, 1}}), S), DegenerateFormError);

  for (const auto& d : {two_centre_ale(), three_centre()}) {
    const auto b = make_gh_bundle(d);
    const auto Sg = gh_samples(b, 30);
    const auto r = kahler_verify(b.metric, b.kahler_sd, Sg, Duality::self_dual);
    for (auto* c : r.all()) {
      INFO(c->check << " " << c->max_residual);
      CHECK(c->pass);
    }
    // Wrong duality is caught.
    CHECK_FALSE(kahler_verify(b.metric, b.kahler_sd, Sg, Duality::anti_self_dual).duality.pass);
  }
}

TEST_CASE("Petrov reconstruction") {
  SECTION("two-centre ALE") {
    const auto b = make_gh_bundle(two_centre_ale());
    const auto S = gh_samples(b, 30);
    const auto p = petrov_reconstruct(b.metric, S);
    CHECK(p.is_type_d);
    CHECK(p.closed.max_residual <= 1e-8);
    CHECK(p.duality.max_residual <= 1e-8);
    CHECK(p.trace.pass);
    CHECK(p.pair_gap.pass);
    const auto k = kahler_verify(b.metric, p.kahler_asd, S, Duality::anti_self_dual);
    for (auto* c : k.all()) {
      INFO(c->check << " " << c->max_residual);
      CHECK(c->max_residual <= 1e-8);
    }
  }
  SECTION("Taub-NUT") {
    const auto tn = taub_nut_metric(1.0);
    const auto S = tn_samples(1.0, 20);
    const auto p = petrov_reconstruct(tn, S);
    CHECK(p.is_type_d);
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double rho = S.points[i][1];
      CHECK(p.conformal_factor.value(S.points[i])[0] == Catch::Approx(std::cbrt(2.0) / (rho + 1.0)).epsilon(1e-9));
    }
    const auto z = residual_cky(tn, p.cky_asd, S);
    CHECK(z.report.max_residual <= 1e-8);
    for (std::size_t i = 0; i < S.size(); ++i) {
      const auto m = metric_jets(tn, S.points[i], 0);
      const auto up = detail::raise_vector(z.vectors[i], values(m.ginv));
      CHECK(std::hypot(up(1), std::hypot(up(2), up(3))) <= 1e-8 * std::abs(up(0)));
    }
    const auto survey = killing_vector_survey(tn, S);
    for (double c : survey.chi_ratio) CHECK(c <= 1e-9);
  }
  SECTION("three centres are not type D") {
    const auto b = make_gh_bundle(three_centre());
    CHECK_THROWS_AS(petrov_reconstruct(b.metric, gh_samples(b, 10)), NotTypeDError);
  }
}

TEST_CASE("frozen calibration constants reproduce") {
  CHECK(calibrate_omega_scale(1.0) == Catch::Approx(kOmegaMinusScale).epsilon(1e-8));
  CHECK(calibrate_omega_scale(0.7) == Catch::Approx(kOmegaMinusScale).epsilon(1e-8));
  const auto b = make_gh_bundle(unequal_masses(), 0.3);
  const auto fit = calibrate_killing_tensor_scale(b.metric, gh_samples(b, 10, 7, 0.3));
  CHECK(fit.scale == Catch::Approx(kKillingTensorScale).epsilon(1e-8));
  CHECK(fit.spread <= 1e-8);
}

TEST_CASE("Taub-NUT is the chi = 0 branch") {
  for (double n : {1.0, 0.5}) {
    const auto tn = taub_nut_metric(n);
    const auto S = tn_samples(n, 15);
    CHECK_THROWS_AS(killing_tensor_pipeline(tn, S), ChiZeroError);
    const auto survey = killing_vector_survey(tn, S);
    for (double e : survey.ernst_plus) CHECK(std::abs(e - std::pow(2.0 * n, -2.0 / 3.0)) <= 1e-6);
  }
}

TEST_CASE("Killing tensor pipeline on two-centre ALE spaces") {
  SECTION("unequal masses") {
    const auto b = make_gh_bundle(unequal_masses(), 0.3);
    const auto S = gh_samples(b, 40, 7, 0.3);
    KTOptions o;
    o.reference = b.fiber_killing;
    const auto r = killing_tensor_pipeline(b.metric, S, o);
    for (const auto& c : r.reports) {
      INFO(c.check << " " << c.max_residual);
      CHECK(c.pass);
    }
    CHECK_FALSE(r.t_vanishes);
    REQUIRE(r.find("t_parallel_reference") != nullptr);
    CHECK(r.find("irreducibility")->max_residual > 0.01);
    const auto kt = residual_killing_tensor(b.metric, r.killing_tensor, gh_samples(b, 8, 3, 0.3));
    CHECK(kt.max_residual <= 1e-7);
    const auto irr = irreducibility_residual(b.metric, r.killing_tensor, {r.xi, r.second_killing}, gh_samples(b, 8, 3, 0.3));
    CHECK(irr.pass);
  }
  SECTION("equal masses: t vanishes") {
    const auto b = make_gh_bundle(two_centre_ale(), 0.3);
    const auto S = gh_samples(b, 40, 7, 0.3);
    const auto r = killing_tensor_pipeline(b.metric, S);
    CHECK(r.pass());
    CHECK(r.t_vanishes);
    CHECK_FALSE(r.note.empty());
  }
}

TEST_CASE("irreducibility of span elements") {
  const auto b = make_gh_bundle(two_centre_alf());
  const auto S = gh_samples(b, 10);
  const auto rot = vector_field("d_phi", [](const JetPoint& p) {
    Tensor<Jet> v(1);
    v(1) = -1.0 * p[2];
    v(2) = p[1];
    return v;
  });
  const auto red = irreducibility_residual(b.metric, fiber_square(b.metric, 1.0, 3.0), {b.fiber_killing, rot}, S);
  CHECK(red.max_residual <= 1e-10);
  CHECK_FALSE(red.pass);
  const auto flat = flat_r4();
  const auto Sf = halton_samples(*flat.chart, {-1, -1, -1, -1}, {1, 1, 1, 1}, 10, 3);
  const auto e0 = vector_field("e0", [](const JetPoint&) { return detail::constant_vector({1, 0, 0, 0}); });
  CHECK(irreducibility_residual(flat, flat.tensor, {e0, e0}, Sf).max_residual <= 1e-14);
}

TEST_CASE("Hodge incompatibility between flat pieces") {
  GHData d;
  d.V0 = 1.0;
  d.centres = {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.5}};
  const int P = piece_count(d);
  std::vector<FlatPiece> pieces;
  for (int I = 0; I < P; ++I) pieces.push_back(flat_piece(d, I));
  const auto S = gh_samples(pieces[0].bundle, 40);
  for (int I = 0; I < P; ++I)
    for (int J = 0; J < P; ++J) {
      const auto r = hodge_incompatibility(pieces[I].bundle.metric, pieces[J].bundle.kahler_sd, S);
      INFO("I=" << I << " J=" << J << " min=" << r.min_residual << " max=" << r.max_residual);
      if (I == J) {
        CHECK(r.max_residual <= 1e-9);
      } else {
        CHECK(r.pass);
      }
    }
}

TEST_CASE("Killing-Yano candidate") {
  SECTION("Taub-NUT") {
    const auto b = taub_nut_bundle(1.0);
    const auto S = tn_samples(1.0, 20);
    const auto p = asd_structure_fields(b.metric);
    const auto ky = ky_candidate(b, p.cky_asd, S);
    CHECK(ky.scale == Catch::Approx(std::cbrt(2.0)).epsilon(1e-8));
    CHECK(residual_ky(b.metric, ky.Y, S).max_residual <= 1e-8);
  }
  SECTION("Taub-NUT as a one-centre GH space") {
    const auto b = make_gh_bundle(taub_nut_gh_data(1.0));
    const auto S = gh_samples(b, 20);
    const auto p = asd_structure_fields(b.metric);
    CHECK(residual_ky(b.metric, ky_candidate(b, p.cky_asd, S).Y, S).max_residual <= 1e-8);
  }
  SECTION("Eguchi-Hanson has none") {
    const auto b = make_gh_bundle(two_centre_ale());
    const auto S = gh_samples(b, 20);
    const auto p = asd_structure_fields(b.metric);
    CHECK_THROWS_AS(ky_candidate(b, p.cky_asd, S), MismatchError);
    const auto scan = ky_min_over_scale(b.metric, b.cky, p.cky_asd, S);
    CHECK(scan.best_residual >= 1e-3);
    const auto zero = TensorField::closed_form("0", 0, 2, Symmetry::antisymmetric,
                                               [](const JetPoint&) { return Tensor<Jet>(2); });
    CHECK_THROWS_AS(ky_candidate(b, zero, S), DegenerateFormError);
  }
}

TEST_CASE("checks are scale covariant") {
  const auto b = make_gh_bundle(two_centre_ale());
  const auto S = gh_samples(b, 15);
  for (double s : {1e-3, -4.0, 250.0}) {
    const auto a = residual_cky(b.metric, b.cky, S).report;
    const auto c = residual_cky(b.metric, scaled(b.cky, s), S).report;
    CHECK(a.pass == c.pass);
    CHECK(c.max_residual == Catch::Approx(a.max_residual).margin(1e-12));
    const auto k = residual_killing_vector(b.metric, scaled(b.fiber_killing, s), S);
    CHECK(k.pass);
    const auto w = kahler_verify(b.metric, scaled(b.kahler_sd, s), S, Duality::self_dual);
    CHECK(w.pass());
  }
}

TEST_CASE("sampling is reproducible and thread-count independent") {
  const auto b = make_gh_bundle(three_centre());
  const auto a = gh_samples(b, 50, 11);
  const auto c = gh_samples(b, 50, 11);
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == c.points[i]);
  const auto other = gh_samples(b, 50, 12);
  CHECK(other.points[0] != a.points[0]);
  for (const auto& x : a.points) CHECK(b.metric.chart->contains(x));
  CHECK_THROWS_AS(halton_samples(*b.metric.chart, {0, 0, 0, 0}, {1, 0.01, 0.01, 0.01}, 5, 1), ConfigError);

  setenv("INSTANTON_VERIFY_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  const auto one = ricci_residual(b.metric, a).residuals;
  setenv("INSTANTON_VERIFY_THREADS", "4", 1);
  CHECK(worker_count() == 4);
  const auto four = ricci_residual(b.metric, a).residuals;
  unsetenv("INSTANTON_VERIFY_THREADS");
  CHECK(one == four);
}

TEST_CASE("parallel_map rethrows the lowest-index failure") {
  setenv("INSTANTON_VERIFY_THREADS", "3", 1);
  try {
    parallel_map(20, [](std::size_t i) -> int {
      if (i == 5 || i == 13) throw DomainError("bad " + std::to_string(i));
      return static_cast<int>(i);
    });
    FAIL("expected an exception");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()) == "bad 5");
  }
  unsetenv("INSTANTON_VERIFY_THREADS");
}

TEST_CASE("report bookkeeping") {
  const auto u = make_report("u", {1e-9, 2e-9}, 1e-8);
  CHECK(u.pass);
  CHECK(u.max_residual == 2e-9);
  CHECK(u.mean_residual == Catch::Approx(1.5e-9));
  const auto l = make_report("l", {0.2, 0.01, 0.3}, 0.05, Bound::lower, 0.6);
  CHECK(l.pass);
  CHECK(l.fraction == Catch::Approx(2.0 / 3.0));
  CHECK_FALSE(make_report("nan", {std::nan("")}, 1.0).pass);
}
