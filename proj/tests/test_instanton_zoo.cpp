#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "instanton/geometry.hpp"
#include "instanton/instanton_zoo.hpp"
#include "instanton/weyl.hpp"
#include "support.hpp"

using namespace instanton;
using namespace testing_support;
using Catch::Approx;

namespace {

Tensor<double> raise_first(const Tensor<double>& w, const Tensor<double>& gi) {
  return transform_slot(w, 0, gi);  // J^a_b = g^ac w_cb
}

Tensor<double> compose(const Tensor<double>& a, const Tensor<double>& b) { return matmul(a, b); }

}  // namespace

TEST_CASE("GH potential direct evaluation") {
  GHData d;
  d.V0 = 0.0;
  d.centres = {{0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}};
  const auto b = make_gh_bundle(d);
  CHECK(b.potential.value({0.0, 1.0, 0.0, 0.0})[0] == Approx(2.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(evaluate_jet(b.potential, *b.metric.chart, {0.0, 0.0, 0.0, 0.0}, 0), SingularityError);
  CHECK_THROWS_AS(evaluate_jet(b.potential, *b.metric.chart, {0.0, 0.05, 0.0, 2.0}, 0), SingularityError);
}

TEST_CASE("empty sum gives flat R3 x S1") {
  GHData d;
  d.V0 = 1.0;
  const auto b = make_gh_bundle(d);
  const Coords x{0.1, 0.5, -1.2, 0.7};
  CHECK(b.potential.value(x)[0] == 1.0);
  CHECK(max_abs(b.connection_form.value(x)) == 0.0);
  CHECK(max_abs(values(levi_civita_curvature(b.metric, x).riemann)) <= 1e-12);
}

TEST_CASE("invalid GH data") {
  GHData d;
  d.V0 = 0.0;
  CHECK_THROWS_AS(make_gh_bundle(d), ConfigError);
  d.centres = {{0, 0, 1}, {0, 0, 1}};
  CHECK_THROWS_AS(make_gh_bundle(d), ConfigError);
  d.centres = {{0, 0, 1}};
  d.masses = {-1.0};
  CHECK_THROWS_AS(make_gh_bundle(d), ConfigError);
}

TEST_CASE("axis frame conventions") {
  auto f = axis_frame({0.0, 0.0, 1.0});
  Vec3 e1 = f[0], e2 = f[1];
  CHECK(e1 == Vec3{1.0, 0.0, 0.0});
  CHECK(e2 == Vec3{0.0, 1.0, 0.0});
  f = axis_frame({1.0, 0.0, 0.0});
  e1 = f[0];
  e2 = f[1];
  CHECK(e1 == Vec3{0.0, 1.0, 0.0});
  CHECK(e2 == Vec3{0.0, 0.0, 1.0});
}

TEST_CASE("orientation calibration makes the triple self-dual") {
  for (const auto& d : {two_centre_ale(), two_centre_alf(), three_centre()}) {
    const auto b = make_gh_bundle(d);
    for (const auto& x : gh_points(b, 5, 13)) {
      const auto g = b.metric.tensor.value(x);
      const auto gi = inverse_and_det(g).first;
      for (const auto& w : b.triple) {
        const auto wv = w.value(x);
        CHECK(max_abs(hodge_star_2form(wv, g, gi, -1.0) - wv) <= 1e-12 * max_abs(wv));
        CHECK(max_abs(hodge_star_2form(wv, g, gi, 1.0) + wv) <= 1e-12 * max_abs(wv));
      }
    }
    CHECK(b.metric.orientation == kGHOrientation);
  }
}

TEST_CASE("hyper-Kahler triple: closed, parallel, quaternionic, moment maps") {
  for (const auto& d : {two_centre_ale(), three_centre()}) {
    const auto b = make_gh_bundle(d);
    for (const auto& x : gh_points(b, 8, 2)) {
      const Connection c = connection(b.metric, x, 0);
      const auto g = values(c.metric.g);
      const auto gi = values(c.metric.ginv);
      std::array<Tensor<double>, 3> J;
      for (std::size_t i = 0; i < 3; ++i) {
        const auto w = b.triple[i].at(x, 1);
        const double scale = norm(values(w), 0, g, gi);
        CHECK(norm(values(exterior_derivative(w)), 0, g, gi) <= 1e-9 * scale);
        CHECK(norm(values(covariant_derivative(w, 0, c.gamma)), 0, g, gi) <= 1e-9 * scale);
        const auto tw = interior(values(b.fiber_killing.at(x, 0)), values(w));
        const auto dx = values(exterior_derivative(b.moment_maps[i].at(x, 1)));
        CHECK(max_abs(tw - dx) <= 1e-12);
        J[i] = raise_first(values(w), gi);
        const auto j2 = compose(J[i], J[i]) + identity2<double>();
        CHECK(max_abs(j2) <= 1e-12 * max_abs(J[i]) * max_abs(J[i]));
      }
      CHECK(max_abs(compose(J[0], J[1]) - J[2]) <= 1e-11 * max_abs(J[2]));
    }
  }
}

TEST_CASE("kappa+ matches its spherical form") {
  GHData d = two_centre_ale();
  const auto b = make_gh_bundle(d);
  // (tau, r, theta, phi) about the origin with polar axis z.
  const CoordinateMap sph = [](const JetPoint& p) {
    const Jet s = sin(p[2]);
    return JetPoint{p[0], p[1] * s * cos(p[3]), p[1] * s * sin(p[3]), p[1] * cos(p[2])};
  };
  const TensorField kappa = pullback(b.kahler_sd, sph, "kappa_sph");
  const TensorField a = pullback(b.connection_form, sph, "A_sph");
  const TensorField v = pullback(b.potential, sph, "V_sph");
  for (const Coords& x : {Coords{0.3, 1.7, 0.8, 0.4}, Coords{-1.0, 2.2, 2.1, -2.0}, Coords{2.0, 0.9, 1.2, 3.0}}) {
    const auto k = kappa.value(x);
    const auto av = a.value(x);
    const double V = v.value(x)[0];
    const double r = x[1];
    Tensor<double> expect(2);
    // (dtau + A) ^ dr
    std::array<double, 4> theta{1.0, av(1), av(2), av(3)};
    theta[0] += av(0);
    for (int c = 0; c < 4; ++c) {
      if (c == 1) continue;
      expect(c, 1) += theta[static_cast<std::size_t>(c)] / (r * r);
      expect(1, c) -= theta[static_cast<std::size_t>(c)] / (r * r);
    }
    const double area = V * std::sin(x[2]);
    expect(2, 3) -= area;
    expect(3, 2) += area;
    CHECK(max_abs(k - expect) <= 1e-10 * max_abs(expect));
  }
}

TEST_CASE("flat pieces are flat and Cartesian charts are Euclidean") {
  const GHData d = two_centre_alf();
  const int P = piece_count(d);
  CHECK(P == 3);
  for (int I = 0; I < P; ++I) {
    const FlatPiece piece = flat_piece(d, I);
    for (const auto& x : gh_points(piece.bundle, 20, 31)) {
      const Curvature c = levi_civita_curvature(piece.bundle.metric, x);
      CHECK(frame_max_abs(values(c.riemann_lower), values(c.metric.g)) <= 1e-9);
      const JetPoint y = piece.cartesian(seed_point(x, 1));
      const auto g = values(c.metric.g);
      double worst = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int bb = 0; bb < 4; ++bb) {
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) acc += y[static_cast<std::size_t>(k)].derivative(a).value() * y[static_cast<std::size_t>(k)].derivative(bb).value();
          worst = std::max(worst, std::abs(acc - g(a, bb)));
        }
      CHECK(worst <= 1e-10 * max_abs(g));
      if (I > 0) {
        const Vec3 c0 = d.centres[static_cast<std::size_t>(I - 1)];
        const double ri = std::sqrt((x[1] - c0[0]) * (x[1] - c0[0]) + (x[2] - c0[1]) * (x[2] - c0[1]) + (x[3] - c0[2]) * (x[3] - c0[2]));
        double s = 0.0;
        for (const auto& yk : y) s += yk.value() * yk.value();
        CHECK(ri == Approx(s / 4.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("flat piece Kahler forms sum to kappa+") {
  const GHData d = two_centre_alf();
  const auto full = make_gh_bundle(d);
  std::vector<FlatPiece> pieces;
  for (int I = 0; I < piece_count(d); ++I) pieces.push_back(flat_piece(d, I));
  for (const auto& x : gh_points(full, 20, 12)) {
    Tensor<double> sum(2);
    for (const auto& p : pieces) sum += p.bundle.kahler_sd.value(x);
    const auto k = full.kahler_sd.value(x);
    CHECK(max_abs(sum - k) <= 1e-13 * max_abs(k));
  }
}

TEST_CASE("flat piece preconditions") {
  GHData d = two_centre_ale();
  CHECK_THROWS_AS(flat_piece(d, 0), ConfigError);
  d.centres = {{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  d.axis = Vec3{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(flat_piece(d, 1), ConfigError);
}

TEST_CASE("Taub-NUT metric components") {
  const MetricField m = taub_nut_metric(1.0);
  const auto g = m.tensor.value({0.0, 3.0, std::numbers::pi / 2, 0.0});
  CHECK(g(0, 0) == Approx(2.0));
  CHECK(g(1, 1) == Approx(2.0));
  CHECK(g(2, 2) == Approx(8.0));
  CHECK(g(3, 3) == Approx(8.0));
  CHECK(std::abs(g(0, 3)) < 1e-15);
  const double far = m.tensor.value({0.0, 101.0, std::numbers::pi / 2, 0.0})(0, 0);
  CHECK(far > 3.9);
  CHECK(far < 4.0);
  double prev = 0.0;
  for (double rho : {2.0, 5.0, 20.0, 101.0, 1000.0}) {
    const double gtt = m.tensor.value({0.0, rho, std::numbers::pi / 2, 0.0})(0, 0);
    CHECK(gtt > prev);
    prev = gtt;
  }
  CHECK_THROWS_AS(evaluate_jet(m.tensor, *m.chart, {0.0, 0.5, 1.0, 0.0}, 0), DomainError);
}

TEST_CASE("Taub-NUT chart is the one-centre GH space") {
  for (double n : {1.0, 2.0}) {
    const auto gh = make_gh_bundle(taub_nut_gh_data(n));
    const TensorField pulled = pullback(gh.metric.tensor, taub_nut_to_gh(n), "g");
    const MetricField tn = taub_nut_metric(n);
    for (const auto& x : taub_nut_points(n, 20)) {
      const auto a = pulled.value(x);
      const auto b = tn.tensor.value(x);
      CHECK(max_abs(a - b) <= 1e-12 * max_abs(b));
      const Curvature c = levi_civita_curvature(tn, x);
      const auto g = values(c.metric.g);
      CHECK(frame_max_abs(values(c.ricci), g) <= 1e-10);
      const auto sd = weyl_endomorphism(values(c.weyl), g, values(c.metric.ginv), tn.orientation, Duality::self_dual);
      CHECK(std::abs(sd.eigenvalues[0]) <= 1e-10);
      CHECK(std::abs(sd.eigenvalues[2]) <= 1e-10);
    }
  }
}

TEST_CASE("Taub-NUT bundle triple stays self-dual in its own chart") {
  const double n = 1.0;
  const auto b = taub_nut_bundle(n);
  for (const auto& x : taub_nut_points(n, 5)) {
    const auto g = b.metric.tensor.value(x);
    const auto gi = inverse_and_det(g).first;
    for (const auto& w : b.triple) {
      const auto wv = w.value(x);
      CHECK(max_abs(hodge_star_2form(wv, g, gi, b.metric.orientation) - wv) <= 1e-11 * max_abs(wv));
    }
    const auto tw = interior(values(b.fiber_killing.at(x, 0)), b.triple[2].value(x));
    const auto dx = values(exterior_derivative(b.moment_maps[2].at(x, 1)));
    CHECK(max_abs(tw - dx) <= 1e-12);
  }
}
