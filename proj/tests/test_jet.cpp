#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "instanton/jet.hpp"

using namespace instanton;
using Catch::Approx;

namespace {

using ScalarFn = std::function<Jet(const JetPoint&)>;

double partial_at(const ScalarFn& f, const std::array<double, 4>& x, const MultiIndex& alpha, int order) {
  return f(seed_point(x, order)).partial(alpha);
}

// Central difference of d^alpha f along `var`, Richardson-extrapolated.
double fd_partial(const ScalarFn& f, std::array<double, 4> x, const MultiIndex& alpha, int var, int order) {
  auto central = [&](double h) {
    auto xp = x;
    auto xm = x;
    xp[static_cast<std::size_t>(var)] += h;
    xm[static_cast<std::size_t>(var)] -= h;
    return (partial_at(f, xp, alpha, order) - partial_at(f, xm, alpha, order)) / (2 * h);
  };
  const double h = 1e-4;
  return (4 * central(h / 2) - central(h)) / 3;
}

// Checks every partial of degree <= order against finite differences of the
// next lower degree.
void check_against_fd(const ScalarFn& f, const std::array<double, 4>& x, int order) {
  const auto& table = detail::MonomialTable::instance();
  const Jet full = f(seed_point(x, order));
  for (int i = 1; i < jet_size(order); ++i) {
    const MultiIndex beta = table.exponent(i);
    int var = 0;
    while (beta[static_cast<std::size_t>(var)] == 0) ++var;
    MultiIndex alpha = beta;
    --alpha[static_cast<std::size_t>(var)];
    const double exact = full.partial(beta);
    const double fd = fd_partial(f, x, alpha, var, order - 1);
    const double scale = std::max(1.0, std::abs(exact));
    INFO("monomial " << beta[0] << beta[1] << beta[2] << beta[3]);
    CHECK(std::abs(exact - fd) <= 1e-6 * scale);
  }
}

}  // namespace

TEST_CASE("monomial table sizes") {
  CHECK(jet_size(0) == 1);
  CHECK(jet_size(1) == 5);
  CHECK(jet_size(2) == 15);
  CHECK(jet_size(4) == 70);
  CHECK(jet_size(6) == 210);
}

TEST_CASE("constant scalar has vanishing partials") {
  const Jet c = Jet(1.0) + Jet::zero(2);
  CHECK(c.value() == 1.0);
  CHECK(c.partial({1, 0, 0, 0}) == 0.0);
  CHECK(c.partial({0, 1, 1, 0}) == 0.0);
  CHECK(c.partial({0, 0, 0, 2}) == 0.0);
}

TEST_CASE("r squared at (tau,1,2,2)") {
  const auto p = seed_point({0.3, 1.0, 2.0, 2.0}, 1);
  const Jet r2 = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
  CHECK(r2.value() == Approx(9.0));
  CHECK(r2.partial({1, 0, 0, 0}) == 0.0);
  CHECK(r2.partial({0, 1, 0, 0}) == Approx(2.0));
  CHECK(r2.partial({0, 0, 1, 0}) == Approx(4.0));
  CHECK(r2.partial({0, 0, 0, 1}) == Approx(4.0));
}

TEST_CASE("inverse radius at (tau,0,0,2) matches finite differences") {
  ScalarFn v = [](const JetPoint& p) { return 1.0 / sqrt(p[1] * p[1] + p[2] * p[2] + p[3] * p[3]); };
  const std::array<double, 4> x{0.7, 0.0, 0.0, 2.0};
  const Jet j = v(seed_point(x, 2));
  CHECK(j.value() == Approx(0.5).epsilon(1e-15));
  CHECK(j.partial({0, 0, 0, 1}) == Approx(-0.25).epsilon(1e-14));
  CHECK(j.partial({0, 0, 0, 2}) == Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(j.partial({0, 0, 0, 1}) - fd_partial(v, x, {0, 0, 0, 0}, 3, 0)) <= 1e-6);
  CHECK(std::abs(j.partial({0, 0, 0, 2}) - fd_partial(v, x, {0, 0, 0, 1}, 3, 1)) <= 1e-6);
}

TEST_CASE("elementary functions agree with finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  const std::vector<std::pair<const char*, ScalarFn>> fns = {
      {"exp", [](const JetPoint& p) { return exp(p[0] * p[1] - p[2]); }},
      {"log", [](const JetPoint& p) { return log(2.0 + p[0] * p[0] + p[3]); }},
      {"sin cos", [](const JetPoint& p) { return sin(p[0] + p[1]) * cos(p[2] * p[3]); }},
      {"sqrt", [](const JetPoint& p) { return sqrt(3.0 + p[1] * p[2] + p[0]); }},
      {"cbrt", [](const JetPoint& p) { return cbrt(p[1] - 2.0 + p[3] * p[0]); }},
      {"pow", [](const JetPoint& p) { return pow(1.5 + p[2], -1.5) * pow(2.0 + p[0] * p[3], 0.25); }},
      {"atan", [](const JetPoint& p) { return atan(p[0] * 2.0 + p[1] * p[3]); }},
      {"acos", [](const JetPoint& p) { return acos(0.4 * p[0] + 0.3 * p[2] * p[1]); }},
      {"atan2", [](const JetPoint& p) { return atan2(p[1] + 0.1, p[2] - 1.2); }},
      {"atan2 steep", [](const JetPoint& p) { return atan2(p[1] + 1.5, p[2] * 0.2); }},
      {"division", [](const JetPoint& p) { return (p[0] + p[1] * p[2]) / (2.0 + p[3] * p[3]); }},
  };
  for (const auto& [name, f] : fns) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::array<double, 4> x{u(rng), u(rng), u(rng), u(rng)};
      INFO(name);
      check_against_fd(f, x, 4);
    }
  }
}

TEST_CASE("atan2 values match the standard library in every quadrant") {
  for (double y : {-1.3, -0.2, 0.4, 2.0}) {
    for (double x : {-1.7, -0.1, 0.3, 1.1}) {
      const Jet j = atan2(Jet::variable(y, 0, 2), Jet::variable(x, 1, 2));
      CHECK(j.value() == Approx(std::atan2(y, x)));
      CHECK(j.partial({1, 0, 0, 0}) == Approx(x / (x * x + y * y)));
      CHECK(j.partial({0, 1, 0, 0}) == Approx(-y / (x * x + y * y)));
    }
  }
}

TEST_CASE("mixed partials commute") {
  const auto p = seed_point({0.2, -0.4, 0.9, 0.5}, 4);
  const Jet f = exp(p[0] * p[1]) * sin(p[2] + p[3] * p[1]);
  const Jet a = f.derivative(0).derivative(1).derivative(3);
  const Jet b = f.derivative(3).derivative(0).derivative(1);
  CHECK(a.order() == 1);
  for (std::size_t i = 0; i < a.coefficients().size(); ++i)
    CHECK(a.coefficients()[i] == Approx(b.coefficients()[i]).epsilon(1e-13));
  CHECK(a.value() == Approx(f.partial({1, 1, 0, 1})).epsilon(1e-13));
}

TEST_CASE("order bookkeeping") {
  const Jet a = Jet::variable(1.0, 0, 4);
  const Jet b = Jet::variable(2.0, 1, 2);
  CHECK((a * b).order() == 2);
  CHECK((a + 3.0).order() == 4);
  CHECK(Jet(5.0).is_constant());
  CHECK(a.derivative(0).order() == 3);
  CHECK_THROWS_AS(Jet::variable(0.0, 0, 7), OrderError);
  CHECK_THROWS_AS(Jet::variable(0.0, 0, 0).derivative(0), OrderError);
  CHECK_THROWS_AS(a.partial({5, 0, 0, 0}), OrderError);
  CHECK_THROWS_AS(log(Jet::variable(-1.0, 0, 1)), DomainError);
}
