#pragma once

// Toda frames: g = W^-1 (dpsi + A)^2 + W (dz^2 + e^u (dx^2 + dy^2)) in the
// chart (psi, x, y, z), with kappa = (dpsi + A) ^ dz / z^2 + W e^u / z^2 dx ^ dy.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "instanton/check_report.hpp"
#include "instanton/errors.hpp"
#include "instanton/field.hpp"
#include "instanton/instanton_zoo.hpp"
#include "instanton/sampling.hpp"
#include "instanton/structure_checks.hpp"

namespace instanton {

using ScalarJetFn = std::function<Jet(const JetPoint&)>;

struct TodaFrame {
  std::string name;
  std::shared_ptr<const Chart> chart;
  ScalarJetFn u;
  ScalarJetFn W;
  std::function<std::array<Jet, 3>(const JetPoint&)> A;  // dx, dy, dz components
  ScalarJetFn h;  // surface factor: h(x, y) (dx^2 + dy^2) is the unit sphere
  Coords box_lo{};
  Coords box_hi{};
};

struct TodaGeometry {
  MetricField metric;
  TensorField kahler_asd;
  TensorField killing;  // d/dpsi
  TensorField u;
  TensorField W;
};

inline std::shared_ptr<const Chart> toda_chart(std::string id, double z_min) {
  const double inf = std::numeric_limits<double>::infinity();
  auto chart = std::make_shared<Chart>();
  chart->id = std::move(id);
  chart->names = {"psi", "x", "y", "z"};
  chart->lo = {-inf, -inf, -inf, z_min};
  chart->hi = {inf, inf, inf, inf};
  return chart;
}

namespace detail {

inline Tensor<Jet> toda_theta(const TodaFrame& f, const JetPoint& p) {
  const auto a = f.A(p);
  Tensor<Jet> t(1);
  t(0) = Jet(1.0);
  for (int i = 0; i < 3; ++i) t(i + 1) = a[static_cast<std::size_t>(i)];
  return t;
}

}  // namespace detail

/// Metric of orientation -1 (kappa is then anti-self-dual), the Kahler form
/// and the fibre Killing vector.
inline TodaGeometry toda_build(const TodaFrame& f) {
  if (!f.u || !f.W || !f.A || !f.chart) throw ConfigError("incomplete Toda frame " + f.name);
  TodaGeometry g;
  g.metric.chart = f.chart;
  g.metric.orientation = -1.0;
  g.metric.tensor = TensorField::closed_form("g_toda:" + f.name, 0, 2, Symmetry::symmetric, [f](const JetPoint& p) {
    const Tensor<Jet> th = detail::toda_theta(f, p);
    const Jet W = f.W(p);
    const Jet We = W * exp(f.u(p));
    const Jet iW = 1.0 / W;
    Tensor<Jet> m(2);
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) m(a, b) = iW * th(a) * th(b);
    m(1, 1) += We;
    m(2, 2) += We;
    m(3, 3) += W;
    return m;
  });
  g.kahler_asd = TensorField::closed_form("kappa-_toda", 0, 2, Symmetry::antisymmetric, [f](const JetPoint& p) {
    const Tensor<Jet> th = detail::toda_theta(f, p);
    const Jet iz2 = 1.0 / (p[3] * p[3]);
    const Jet c = f.W(p) * exp(f.u(p)) * iz2;
    Tensor<Jet> k(2);
    for (int a = 0; a < 3; ++a) {
      k(a, 3) = th(a) * iz2;
      k(3, a) = -k(a, 3);
    }
    k(1, 2) += c;
    k(2, 1) -= c;
    return k;
  });
  g.killing = TensorField::closed_form("d_psi", 1, 0, Symmetry::none, [](const JetPoint&) {
    Tensor<Jet> v(1);
    v(0) = Jet(1.0);
    return v;
  });
  g.u = TensorField::closed_form("u", 0, 0, Symmetry::none, [f](const JetPoint& p) { return detail::scalar_tensor(f.u(p)); });
  g.W = TensorField::closed_form("W", 0, 0, Symmetry::none, [f](const JetPoint& p) { return detail::scalar_tensor(f.W(p)); });
  return g;
}

/// Taub-NUT with NUT charge n: z = (2n)^(-1/3) (rho + n), x = log tan(theta/2),
/// y = phi, psi = (2n)^(4/3) tau.
inline TodaFrame taub_nut_frame(double n) {
  if (!(n > 0.0)) throw ConfigError("NUT charge must be positive");
  const double c = std::cbrt(2.0 * n);
  TodaFrame f;
  f.name = "taub_nut";
  f.chart = toda_chart("toda_taub_nut", 2.0 * n / c);
  auto rho = [c, n](const JetPoint& p) { return c * p[3] - n; };
  auto sech2 = [](const Jet& x) {
    const Jet e = exp(x);
    const Jet s = e + 1.0 / e;
    return 4.0 / (s * s);
  };
  f.u = [rho, sech2, c, n](const JetPoint& p) {
    const Jet r = rho(p) - n;
    return log(r * r * sech2(p[1]) / (c * c));
  };
  f.h = [sech2](const JetPoint& p) { return sech2(p[1]); };
  f.W = [rho, c, n](const JetPoint& p) {
    const Jet r = rho(p);
    return c * c * (r + n) / (r - n);
  };
  f.A = [c](const JetPoint& p) {
    const Jet e2 = exp(2.0 * p[1]);
    const Jet th = (e2 - 1.0) / (e2 + 1.0);
    return std::array<Jet, 3>{Jet(0.0), -(c * c * c * c) * th, Jet(0.0)};
  };
  const double pi = std::numbers::pi;
  f.box_lo = {-pi, -1.5, -pi, (2.0 * n + 0.5) / c};
  f.box_hi = {pi, 1.5, pi, (2.0 * n + 5.0) / c};
  return f;
}

/// Toda chart -> Taub-NUT chart (tau, rho, theta, phi).
inline CoordinateMap toda_to_taub_nut(double n) {
  const double c = std::cbrt(2.0 * n);
  return [c, n](const JetPoint& p) {
    return JetPoint{p[0] / (c * c * c * c), c * p[3] - n, 2.0 * atan(exp(p[1])), p[2]};
  };
}

inline TodaFrame builtin_toda_frame(const std::string& name, double n = 1.0) {
  if (name == "taub_nut") return taub_nut_frame(n);
  throw ConfigError("unknown Toda frame '" + name + "' (known: taub_nut)");
}

/// |u_xx + u_yy + (e^u)_zz|.
inline CheckReport toda_residual(const ScalarJetFn& u, const SampleSet& s, double tol = 1e-8) {
  return detail::sample_check("toda_equation", s, tol, [&](const Coords& x) {
    const JetPoint p = seed_point(x, 2);
    const Jet uj = u(p);
    const Jet e = exp(uj);
    const double v = uj.derivative(1).derivative(1).value() + uj.derivative(2).derivative(2).value() +
                     e.derivative(3).derivative(3).value();
    return std::abs(v);
  });
}

/// |R - 2| for the surface metric h(x, y) (dx^2 + dy^2), R = -h^-1 Lap log h.
inline CheckReport sphere_gauge_check(const ScalarJetFn& h, const SampleSet& s, double tol = 1e-8) {
  return detail::sample_check("unit_sphere_gauge", s, tol, [&](const Coords& x) {
    const JetPoint p = seed_point(x, 2);
    const Jet hj = h(p);
    if (!(hj.value() > 0.0)) throw DomainError("surface conformal factor must be positive");
    const Jet l = log(hj);
    const double lap = l.derivative(1).derivative(1).value() + l.derivative(2).derivative(2).value();
    return std::abs(-lap / hj.value() - 2.0);
  });
}

/// |Omega z - 1| with Omega the ASD conformal factor read off the curvature.
inline CheckReport toda_conformal_factor_check(const TodaGeometry& g, const SampleSet& s, double tol = 1e-8) {
  const PetrovResult pr = asd_structure_fields(g.metric);
  return detail::sample_check("toda_z_equals_inverse_omega", s, tol, [&](const Coords& x) {
    const double om = pr.conformal_factor.value(x)[0];
    return std::abs(om * x[3] - 1.0);
  });
}

/// Largest component difference against a reference metric pulled back
/// along `to_reference`, relative to the largest reference component.
inline CheckReport toda_reference_check(const TodaGeometry& g, const MetricField& reference,
                                        const CoordinateMap& to_reference, const SampleSet& s, double tol = 1e-10) {
  const TensorField ref = pullback(reference.tensor, to_reference, "reference_in_toda");
  return detail::sample_check("toda_reproduces_reference", s, tol, [&](const Coords& x) {
    const Tensor<double> a = g.metric.tensor.value(x);
    const Tensor<double> b = ref.value(x);
    return max_abs(a - b) / max_abs(b);
  });
}

/// |g(d_psi, d_psi) W - 1|.
inline CheckReport toda_fibre_norm_check(const TodaGeometry& g, const SampleSet& s, double tol = 1e-12) {
  return detail::sample_check("toda_fibre_norm", s, tol, [&](const Coords& x) {
    const Tensor<double> m = g.metric.tensor.value(x);
    const double W = g.W.value(x)[0];
    return std::abs(m(0, 0) * W - 1.0);
  });
}

}  // namespace instanton
