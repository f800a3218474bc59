#pragma once

// Gibbons-Hawking multi-centre spaces, their flat pieces, and Taub-NUT.
//
// GH chart: (tau, x1, x2, x3) with metric V^-1 (dtau/P + A)^2 + V dx.dx,
// where P = 1 for the full space and P = number of pieces for a flat piece.
// Each monopole potential is A_i = m_i cos(theta_i) dphi_i in spherical
// coordinates about centre i whose polar axis is the data's axis.

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "instanton/errors.hpp"
#include "instanton/field.hpp"
#include "instanton/geometry.hpp"
#include "instanton/jet.hpp"

namespace instanton {

/// Chart orientation that makes the GH triple self-dual, fixed by the
/// calibration test in the zoo suite.
inline constexpr double kGHOrientation = -1.0;

using Vec3 = std::array<double, 3>;

struct GHData {
  double V0 = 1.0;
  std::vector<Vec3> centres;
  std::vector<double> masses;  // empty means unit masses
  std::optional<Vec3> axis;

  double mass(std::size_t i) const { return masses.empty() ? 1.0 : masses[i]; }
};

namespace detail {

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double len(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

inline void validate(const GHData& d) {
  if (d.V0 < 0.0) throw ConfigError("V0 must be nonnegative");
  if (d.centres.empty() && d.V0 == 0.0) throw ConfigError("(V0, N) = (0, 0) is not allowed");
  if (!d.masses.empty() && d.masses.size() != d.centres.size())
    throw ConfigError("masses and centres differ in length");
  for (double m : d.masses)
    if (!(m > 0.0)) throw ConfigError("masses must be positive");
  for (std::size_t i = 0; i < d.centres.size(); ++i)
    for (std::size_t j = i + 1; j < d.centres.size(); ++j)
      if (detail::len(detail::sub(d.centres[i], d.centres[j])) == 0.0)
        throw ConfigError("centres must be pairwise distinct");
  if (d.axis && detail::len(*d.axis) == 0.0) throw ConfigError("axis must be nonzero");
}

/// Polar axis: explicit, else the line of the first two centres, else z.
inline Vec3 resolved_axis(const GHData& d) {
  Vec3 u{0.0, 0.0, 1.0};
  if (d.axis) {
    u = *d.axis;
  } else if (d.centres.size() >= 2) {
    u = detail::sub(d.centres[1], d.centres[0]);
  }
  const double n = detail::len(u);
  return {u[0] / n, u[1] / n, u[2] / n};
}

/// (e1, e2) completing the axis u to a right-handed frame. e1 is the
/// projection of the coordinate axis least aligned with u.
inline std::array<Vec3, 2> axis_frame(const Vec3& u) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(u[static_cast<std::size_t>(i)]) < std::abs(u[static_cast<std::size_t>(k)])) k = i;
  Vec3 e1{};
  e1[static_cast<std::size_t>(k)] = 1.0;
  const double p = detail::dot(e1, u);
  for (int i = 0; i < 3; ++i) e1[static_cast<std::size_t>(i)] -= p * u[static_cast<std::size_t>(i)];
  const double n = detail::len(e1);
  for (double& v : e1) v /= n;
  return {e1, detail::cross3(u, e1)};
}

/// V and the spatial components of A on jet inputs.
struct GHPotential {
  Jet V;
  std::array<Jet, 3> A;
};

inline GHPotential gh_potential(const GHData& d, const Vec3& axis, const JetPoint& p) {
  const auto [e1, e2] = axis_frame(axis);
  GHPotential out{Jet(d.V0), {Jet(0.0), Jet(0.0), Jet(0.0)}};
  for (std::size_t i = 0; i < d.centres.size(); ++i) {
    const Vec3& c = d.centres[i];
    const std::array<Jet, 3> x{p[1] - c[0], p[2] - c[1], p[3] - c[2]};
    const Jet r = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const Jet X = x[0] * e1[0] + x[1] * e1[1] + x[2] * e1[2];
    const Jet Y = x[0] * e2[0] + x[1] * e2[1] + x[2] * e2[2];
    const Jet Z = x[0] * axis[0] + x[1] * axis[1] + x[2] * axis[2];
    const double m = d.mass(i);
    out.V += m / r;
    const Jet f = m * Z / (r * (X * X + Y * Y));
    for (std::size_t j = 0; j < 3; ++j) out.A[j] += f * (X * e2[j] - Y * e1[j]);
  }
  return out;
}

struct GeometryBundle {
  MetricField metric;
  std::array<TensorField, 3> triple;
  TensorField kahler_sd;
  TensorField cky;
  std::array<TensorField, 3> moment_maps;
  TensorField fiber_killing;
  TensorField conformal_factor;
  TensorField potential;
  TensorField connection_form;  // spatial A as a covector on the chart
};

namespace detail {

inline Tensor<Jet> constant_vector(const std::array<double, 4>& v) {
  Tensor<Jet> t(1);
  for (int a = 0; a < kDim; ++a) t(a) = Jet(v[static_cast<std::size_t>(a)]);
  return t;
}

inline Tensor<Jet> scalar_tensor(Jet v) {
  Tensor<Jet> t(0);
  t[0] = std::move(v);
  return t;
}

/// omega_i = theta ^ dx_i - V *3 dx_i with theta = dtau/P + A.
inline std::array<Tensor<Jet>, 3> gh_triple(const GHPotential& pot, double fiber_scale) {
  const std::array<Jet, 4> theta{Jet(1.0 / fiber_scale), pot.A[0], pot.A[1], pot.A[2]};
  std::array<Tensor<Jet>, 3> w;
  for (int i = 0; i < 3; ++i) {
    Tensor<Jet> t(2);
    const int col = i + 1;
    for (int a = 0; a < kDim; ++a) {
      if (a == col) continue;
      t(a, col) = theta[static_cast<std::size_t>(a)];
      t(col, a) = -theta[static_cast<std::size_t>(a)];
    }
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const int e = levi_civita3(i, j, k);
        if (e != 0) t(j + 1, k + 1) -= static_cast<double>(e) * pot.V;
      }
    w[static_cast<std::size_t>(i)] = std::move(t);
  }
  return w;
}

inline Tensor<Jet> gh_metric(const GHPotential& pot, double fiber_scale) {
  const std::array<Jet, 4> theta{Jet(1.0 / fiber_scale), pot.A[0], pot.A[1], pot.A[2]};
  const Jet vinv = 1.0 / pot.V;
  Tensor<Jet> g(2);
  for (int a = 0; a < kDim; ++a)
    for (int b = a; b < kDim; ++b) {
      Jet v = vinv * theta[static_cast<std::size_t>(a)] * theta[static_cast<std::size_t>(b)];
      if (a == b && a > 0) v += pot.V;
      g(b, a) = v;
      g(a, b) = std::move(v);
    }
  return g;
}

inline Jet origin_radius(const JetPoint& p) { return sqrt(p[1] * p[1] + p[2] * p[2] + p[3] * p[3]); }

}  // namespace detail

/// The chart of a GH space, excluding small balls about the centres and
/// the origin, tubes about the lines through each centre along the axis,
/// and points where V <= 0.
inline std::shared_ptr<const Chart> gh_chart(const GHData& d, double exclusion_radius) {
  const double inf = std::numeric_limits<double>::infinity();
  auto chart = std::make_shared<Chart>();
  chart->id = "gibbons_hawking";
  chart->names = {"tau", "x1", "x2", "x3"};
  chart->lo = {-inf, -inf, -inf, -inf};
  chart->hi = {inf, inf, inf, inf};
  const Vec3 u = resolved_axis(d);
  chart->exclusion = [d, u, exclusion_radius](const Coords& x) {
    const Vec3 s{x[1], x[2], x[3]};
    if (detail::len(s) <= exclusion_radius) throw SingularityError("point too close to the origin");
    double V = d.V0;
    for (std::size_t i = 0; i < d.centres.size(); ++i) {
      const Vec3 rel = detail::sub(s, d.centres[i]);
      const double r = detail::len(rel);
      if (r <= exclusion_radius) throw SingularityError("point too close to a centre");
      const double along = detail::dot(rel, u);
      const double perp = std::sqrt(std::max(0.0, r * r - along * along));
      if (perp <= exclusion_radius) throw SingularityError("point too close to a Dirac string");
      V += d.mass(i) / r;
    }
    if (!(V > 0.0)) throw DomainError("V is not positive");
  };
  return chart;
}

/// GH space or, with fiber_scale P != 1, one of its flat pieces in the
/// common chart.
inline GeometryBundle make_gh_bundle(const GHData& d, double exclusion_radius = 0.1, double fiber_scale = 1.0) {
  validate(d);
  const Vec3 axis = resolved_axis(d);
  GeometryBundle b;
  b.metric.chart = gh_chart(d, exclusion_radius);
  b.metric.orientation = kGHOrientation;
  b.metric.tensor = TensorField::closed_form("g", 0, 2, Symmetry::symmetric, [d, axis, fiber_scale](const JetPoint& p) {
    return detail::gh_metric(gh_potential(d, axis, p), fiber_scale);
  });
  for (int i = 0; i < 3; ++i) {
    b.triple[static_cast<std::size_t>(i)] = TensorField::closed_form(
        "omega" + std::to_string(i + 1), 0, 2, Symmetry::antisymmetric,
        [d, axis, fiber_scale, i](const JetPoint& p) {
          return detail::gh_triple(gh_potential(d, axis, p), fiber_scale)[static_cast<std::size_t>(i)];
        });
    b.moment_maps[static_cast<std::size_t>(i)] = TensorField::closed_form(
        "x" + std::to_string(i + 1), 0, 0, Symmetry::none,
        [i](const JetPoint& p) { return detail::scalar_tensor(p[static_cast<std::size_t>(i + 1)]); });
  }
  auto cky = [d, axis, fiber_scale](const JetPoint& p) {
    const auto w = detail::gh_triple(gh_potential(d, axis, p), fiber_scale);
    Tensor<Jet> z = w[0] * p[1];
    z += w[1] * p[2];
    z += w[2] * p[3];
    return z;
  };
  b.cky = TensorField::closed_form("Z+", 0, 2, Symmetry::antisymmetric, cky);
  b.kahler_sd = TensorField::closed_form("kappa+", 0, 2, Symmetry::antisymmetric, [cky](const JetPoint& p) {
    const Jet r = detail::origin_radius(p);
    return cky(p) * (1.0 / (r * r * r));
  });
  b.fiber_killing = TensorField::closed_form("t", 1, 0, Symmetry::none, [fiber_scale](const JetPoint&) {
    return detail::constant_vector({fiber_scale, 0.0, 0.0, 0.0});
  });
  b.conformal_factor = TensorField::closed_form("Omega+", 0, 0, Symmetry::none, [](const JetPoint& p) {
    return detail::scalar_tensor(1.0 / detail::origin_radius(p));
  });
  b.potential = TensorField::closed_form("V", 0, 0, Symmetry::none, [d, axis](const JetPoint& p) {
    return detail::scalar_tensor(gh_potential(d, axis, p).V);
  });
  b.connection_form = TensorField::closed_form("A", 0, 1, Symmetry::none, [d, axis](const JetPoint& p) {
    const auto pot = gh_potential(d, axis, p);
    Tensor<Jet> a(1);
    for (int j = 0; j < 3; ++j) a(j + 1) = pot.A[static_cast<std::size_t>(j)];
    return a;
  });
  return b;
}

// ---------------------------------------------------------------- flat pieces

struct FlatPiece {
  int index = 0;
  GeometryBundle bundle;       // g_I, kappa_I and friends in the common chart
  CoordinateMap cartesian;     // common chart -> Cartesian coordinates of g_I
};

/// Number of flat pieces: the constant piece (if V0 != 0) plus one per centre.
inline int piece_count(const GHData& d) {
  return static_cast<int>(d.centres.size()) + (d.V0 != 0.0 ? 1 : 0);
}

inline void require_collinear(const GHData& d) {
  const Vec3 u = resolved_axis(d);
  for (const auto& c : d.centres) {
    const Vec3 perp = detail::cross3(c, u);
    if (detail::len(perp) > 1e-12 * std::max(1.0, detail::len(c)))
      throw ConfigError("flat pieces need centres on the axis line through the origin");
  }
}

inline FlatPiece flat_piece(const GHData& d, int I, double exclusion_radius = 0.1) {
  validate(d);
  require_collinear(d);
  if (I < 0 || I > static_cast<int>(d.centres.size())) throw ConfigError("flat piece index out of range");
  if (I == 0 && d.V0 == 0.0) throw ConfigError("piece 0 needs V0 != 0");
  const double P = piece_count(d);
  const Vec3 axis = resolved_axis(d);
  GHData piece;
  piece.axis = axis;
  if (I == 0) {
    piece.V0 = d.V0;
  } else {
    piece.V0 = 0.0;
    piece.centres = {d.centres[static_cast<std::size_t>(I - 1)]};
    piece.masses = {d.mass(static_cast<std::size_t>(I - 1))};
  }
  FlatPiece out;
  out.index = I;
  out.bundle = make_gh_bundle(piece, exclusion_radius, P);
  // The piece lives on the chart of the full space.
  out.bundle.metric.chart = gh_chart(d, exclusion_radius);
  if (I == 0) {
    const double s = std::sqrt(d.V0);
    out.cartesian = [P, s](const JetPoint& p) {
      return JetPoint{p[0] / (P * s), s * p[1], s * p[2], s * p[3]};
    };
  } else {
    const Vec3 c = d.centres[static_cast<std::size_t>(I - 1)];
    const double m = d.mass(static_cast<std::size_t>(I - 1));
    const auto [e1, e2] = axis_frame(axis);
    out.cartesian = [P, c, m, axis, e1 = e1, e2 = e2](const JetPoint& p) {
      const std::array<Jet, 3> x{p[1] - c[0], p[2] - c[1], p[3] - c[2]};
      const Jet X = x[0] * e1[0] + x[1] * e1[1] + x[2] * e1[2];
      const Jet Y = x[0] * e2[0] + x[1] * e2[1] + x[2] * e2[2];
      const Jet Z = x[0] * axis[0] + x[1] * axis[1] + x[2] * axis[2];
      const Jet r = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      const Jet phi = atan2(Y, X);
      const Jet tau = p[0] / (P * m);
      const double k = 2.0 * std::sqrt(m);
      const Jet lower = k * sqrt(0.5 * (r - Z));  // 2 sqrt(m r) sin(theta/2)
      const Jet upper = k * sqrt(0.5 * (r + Z));  // 2 sqrt(m r) cos(theta/2)
      const Jet a = 0.5 * (tau - phi);
      const Jet b = 0.5 * (tau + phi);
      return JetPoint{lower * cos(a), upper * cos(b), upper * sin(b), lower * sin(a)};
    };
  }
  return out;
}

// ------------------------------------------------------------------ Taub-NUT

/// Chart (tau, rho, theta, phi) with rho > n and 0 < theta < pi.
inline std::shared_ptr<const Chart> taub_nut_chart(double n) {
  const double inf = std::numeric_limits<double>::infinity();
  auto chart = std::make_shared<Chart>();
  chart->id = "taub_nut";
  chart->names = {"tau", "rho", "theta", "phi"};
  chart->lo = {-inf, n, 0.0, -inf};
  chart->hi = {inf, inf, std::numbers::pi, inf};
  return chart;
}

inline Tensor<Jet> taub_nut_components(double n, const JetPoint& p) {
  const Jet& rho = p[1];
  const Jet c = cos(p[2]);
  const Jet s = sin(p[2]);
  const Jet f = (rho - n) / (rho + n);
  const Jet gtt = 4.0 * n * n * f;
  const Jet area = rho * rho - n * n;
  Tensor<Jet> g(2);
  g(0, 0) = gtt;
  g(0, 3) = gtt * c;
  g(3, 0) = g(0, 3);
  g(1, 1) = 1.0 / f;
  g(2, 2) = area;
  g(3, 3) = gtt * c * c + area * s * s;
  return g;
}

/// 4n^2 (rho-n)/(rho+n) (dtau + cos theta dphi)^2 + (rho+n)/(rho-n) drho^2
/// + (rho^2 - n^2) dOmega^2.
inline MetricField taub_nut_metric(double n) {
  if (!(n > 0.0)) throw ConfigError("NUT charge must be positive");
  MetricField m;
  m.chart = taub_nut_chart(n);
  m.orientation = kGHOrientation;
  m.tensor = TensorField::closed_form("g_TN", 0, 2, Symmetry::symmetric,
                                      [n](const JetPoint& p) { return taub_nut_components(n, p); });
  return m;
}

/// Taub-NUT as the one-centre GH space V = 1 + 2n/r.
inline GHData taub_nut_gh_data(double n) {
  GHData d;
  d.V0 = 1.0;
  d.centres = {{0.0, 0.0, 0.0}};
  d.masses = {2.0 * n};
  d.axis = Vec3{0.0, 0.0, 1.0};
  return d;
}

/// (tau, rho, theta, phi) -> GH chart: tau_GH = 2n tau, r = rho - n.
inline CoordinateMap taub_nut_to_gh(double n) {
  return [n](const JetPoint& p) {
    const Jet r = p[1] - n;
    const Jet s = sin(p[2]);
    return JetPoint{2.0 * n * p[0], r * s * cos(p[3]), r * s * sin(p[3]), r * cos(p[2])};
  };
}

/// GH structures of Taub-NUT carried to the (tau, rho, theta, phi) chart.
inline GeometryBundle taub_nut_bundle(double n) {
  const GeometryBundle gh = make_gh_bundle(taub_nut_gh_data(n));
  const CoordinateMap phi = taub_nut_to_gh(n);
  auto carry = [&phi](const TensorField& f) { return pullback(f, phi, f.name()); };
  GeometryBundle b;
  b.metric = taub_nut_metric(n);
  for (std::size_t i = 0; i < 3; ++i) {
    b.triple[i] = carry(gh.triple[i]);
    b.moment_maps[i] = carry(gh.moment_maps[i]);
  }
  b.kahler_sd = carry(gh.kahler_sd);
  b.cky = carry(gh.cky);
  b.conformal_factor = carry(gh.conformal_factor);
  b.potential = carry(gh.potential);
  b.connection_form = carry(gh.connection_form);
  b.fiber_killing = TensorField::closed_form("t", 1, 0, Symmetry::none, [n](const JetPoint&) {
    return detail::constant_vector({1.0 / (2.0 * n), 0.0, 0.0, 0.0});
  });
  return b;
}

}  // namespace instanton
