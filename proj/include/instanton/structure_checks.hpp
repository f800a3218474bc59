#pragma once

// Residual checks for Killing, Killing-Yano and conformal Killing-Yano
// tensors and Kahler structures; reconstruction of the anti-self-dual
// conformal Kahler structure of a type-D metric, and the Killing tensor
// built from it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "instanton/check_report.hpp"
#include "instanton/errors.hpp"
#include "instanton/geometry.hpp"
#include "instanton/instanton_zoo.hpp"
#include "instanton/sampling.hpp"
#include "instanton/weyl.hpp"

namespace instanton {

/// Omega_- = kOmegaMinusScale * cbrt(lambda), lambda the repeated eigenvalue
/// of the ASD Weyl operator. Fixed on Taub-NUT by calibrate_omega_scale.
inline constexpr double kOmegaMinusScale = -1.0;
/// Coefficient of the product term in the Killing tensor. Fixed by
/// calibrate_killing_tensor_scale on the two-centre ALE space.
inline constexpr double kKillingTensorScale = 1.0;

inline constexpr double kTypeDPairGap = 1e-6;
inline constexpr double kTypeDSeparation = 1e-3;
inline constexpr double kNullWeyl = 1e-12;

namespace detail {

inline double ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

struct PointMetric {
  Tensor<double> g, ginv;
};

inline PointMetric point_metric(const MetricJets& m) { return {values(m.g), values(m.ginv)}; }

inline double gnorm(const Tensor<double>& t, int up, const PointMetric& m) { return norm(t, up, m.g, m.ginv); }

inline Tensor<double> sym2(const Tensor<double>& t) { return 0.5 * (t + transpose2(t)); }

template <class T>
Tensor<T> antisym2(const Tensor<T>& t) {
  return (t - transpose2(t)) * 0.5;
}

/// S_abc = nabla_(a Y_b)c.
inline Tensor<double> sym_first_pair(const Tensor<double>& t) {
  Tensor<double> out(3);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c) out(a, b, c) = 0.5 * (t(a, b, c) + t(b, a, c));
  return out;
}

inline Tensor<double> raise_vector(const Tensor<double>& v, const Tensor<double>& ginv) {
  return transform_slot(v, 0, ginv);
}

inline double dot_up_down(const Tensor<double>& up, const Tensor<double>& down) {
  double acc = 0.0;
  for (int a = 0; a < kDim; ++a) acc += up(a) * down(a);
  return acc;
}

/// sin of the angle between two covectors.
inline double sine_angle(const Tensor<double>& a, const Tensor<double>& b, const PointMetric& m) {
  const double aa = dot_up_down(raise_vector(a, m.ginv), a);
  const double bb = dot_up_down(raise_vector(b, m.ginv), b);
  const double ab = dot_up_down(raise_vector(a, m.ginv), b);
  if (!(aa > 0.0) || !(bb > 0.0)) return std::numeric_limits<double>::infinity();
  // |a - proj_b a| / |a| keeps full precision at small angles
  const Tensor<double> r = a - b * (ab / bb);
  return std::min(1.0, std::sqrt(std::max(0.0, dot_up_down(raise_vector(r, m.ginv), r)) / aa));
}

template <class F>
CheckReport sample_check(std::string name, const SampleSet& s, double tol, F&& f,
                         Bound bound = Bound::upper, double fraction = 1.0) {
  auto r = parallel_map(s.size(), [&](std::size_t i) { return f(s.points[i]); });
  return make_report(std::move(name), std::move(r), tol, bound, fraction);
}

inline Tensor<Jet> as_covector(const TensorField& x, const Tensor<Jet>& v, const Tensor<Jet>& g) {
  return x.up() == 1 ? transform_slot(v, 0, g) : v;
}

}  // namespace detail

// ----------------------------------------------------------- curvature gates

/// Largest orthonormal-frame Ricci component.
inline CheckReport ricci_residual(const MetricField& metric, const SampleSet& s, double tol = 1e-8) {
  return detail::sample_check("ricci", s, tol, [&](const Coords& x) {
    const Curvature c = levi_civita_curvature(metric, x);
    return frame_max_abs(values(c.ricci), values(c.metric.g));
  });
}

inline CheckReport riemann_residual(const MetricField& metric, const SampleSet& s, double tol = 1e-9) {
  return detail::sample_check("riemann", s, tol, [&](const Coords& x) {
    const Curvature c = levi_civita_curvature(metric, x);
    return frame_max_abs(values(c.riemann_lower), values(c.metric.g));
  });
}

/// Largest |eigenvalue| of one duality block of the Weyl operator.
inline CheckReport weyl_block_residual(const MetricField& metric, const SampleSet& s, Duality duality,
                                       double tol = 1e-8) {
  const std::string name = duality == Duality::self_dual ? "weyl_sd" : "weyl_asd";
  return detail::sample_check(name, s, tol, [&](const Coords& x) {
    const auto e = weyl_endomorphism(metric, x, duality).eigenvalues;
    return std::max(std::abs(e[0]), std::abs(e[2]));
  });
}

// ------------------------------------------------------ Killing-type checks

inline double killing_vector_residual_at(const MetricField& metric, const TensorField& X, const Coords& x) {
  const Connection c = connection(metric, x, 0);
  const auto m = detail::point_metric(c.metric);
  const Tensor<Jet> v = detail::as_covector(X, X.at(x, 1), c.metric.g);
  const Tensor<double> dv = values(covariant_derivative(v, 0, c.gamma));
  return detail::ratio(detail::gnorm(detail::sym2(dv), 0, m), detail::gnorm(values(v), 0, m));
}

/// |nabla_(a X_b)| / |X|.
inline CheckReport residual_killing_vector(const MetricField& metric, const TensorField& X, const SampleSet& s,
                                           double tol = 1e-9) {
  return detail::sample_check("killing_vector:" + X.name(), s, tol,
                              [&](const Coords& x) { return killing_vector_residual_at(metric, X, x); });
}

struct CkyResult {
  CheckReport report;
  std::vector<Tensor<double>> vectors;  // t_c at each sample
};

/// Residual of nabla_a Z_bc = nabla_[a Z_bc] - 2 g_a[b t_c], with
/// t_c = -1/3 nabla^b Z_bc, relative to |Z|.
inline CkyResult residual_cky(const MetricField& metric, const TensorField& Z, const SampleSet& s,
                              double tol = 1e-8) {
  struct Out {
    double residual = 0.0;
    Tensor<double> t;
  };
  auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const Connection c = connection(metric, s.points[i], 0);
    const auto m = detail::point_metric(c.metric);
    const Tensor<Jet> z = Z.at(s.points[i], 1);
    const Tensor<double> dz = values(covariant_derivative(z, 0, c.gamma));
    const Tensor<double> t = values(cky_vector(z, c.metric.ginv, c.gamma));
    Tensor<double> r = dz - antisymmetrize3(dz);
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b)
        for (int cc = 0; cc < kDim; ++cc) r(a, b, cc) += m.g(a, b) * t(cc) - m.g(a, cc) * t(b);
    return Out{detail::ratio(detail::gnorm(r, 0, m), detail::gnorm(values(z), 0, m)), t};
  });
  CkyResult out;
  std::vector<double> res;
  for (auto& r : rows) {
    res.push_back(r.residual);
    out.vectors.push_back(std::move(r.t));
  }
  out.report = make_report("cky:" + Z.name(), std::move(res), tol);
  return out;
}

inline double ky_residual_at(const MetricField& metric, const TensorField& Y, const Coords& x) {
  const Connection c = connection(metric, x, 0);
  const auto m = detail::point_metric(c.metric);
  const Tensor<Jet> y = Y.at(x, 1);
  const Tensor<double> dy = values(covariant_derivative(y, 0, c.gamma));
  return detail::ratio(detail::gnorm(detail::sym_first_pair(dy), 0, m), detail::gnorm(values(y), 0, m));
}

/// |nabla_(a Y_b)c| / |Y|.
inline CheckReport residual_ky(const MetricField& metric, const TensorField& Y, const SampleSet& s,
                               double tol = 1e-8) {
  return detail::sample_check("killing_yano:" + Y.name(), s, tol,
                              [&](const Coords& x) { return ky_residual_at(metric, Y, x); });
}

/// |nabla_(a H_bc)| / |H|.
inline CheckReport residual_killing_tensor(const MetricField& metric, const TensorField& H, const SampleSet& s,
                                           double tol = 1e-7) {
  return detail::sample_check("killing_tensor:" + H.name(), s, tol, [&](const Coords& x) {
    const Connection c = connection(metric, x, 0);
    const auto m = detail::point_metric(c.metric);
    const Tensor<Jet> h = H.at(x, 1);
    const Tensor<double> dh = values(covariant_derivative(h, 0, c.gamma));
    return detail::ratio(detail::gnorm(symmetrize_all(dh), 0, m), detail::gnorm(values(h), 0, m));
  });
}

// ------------------------------------------------------------------ Kahler

struct KahlerReport {
  CheckReport duality;
  CheckReport closed;
  CheckReport almost_complex;
  CheckReport nijenhuis;
  CheckReport kahler;

  std::vector<const CheckReport*> all() const { return {&duality, &closed, &almost_complex, &nijenhuis, &kahler}; }
  bool pass() const {
    for (auto* r : all())
      if (!r->pass) return false;
    return true;
  }
};

namespace detail {

struct KahlerPoint {
  double duality = 0.0, closed = 0.0, almost_complex = 0.0, nijenhuis = 0.0, kahler = 0.0;
};

inline KahlerPoint kahler_point(const MetricField& metric, const TensorField& kappa, const Coords& x,
                                std::optional<Duality> expected) {
  const MetricJets mj = metric_jets(metric, x, 1);
  const PointMetric m = point_metric(mj);
  const Tensor<Jet> k = kappa.at(x, 1);
  const Tensor<double> kv = values(k);
  const double knorm = gnorm(kv, 0, m);
  const Jet kk = form_inner(k, k, mj.ginv);
  const double pf = kv(0, 1) * kv(2, 3) - kv(0, 2) * kv(1, 3) + kv(0, 3) * kv(1, 2);
  const double vol = std::sqrt(inverse_and_det(m.g).second);
  if (!(kk.value() > 0.0) || std::abs(pf) / vol <= 1e-12 * kk.value())
    throw DegenerateFormError("2-form " + kappa.name() + " is degenerate");
  KahlerPoint out;

  const Tensor<double> star = hodge_star_2form(kv, m.g, m.ginv, metric.orientation);
  const double sd = gnorm(star - kv, 0, m), asd = gnorm(star + kv, 0, m);
  if (!expected) {
    out.duality = ratio(std::min(sd, asd), knorm);
  } else {
    out.duality = ratio(*expected == Duality::self_dual ? sd : asd, knorm);
  }
  out.closed = ratio(gnorm(values(exterior_derivative(k)), 0, m), knorm);

  // J^a_b = c g^ac k_cb with c = sqrt(2 / <k, k>).
  const Jet scale = sqrt(2.0 / kk);
  const Tensor<Jet> J = transform_slot(k, 0, mj.ginv) * scale;
  const Tensor<double> Jv = values(J);
  out.almost_complex = gnorm(matmul(Jv, Jv) + identity2<double>(), 1, m) / 2.0;

  const Tensor<double> dJ = values(partials(J));  // dJ(d, a, b) = d_d J^a_b
  std::array<Tensor<double>, 4> terms{Tensor<double>(3), Tensor<double>(3), Tensor<double>(3), Tensor<double>(3)};
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) {
          terms[0](a, b, c) += Jv(d, b) * dJ(d, a, c);
          terms[1](a, b, c) -= Jv(d, c) * dJ(d, a, b);
          terms[2](a, b, c) -= Jv(a, d) * dJ(b, d, c);
          terms[3](a, b, c) += Jv(a, d) * dJ(c, d, b);
        }
  const Tensor<double> N = terms[0] + terms[1] + terms[2] + terms[3];
  double scale_sum = 0.0;
  for (const auto& t : terms) scale_sum += gnorm(t, 1, m);
  out.nijenhuis = ratio(gnorm(N, 1, m), scale_sum);

  // hat g = Omega^2 g with Omega^2 = sqrt(<k, k> / 2).
  const Jet omega2 = sqrt(0.5 * kk);
  const MetricJets hat = metric_jets(mj.g * omega2, metric.orientation);
  const Tensor<Jet> gamma = christoffel(hat.g, hat.ginv);
  const PointMetric hm = point_metric(hat);
  const Tensor<double> dk = values(covariant_derivative(k, 0, gamma));
  out.kahler = ratio(gnorm(dk, 0, hm), gnorm(kv, 0, hm));
  return out;
}

}  // namespace detail

/// Five checks of a conformal Kahler form: duality (against `expected`, or
/// the better of the two), closure, J^2 = -1, Nijenhuis, and parallelism in
/// hat g = Omega^2 g with Omega^2 = sqrt(<k, k> / 2).
inline KahlerReport kahler_verify(const MetricField& metric, const TensorField& kappa, const SampleSet& s,
                                  std::optional<Duality> expected = std::nullopt, double tol = 1e-8) {
  const auto pts = parallel_map(s.size(), [&](std::size_t i) {
    return detail::kahler_point(metric, kappa, s.points[i], expected);
  });
  auto col = [&](double detail::KahlerPoint::*f) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p.*f);
    return v;
  };
  const std::string n = kappa.name();
  KahlerReport r;
  r.duality = make_report("kahler_duality:" + n, col(&detail::KahlerPoint::duality), tol);
  r.closed = make_report("kahler_closed:" + n, col(&detail::KahlerPoint::closed), tol);
  r.almost_complex = make_report("kahler_j_squared:" + n, col(&detail::KahlerPoint::almost_complex), tol);
  r.nijenhuis = make_report("kahler_nijenhuis:" + n, col(&detail::KahlerPoint::nijenhuis), tol);
  r.kahler = make_report("kahler_parallel:" + n, col(&detail::KahlerPoint::kahler), tol);
  return r;
}

// ------------------------------------------------------ type-D reconstruction

namespace detail {

inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

using JetMat6 = std::array<Jet, 36>;

inline JetMat6 mul6(const JetMat6& a, const JetMat6& b) {
  JetMat6 out;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      Jet acc(0.0);
      for (int k = 0; k < 6; ++k) acc += a[static_cast<std::size_t>(i * 6 + k)] * b[static_cast<std::size_t>(k * 6 + j)];
      out[static_cast<std::size_t>(i * 6 + j)] = std::move(acc);
    }
  return out;
}

inline Tensor<Jet> basis_form(int J) {
  Tensor<Jet> e(2);
  const auto [a, b] = kPairs[static_cast<std::size_t>(J)];
  e(a, b) = Jet(1.0);
  e(b, a) = Jet(-1.0);
  return e;
}

inline Tensor<Jet> column_form(const JetMat6& m, int J) {
  Tensor<Jet> w(2);
  for (int I = 0; I < 6; ++I) {
    const auto [a, b] = kPairs[static_cast<std::size_t>(I)];
    w(a, b) = m[static_cast<std::size_t>(I * 6 + J)];
    w(b, a) = -1.0 * w(a, b);
  }
  return w;
}

}  // namespace detail

struct TypeDGaps {
  double pair = 0.0;        // relative split of the repeated pair
  double separation = 0.0;  // relative distance to the simple eigenvalue
  double scale = 0.0;
};

inline TypeDGaps type_d_gaps(const std::array<double, 3>& e) {
  TypeDGaps g;
  g.scale = std::max(std::abs(e[0]), std::abs(e[2]));
  if (g.scale == 0.0) return g;
  const double a = (e[0] - e[1]) / g.scale, b = (e[1] - e[2]) / g.scale;
  g.pair = std::min(a, b);
  g.separation = std::max(a, b);
  return g;
}

inline void require_type_d(const std::array<double, 3>& e) {
  const TypeDGaps g = type_d_gaps(e);
  if (g.scale <= kNullWeyl) throw NullWeylError("ASD Weyl operator vanishes");
  if (!(g.pair <= kTypeDPairGap && g.separation >= kTypeDSeparation))
    throw NotTypeDError("ASD Weyl eigenvalues are not of type D (pair gap " + std::to_string(g.pair) + ")");
}

/// The ASD conformal Kahler structure of a type-D metric at one point, with
/// all fields as jets of order max(order, 1).
struct AsdJets {
  Curvature curvature;
  std::array<double, 3> eigenvalues{};
  Jet lambda;
  Jet omega;
  Tensor<Jet> kappa_unit;  // <k, k> = 2
  Tensor<Jet> kappa_hat;   // Omega^2 kappa_unit
  Tensor<Jet> cky;         // kappa_unit / Omega
};

inline AsdJets asd_structure_jets(const MetricField& metric, const Coords& x, int order,
                                  double omega_scale = kOmegaMinusScale) {
  const int K = std::max(order, 1);
  AsdJets out;
  out.curvature = levi_civita_curvature(metric, x, K);
  const Curvature& c = out.curvature;
  const double o = metric.orientation;
  out.eigenvalues = weyl_endomorphism(values(c.weyl), values(c.metric.g), values(c.metric.ginv), o,
                                      Duality::anti_self_dual)
                        .eigenvalues;
  require_type_d(out.eigenvalues);

  const Tensor<Jet> g = truncated(c.metric.g, K);
  const Tensor<Jet> gi = truncated(c.metric.ginv, K);
  const Tensor<Jet> cu = raise_all(c.weyl, gi, 2);  // C_ab^cd
  detail::JetMat6 R, P;
  for (int J = 0; J < 6; ++J) {
    const auto [cc, d] = detail::kPairs[static_cast<std::size_t>(J)];
    const Tensor<Jet> star = hodge_star_2form(detail::basis_form(J), g, gi, o);
    for (int I = 0; I < 6; ++I) {
      const auto [a, b] = detail::kPairs[static_cast<std::size_t>(I)];
      const auto k = static_cast<std::size_t>(I * 6 + J);
      R[k] = cu(a, b, cc, d);
      P[k] = -0.5 * star(a, b);
      if (I == J) P[k] += 0.5;
    }
  }
  const detail::JetMat6 M = detail::mul6(P, R);
  const detail::JetMat6 M3 = detail::mul6(detail::mul6(M, M), M);
  Jet tr(0.0);
  for (int i = 0; i < 6; ++i) tr += M3[static_cast<std::size_t>(i * 7)];
  out.lambda = cbrt(tr * (-1.0 / 6.0));

  // Projector onto the simple eigenvalue -2 lambda.
  detail::JetMat6 Pk;
  const Jet inv = 1.0 / (3.0 * out.lambda);
  for (std::size_t k = 0; k < 36; ++k) Pk[k] = (out.lambda * P[k] - M[k]) * inv;
  int best = 0;
  double best_overlap = -1.0;
  for (int J = 0; J < 6; ++J) {
    const double ov = form_inner(values(detail::basis_form(J)), values(detail::column_form(Pk, J)), values(gi));
    if (ov > best_overlap) {
      best_overlap = ov;
      best = J;
    }
  }
  const Tensor<Jet> w = detail::column_form(Pk, best);
  const Jet overlap = form_inner(detail::basis_form(best), w, gi);
  out.kappa_unit = w * (std::sqrt(2.0) / sqrt(overlap));
  out.omega = omega_scale * cbrt(out.lambda);
  out.kappa_hat = out.kappa_unit * (out.omega * out.omega);
  out.cky = out.kappa_unit * (1.0 / out.omega);

  // Sign: the CKY vector points along +x^0, or else along its first
  // nonzero component.
  const Tensor<double> xi = detail::raise_vector(values(cky_vector(out.cky, gi, c.gamma)), values(gi));
  const double big = max_abs(xi);
  double lead = 0.0;
  for (int a = 0; a < kDim && lead == 0.0; ++a)
    if (std::abs(xi(a)) > 1e-8 * big) lead = xi(a);
  if (lead < 0.0) {
    out.kappa_unit *= -1.0;
    out.kappa_hat *= -1.0;
    out.cky *= -1.0;
  }
  return out;
}

struct PetrovResult {
  std::vector<std::array<double, 3>> eigenvalues;
  bool is_type_d = false;
  TensorField kahler_asd;
  TensorField conformal_factor;
  TensorField cky_asd;
  CheckReport trace;
  CheckReport pair_gap;
  CheckReport closed;
  CheckReport duality;
};

/// Pointwise fields of the ASD structure (each evaluation recomputes the
/// curvature two orders above the requested jet order).
inline PetrovResult asd_structure_fields(const MetricField& metric, double omega_scale = kOmegaMinusScale) {
  PetrovResult r;
  auto make = [&](std::string name, int rank, Symmetry sym, auto pick) {
    return TensorField::pointwise(std::move(name), 0, rank, sym, [metric, omega_scale, pick](const Coords& x, int order) {
      metric.chart->check(x);
      const AsdJets a = asd_structure_jets(metric, x, order, omega_scale);
      return truncated(pick(a), order);
    });
  };
  r.kahler_asd = make("kappa-", 2, Symmetry::antisymmetric, [](const AsdJets& a) { return a.kappa_hat; });
  r.cky_asd = make("Z-", 2, Symmetry::antisymmetric, [](const AsdJets& a) { return a.cky; });
  r.conformal_factor = make("Omega-", 0, Symmetry::none, [](const AsdJets& a) { return detail::scalar_tensor(a.omega); });
  return r;
}

/// Type-D test at every sample, then the ASD structure with dk = 0 and
/// anti-self-duality checked. Throws NotTypeDError or NullWeylError.
inline PetrovResult petrov_reconstruct(const MetricField& metric, const SampleSet& s, double tol = 1e-8,
                                       double omega_scale = kOmegaMinusScale) {
  struct Row {
    std::array<double, 3> e{};
    double trace = 0.0, gap = 0.0, closed = 0.0, duality = 0.0;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const AsdJets a = asd_structure_jets(metric, s.points[i], 1, omega_scale);
    const auto m = detail::point_metric(a.curvature.metric);
    const Tensor<double> k = values(a.kappa_hat);
    const double kn = detail::gnorm(k, 0, m);
    const Tensor<double> star = hodge_star_2form(k, m.g, m.ginv, metric.orientation);
    Row r;
    r.e = a.eigenvalues;
    const TypeDGaps gaps = type_d_gaps(a.eigenvalues);
    r.trace = std::abs(a.eigenvalues[0] + a.eigenvalues[1] + a.eigenvalues[2]) / gaps.scale;
    r.gap = gaps.pair;
    r.closed = detail::ratio(detail::gnorm(values(exterior_derivative(a.kappa_hat)), 0, m), kn);
    r.duality = detail::ratio(detail::gnorm(star + k, 0, m), kn);
    return r;
  });
  PetrovResult out = asd_structure_fields(metric, omega_scale);
  out.is_type_d = true;
  std::vector<double> tr, gap, cl, du;
  for (const auto& r : rows) {
    out.eigenvalues.push_back(r.e);
    tr.push_back(r.trace);
    gap.push_back(r.gap);
    cl.push_back(r.closed);
    du.push_back(r.duality);
  }
  out.trace = make_report("weyl_asd_trace", std::move(tr), 1e-10);
  out.pair_gap = make_report("type_d_pair_gap", std::move(gap), kTypeDPairGap);
  out.closed = make_report("kappa-_closed", std::move(cl), tol);
  out.duality = make_report("kappa-_anti_self_dual", std::move(du), tol);
  return out;
}

// ------------------------------------------------------------ Killing tensor

/// The Killing vector xi of the ASD CKY form and what is built from it, at
/// one point. H and t have jet order `order`; xi has order + 1.
struct KillingJets {
  AsdJets asd;
  Tensor<Jet> g, ginv;
  Tensor<Jet> xi_lower, xi;
  Tensor<Jet> dxi;   // nabla_a xi_b
  Tensor<Jet> chi;   // SD part of nabla xi
  Tensor<Jet> phi;   // ASD part
  Jet ernst_minus, ernst_plus;
  Tensor<Jet> product;  // symmetrised Z-_a^c chi_cb
  Tensor<Jet> H;
  Tensor<Jet> t_lower, t;
};

inline KillingJets killing_jets(const MetricField& metric, const Coords& x, int order,
                                double scale = kKillingTensorScale, double omega_scale = kOmegaMinusScale) {
  KillingJets k;
  const int K = order + 2;
  k.asd = asd_structure_jets(metric, x, K, omega_scale);
  const Tensor<Jet>& gamma = k.asd.curvature.gamma;
  k.g = truncated(k.asd.curvature.metric.g, K);
  k.ginv = truncated(k.asd.curvature.metric.ginv, K);
  const Tensor<Jet>& Z = k.asd.cky;
  k.xi_lower = cky_vector(Z, k.ginv, gamma);
  k.xi = transform_slot(k.xi_lower, 0, k.ginv);
  k.dxi = covariant_derivative(k.xi_lower, 0, gamma);
  const auto split = sd_asd_split(detail::antisym2(k.dxi), k.g, k.ginv, metric.orientation);
  k.chi = split.sd_part;
  k.phi = split.asd_part;
  k.ernst_minus = -1.0 * k.asd.omega;
  k.ernst_plus = k.asd.omega;
  for (int a = 0; a < kDim; ++a) k.ernst_plus += k.xi(a) * k.xi_lower(a);
  const Tensor<Jet> zu = transform_slot(Z, 1, k.ginv);  // Z_a^c
  k.product = matmul(zu, k.chi);
  k.product = (k.product + transpose2(k.product)) * 0.5;
  k.H = k.product * scale - k.g * (0.5 * k.ernst_plus);
  k.t_lower = Tensor<Jet>(1);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) k.t_lower(a) += k.H(a, b) * k.xi(b);
  k.t = transform_slot(k.t_lower, 0, k.ginv);
  return k;
}

struct KTResult {
  TensorField xi;
  TensorField chi_sd;
  TensorField phi_asd;
  TensorField ernst_minus;
  TensorField ernst_plus;
  TensorField killing_tensor;
  TensorField second_killing;
  std::vector<CheckReport> reports;
  std::vector<double> ernst_plus_samples;
  bool t_vanishes = false;
  std::string note;

  bool pass() const {
    for (const auto& r : reports)
      if (!r.pass) return false;
    return true;
  }
  const CheckReport* find(const std::string& name) const {
    for (const auto& r : reports)
      if (r.check == name) return &r;
    return nullptr;
  }
};

struct KTOptions {
  double tolerance = 1e-7;
  double commutator_tolerance = 1e-8;
  double chi_zero = 1e-8;
  double parallel_tolerance = 1e-6;
  double irreducible_threshold = 0.01;
  double t_vanishes = 1e-8;
  std::optional<TensorField> reference;  // vector expected to be parallel to t
  double scale = kKillingTensorScale;
  double omega_scale = kOmegaMinusScale;
};

inline KTResult killing_tensor_fields(const MetricField& metric, double scale = kKillingTensorScale,
                                      double omega_scale = kOmegaMinusScale) {
  KTResult r;
  auto make = [&](std::string name, int up, int down, Symmetry sym, auto pick) {
    return TensorField::pointwise(std::move(name), up, down, sym,
                                  [metric, scale, omega_scale, pick](const Coords& x, int order) {
                                    metric.chart->check(x);
                                    const KillingJets k = killing_jets(metric, x, order, scale, omega_scale);
                                    return truncated(pick(k), order);
                                  });
  };
  r.xi = make("xi", 1, 0, Symmetry::none, [](const KillingJets& k) { return k.xi; });
  r.chi_sd = make("chi", 0, 2, Symmetry::antisymmetric, [](const KillingJets& k) { return k.chi; });
  r.phi_asd = make("phi", 0, 2, Symmetry::antisymmetric, [](const KillingJets& k) { return k.phi; });
  r.ernst_minus = make("E-", 0, 0, Symmetry::none, [](const KillingJets& k) { return detail::scalar_tensor(k.ernst_minus); });
  r.ernst_plus = make("E+", 0, 0, Symmetry::none, [](const KillingJets& k) { return detail::scalar_tensor(k.ernst_plus); });
  r.killing_tensor = make("H", 0, 2, Symmetry::symmetric, [](const KillingJets& k) { return k.H; });
  r.second_killing = make("t", 1, 0, Symmetry::none, [](const KillingJets& k) { return k.t; });
  return r;
}

/// Least-squares fit of H to constant combinations of g, xi xi, t t and
/// xi (.) t over all samples, in orthonormal-frame components; returns the
/// relative residual.
inline double irreducibility_fit(const std::vector<Tensor<double>>& H, const std::vector<Tensor<double>>& g,
                                 const std::vector<Tensor<double>>& xi, const std::vector<Tensor<double>>& t) {
  const std::size_t n = H.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(16 * n), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(16 * n));
  for (std::size_t s = 0; s < n; ++s) {
    const Tensor<double> e = orthonormal_frame(g[s]);
    auto frame = [&](const Tensor<double>& cov) {
      Tensor<double> out = cov;
      for (int k = 0; k < out.rank(); ++k) out = transform_slot(out, k, e);
      return out;
    };
    const Tensor<double> h = frame(H[s]), x = frame(xi[s]), y = frame(t[s]);
    for (int a = 0; a < kDim; ++a)
      for (int c = 0; c < kDim; ++c) {
        const auto row = static_cast<Eigen::Index>(16 * s + static_cast<std::size_t>(4 * a + c));
        A(row, 0) = a == c ? 1.0 : 0.0;
        A(row, 1) = x(a) * x(c);
        A(row, 2) = y(a) * y(c);
        A(row, 3) = 0.5 * (x(a) * y(c) + x(c) * y(a));
        b(row) = h(a, c);
      }
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
  const double bn = b.norm();
  return bn > 0.0 ? (A * coef - b).norm() / bn : 0.0;
}

/// Irreducibility of a Killing tensor against {g, xi xi, t t, xi (.) t}.
/// `vectors` are covector fields or vector fields (lowered here).
inline CheckReport irreducibility_residual(const MetricField& metric, const TensorField& H,
                                           const std::array<TensorField, 2>& vectors, const SampleSet& s,
                                           double threshold = 0.01) {
  struct Row {
    Tensor<double> g, h, x, y;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const Coords& x = s.points[i];
    const Tensor<Jet> g = metric.at(x, 0);
    auto cov = [&](const TensorField& f) { return values(detail::as_covector(f, f.at(x, 0), g)); };
    return Row{values(g), H.value(x), cov(vectors[0]), cov(vectors[1])};
  });
  std::vector<Tensor<double>> hs, gs, xs, ys;
  for (const auto& r : rows) {
    gs.push_back(r.g);
    hs.push_back(r.h);
    xs.push_back(r.x);
    ys.push_back(r.y);
  }
  const double res = irreducibility_fit(hs, gs, xs, ys);
  CheckReport r = make_report("irreducibility:" + H.name(), {res}, threshold, Bound::lower);
  r.n_samples = static_cast<int>(s.size());
  return r;
}

namespace detail {

struct KTPoint {
  double chi_ratio = 0.0, xi_killing = 0.0, kt = 0.0, t_killing = 0.0, t_asd = 0.0, commutator = 0.0;
  double ernst_minus = 0.0, ernst_plus = 0.0, trace = 0.0, parallel = 0.0, e_plus = 0.0, t_norm = 0.0;
  Tensor<double> g, H, xi, t;
};

inline KTPoint kt_point(const MetricField& metric, const Coords& x, const KTOptions& opt) {
  const KillingJets k = killing_jets(metric, x, 1, opt.scale, opt.omega_scale);
  const Tensor<Jet>& gamma = k.asd.curvature.gamma;
  const PointMetric m{values(k.g), values(k.ginv)};
  KTPoint p;
  const Tensor<double> dxi = values(k.dxi);
  const Tensor<double> xi = values(k.xi), xil = values(k.xi_lower);
  p.chi_ratio = ratio(gnorm(values(k.chi), 0, m), gnorm(dxi, 0, m));
  p.xi_killing = ratio(gnorm(sym2(dxi), 0, m), gnorm(xil, 0, m));
  p.e_plus = k.ernst_plus.value();

  const Tensor<double> H = values(k.H);
  const Tensor<double> dH = values(covariant_derivative(k.H, 0, gamma));
  p.kt = ratio(gnorm(symmetrize_all(dH), 0, m), gnorm(H, 0, m));

  // t = H . xi can vanish identically (equal masses), so its residuals are
  // measured against the size of the terms of nabla(H . xi).
  const Tensor<double> tl = values(k.t_lower), tu = values(k.t);
  const Tensor<double> dt = values(covariant_derivative(k.t_lower, 0, gamma));
  const double xin = gnorm(xil, 0, m);
  const double t_scale = gnorm(H, 0, m) * gnorm(dxi, 0, m) + gnorm(dH, 0, m) * xin;
  p.t_norm = ratio(gnorm(tl, 0, m), gnorm(H, 0, m) * xin);
  p.t_killing = ratio(gnorm(sym2(dt), 0, m), t_scale);
  const auto split = sd_asd_split(antisym2(dt), m.g, m.ginv, metric.orientation);
  p.t_asd = ratio(gnorm(split.sd_part, 0, m), t_scale);

  // [t, xi]^a = t^b nabla_b xi^a - xi^b nabla_b t^a
  Tensor<double> c1(1), c2(1);
  const Tensor<double> dxi_up = transform_slot(dxi, 1, m.ginv), dt_up = transform_slot(dt, 1, m.ginv);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) {
      c1(a) += tu(b) * dxi_up(b, a);
      c2(a) += xi(b) * dt_up(b, a);
    }
  p.commutator = ratio(gnorm(c1 - c2, 1, m), gnorm(c1, 1, m) + xin * t_scale);

  // Z-_ab xi^b = -1/2 d(E-^-2) and chi_ab xi^b = +1/2 dE+.
  const Tensor<double> Z = values(k.asd.cky), chi = values(k.chi);
  const Jet em2 = 1.0 / (k.ernst_minus * k.ernst_minus);
  Tensor<double> zx(1), hx(1), dm(1), dp(1);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      zx(a) += Z(a, b) * xi(b);
      hx(a) += chi(a, b) * xi(b);
    }
    dm(a) = -0.5 * em2.derivative(a).value();
    dp(a) = 0.5 * k.ernst_plus.derivative(a).value();
  }
  p.ernst_minus = ratio(gnorm(zx - dm, 0, m), gnorm(zx, 0, m) + gnorm(dm, 0, m));
  p.ernst_plus = ratio(gnorm(hx - dp, 0, m), gnorm(hx, 0, m) + gnorm(dp, 0, m));

  double trace = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) trace += m.ginv(a, b) * H(a, b);
  p.trace = ratio(std::abs(trace + 2.0 * p.e_plus), gnorm(H, 0, m));

  if (opt.reference) {
    const Tensor<double> ref = values(as_covector(*opt.reference, opt.reference->at(x, 0), truncated(k.g, 0)));
    p.parallel = std::asin(std::min(1.0, sine_angle(tl, ref, m)));
  }
  p.g = m.g;
  p.H = H;
  p.xi = xil;
  p.t = tl;
  return p;
}

}  // namespace detail

/// Killing tensor H = s sym(Z-_a^c chi_cb) - 1/2 E+ g and t = H . xi, with
/// their identities checked at every sample. Throws ChiZeroError when the
/// SD part of nabla xi vanishes.
inline KTResult killing_tensor_pipeline(const MetricField& metric, const SampleSet& s, const KTOptions& opt = {}) {
  const auto pts = parallel_map(s.size(), [&](std::size_t i) { return detail::kt_point(metric, s.points[i], opt); });
  double chi_max = 0.0;
  for (const auto& p : pts) chi_max = std::max(chi_max, p.chi_ratio);
  if (chi_max <= opt.chi_zero) {
    throw ChiZeroError("SD part of nabla xi vanishes (max ratio " + std::to_string(chi_max) + "), E+ = " +
                       std::to_string(pts.empty() ? 0.0 : pts.front().e_plus));
  }
  KTResult r = killing_tensor_fields(metric, opt.scale, opt.omega_scale);
  auto col = [&](double detail::KTPoint::*f) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p.*f);
    return v;
  };
  const double tol = opt.tolerance;
  r.reports.push_back(make_report("xi_killing", col(&detail::KTPoint::xi_killing), tol));
  r.reports.push_back(make_report("killing_tensor", col(&detail::KTPoint::kt), tol));
  r.reports.push_back(make_report("t_killing", col(&detail::KTPoint::t_killing), tol));
  r.reports.push_back(make_report("t_sd_part", col(&detail::KTPoint::t_asd), tol));
  r.reports.push_back(make_report("commutator_t_xi", col(&detail::KTPoint::commutator), opt.commutator_tolerance));
  r.reports.push_back(make_report("ernst_minus_gradient", col(&detail::KTPoint::ernst_minus), tol));
  r.reports.push_back(make_report("ernst_plus_gradient", col(&detail::KTPoint::ernst_plus), tol));
  r.reports.push_back(make_report("killing_tensor_trace", col(&detail::KTPoint::trace), 1e-8));
  // The direction of t is only defined where t is nonzero.
  if (opt.reference) {
    std::vector<double> angles;
    for (const auto& p : pts)
      if (p.t_norm > opt.t_vanishes) angles.push_back(p.parallel);
    if (!angles.empty()) {
      r.reports.push_back(make_report("t_parallel_reference", std::move(angles), opt.parallel_tolerance));
    }
  }
  double t_max = 0.0;
  for (const auto& p : pts) t_max = std::max(t_max, p.t_norm);
  r.t_vanishes = t_max <= opt.t_vanishes;
  if (r.t_vanishes) r.note = "t = H.xi vanishes identically (max |t|/(|H||xi|) = " + std::to_string(t_max) + ")";
  std::vector<Tensor<double>> hs, gs, xs, ts;
  for (const auto& p : pts) {
    gs.push_back(p.g);
    hs.push_back(p.H);
    xs.push_back(p.xi);
    ts.push_back(p.t);
  }
  CheckReport irr = make_report("irreducibility", {irreducibility_fit(hs, gs, xs, ts)},
                                opt.irreducible_threshold, Bound::lower);
  irr.n_samples = static_cast<int>(pts.size());
  r.reports.push_back(std::move(irr));
  r.ernst_plus_samples = col(&detail::KTPoint::e_plus);
  return r;
}

/// Per-sample data of the Killing vector xi without building H: the SD
/// share of nabla xi, and E+.
struct KillingVectorSurvey {
  std::vector<double> chi_ratio;
  std::vector<double> ernst_plus;
  std::vector<Tensor<double>> xi;  // vector components
};

inline KillingVectorSurvey killing_vector_survey(const MetricField& metric, const SampleSet& s,
                                                 double omega_scale = kOmegaMinusScale) {
  struct Row {
    double chi = 0.0, e = 0.0;
    Tensor<double> xi;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const AsdJets a = asd_structure_jets(metric, s.points[i], 2, omega_scale);
    const Tensor<Jet> gi = truncated(a.curvature.metric.ginv, 2);
    const Tensor<Jet> g = truncated(a.curvature.metric.g, 2);
    const Tensor<Jet> xl = cky_vector(a.cky, gi, a.curvature.gamma);
    const Tensor<double> dxi = values(covariant_derivative(xl, 0, a.curvature.gamma));
    const detail::PointMetric m{values(g), values(gi)};
    const auto split = sd_asd_split(detail::antisym2(dxi), m.g, m.ginv, metric.orientation);
    Row r;
    r.chi = detail::ratio(detail::gnorm(split.sd_part, 0, m), detail::gnorm(dxi, 0, m));
    r.xi = detail::raise_vector(values(xl), m.ginv);
    r.e = a.omega.value() + detail::dot_up_down(r.xi, values(xl));
    return r;
  });
  KillingVectorSurvey out;
  for (const auto& r : rows) {
    out.chi_ratio.push_back(r.chi);
    out.ernst_plus.push_back(r.e);
    out.xi.push_back(r.xi);
  }
  return out;
}

// -------------------------------------------------------------- calibration

/// Omega_- scale from constancy of E+ = Omega_- + |xi|^2 on Taub-NUT.
/// With Omega_- = c Omega_1 the CKY vector scales as 1/c, so
/// c^3 = -delta|xi_1|^2 / delta Omega_1 between two radii.
inline double calibrate_omega_scale(double n = 1.0) {
  const MetricField tn = taub_nut_metric(n);
  auto probe = [&](double rho) {
    const AsdJets a = asd_structure_jets(tn, {0.0, rho, 1.1, 0.2}, 1, 1.0);
    const Tensor<Jet> gi = truncated(a.curvature.metric.ginv, 1);
    const Tensor<double> xl = values(cky_vector(a.cky, gi, a.curvature.gamma));
    const Tensor<double> xu = detail::raise_vector(xl, values(gi));
    return std::pair{a.omega.value(), detail::dot_up_down(xu, xl)};
  };
  const auto [o1, x1] = probe(3.0 * n);
  const auto [o2, x2] = probe(7.0 * n);
  const double c3 = -(x2 - x1) / (o2 - o1);
  if (!std::isfinite(c3) || c3 == 0.0) throw CalibrationError("Omega_- calibration is singular");
  return std::cbrt(c3);
}

struct ScaleFit {
  double scale = 0.0;
  double spread = 0.0;  // max relative deviation of per-sample fits
};

/// The product coefficient s for which H = s P - 1/2 E+ g is Killing, fitted
/// per sample; throws CalibrationError if the samples disagree.
inline ScaleFit calibrate_killing_tensor_scale(const MetricField& metric, const SampleSet& s,
                                               double omega_scale = kOmegaMinusScale, double tol = 1e-6) {
  const auto fits = parallel_map(s.size(), [&](std::size_t i) {
    const KillingJets k = killing_jets(metric, s.points[i], 1, 1.0, omega_scale);
    const Tensor<Jet>& gamma = k.asd.curvature.gamma;
    const Tensor<double> A = symmetrize_all(values(covariant_derivative(k.product, 0, gamma)));
    const Tensor<double> B = symmetrize_all(values(covariant_derivative(k.g * (0.5 * k.ernst_plus), 0, gamma)));
    double ab = 0.0, aa = 0.0;
    for (std::size_t j = 0; j < A.size(); ++j) {
      ab += A[j] * B[j];
      aa += A[j] * A[j];
    }
    return ab / aa;
  });
  ScaleFit f;
  if (fits.empty()) throw CalibrationError("no samples");
  f.scale = fits.front();
  for (double v : fits) f.spread = std::max(f.spread, std::abs(v - f.scale) / std::abs(f.scale));
  if (!std::isfinite(f.scale) || f.spread > tol)
    throw CalibrationError("Killing tensor scale differs between samples (spread " + std::to_string(f.spread) + ")");
  return f;
}

// ------------------------------------------------------------- Killing-Yano

struct KYCandidate {
  TensorField Y;
  double scale = 0.0;  // Y = Z+ - scale Z-
};

/// Y = Z+ - s Z- with s matching the CKY vectors of the two forms.
inline KYCandidate ky_candidate(const GeometryBundle& bundle, const TensorField& zminus, const SampleSet& s,
                                double tol = 1e-6) {
  struct Row {
    double sine = 0.0, scale = 0.0, minus_norm = 0.0, plus_norm = 0.0;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const Connection c = connection(bundle.metric, s.points[i], 0);
    const auto m = detail::point_metric(c.metric);
    const Tensor<double> tp = values(cky_vector(bundle.cky.at(s.points[i], 1), c.metric.ginv, c.gamma));
    const Tensor<double> tm = values(cky_vector(zminus.at(s.points[i], 1), c.metric.ginv, c.gamma));
    Row r;
    r.plus_norm = detail::gnorm(tp, 0, m);
    r.minus_norm = detail::gnorm(tm, 0, m);
    if (r.minus_norm > 0.0 && r.plus_norm > 0.0) {
      r.sine = detail::sine_angle(tp, tm, m);
      r.scale = detail::dot_up_down(detail::raise_vector(tp, m.ginv), tm) / (r.minus_norm * r.minus_norm);
    }
    return r;
  });
  if (rows.empty()) throw ConfigError("ky_candidate needs samples");
  for (const auto& r : rows)
    if (!(r.minus_norm > 1e-12 * std::max(1.0, r.plus_norm)))
      throw DegenerateFormError("ASD form has no CKY vector (zero or parallel input)");
  KYCandidate out;
  out.scale = rows.front().scale;
  for (const auto& r : rows) {
    if (r.sine > tol) throw MismatchError("CKY vectors are not parallel (sin angle " + std::to_string(r.sine) + ")");
    if (std::abs(r.scale - out.scale) > tol * std::abs(out.scale))
      throw MismatchError("CKY vector ratio is not constant");
  }
  const TensorField zp = bundle.cky;
  const double sc = out.scale;
  out.Y = TensorField::pointwise("Y", 0, 2, Symmetry::antisymmetric, [zp, zminus, sc](const Coords& x, int order) {
    return zp.at(x, order) - zminus.at(x, order) * sc;
  });
  return out;
}

struct ScaleScan {
  double best_scale = 0.0;
  double best_residual = 0.0;
};

/// min over s of the mean KY residual of Z+ - s Z- (log scan, then golden
/// section about the best grid point).
inline ScaleScan ky_min_over_scale(const MetricField& metric, const TensorField& zplus, const TensorField& zminus,
                                   const SampleSet& s) {
  struct Row {
    detail::PointMetric m;
    Tensor<double> zp, zm, dp, dm;
  };
  const auto rows = parallel_map(s.size(), [&](std::size_t i) {
    const Connection c = connection(metric, s.points[i], 0);
    const Tensor<Jet> p = zplus.at(s.points[i], 1), q = zminus.at(s.points[i], 1);
    return Row{detail::point_metric(c.metric), values(p), values(q), values(covariant_derivative(p, 0, c.gamma)),
               values(covariant_derivative(q, 0, c.gamma))};
  });
  auto f = [&](double sc) {
    double acc = 0.0;
    for (const auto& r : rows) {
      const Tensor<double> y = r.zp - r.zm * sc;
      const Tensor<double> dy = r.dp - r.dm * sc;
      acc += detail::ratio(detail::gnorm(detail::sym_first_pair(dy), 0, r.m), detail::gnorm(y, 0, r.m));
    }
    return acc / static_cast<double>(rows.size());
  };
  std::vector<double> grid{0.0};
  for (int k = -40; k <= 40; ++k) {
    const double v = std::pow(10.0, k / 10.0);
    grid.push_back(v);
    grid.push_back(-v);
  }
  std::sort(grid.begin(), grid.end());
  std::size_t best = 0;
  std::vector<double> fv;
  for (double g : grid) fv.push_back(f(g));
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (fv[i] < fv[best]) best = i;
  double lo = grid[best > 0 ? best - 1 : best], hi = grid[best + 1 < grid.size() ? best + 1 : best];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = f(a), fb = f(b);
  for (int it = 0; it < 80; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = f(b);
    }
  }
  ScaleScan out{grid[best], fv[best]};
  if (fa < out.best_residual) out = {a, fa};
  if (fb < out.best_residual) out = {b, fb};
  return out;
}

// ---------------------------------------------------- Hodge incompatibility

/// min over signs of |*_g k -+ k| / |k| in orthonormal-frame max norm.
inline CheckReport hodge_incompatibility(const MetricField& piece_metric, const TensorField& kappa,
                                         const SampleSet& s, double threshold = 0.05, double fraction = 0.95) {
  return detail::sample_check(
      "hodge_incompatibility:" + kappa.name(), s, threshold,
      [&](const Coords& x) {
        const Tensor<double> g = piece_metric.tensor.value(x);
        const Tensor<double> gi = inverse_and_det(g).first;
        const Tensor<double> k = kappa.value(x);
        const Tensor<double> st = hodge_star_2form(k, g, gi, piece_metric.orientation);
        const double kn = frame_max_abs(k, g);
        return detail::ratio(std::min(frame_max_abs(st - k, g), frame_max_abs(st + k, g)), kn);
      },
      Bound::lower, fraction);
}

}  // namespace instanton
