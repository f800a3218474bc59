#pragma once

// Levi-Civita calculus on jets: connection, curvature, covariant and Lie
// derivatives, exterior derivative, Hodge duality and norms.
//
// Layout conventions. Tensors keep contravariant slots first. A derivative
// (partial or covariant) prepends its index: (nabla T)(c, i...) = nabla_c T(i...).
// The volume form is eps_abcd = orientation * sqrt(det g) * [abcd], the Hodge
// star on 2-forms is (*w)_ab = 1/2 eps_ab^cd w_cd, and the 2-form inner
// product is <a, b> = 1/2 a_ab b^ab.

#include <algorithm>
#include <cmath>
#include <vector>

#include "instanton/errors.hpp"
#include "instanton/field.hpp"
#include "instanton/jet.hpp"
#include "instanton/tensor.hpp"

namespace instanton {

enum class Duality { self_dual, anti_self_dual };

/// Metric jets with inverse, checked for positive determinant.
struct MetricJets {
  Tensor<Jet> g;
  Tensor<Jet> ginv;
  Jet det;
  double orientation = 1.0;
};

inline MetricJets metric_jets(const MetricField& metric, const Coords& x, int order) {
  MetricJets m;
  m.g = metric.at(x, order);
  auto [inv, det] = inverse_and_det(m.g);
  if (!(det.value() > 0.0)) throw SingularMetricError("metric determinant is not positive");
  m.ginv = std::move(inv);
  m.det = std::move(det);
  m.orientation = metric.orientation;
  return m;
}

inline MetricJets metric_jets(const Tensor<Jet>& g, double orientation) {
  MetricJets m;
  m.g = g;
  auto [inv, det] = inverse_and_det(g);
  if (!(det.value() > 0.0)) throw SingularMetricError("metric determinant is not positive");
  m.ginv = std::move(inv);
  m.det = std::move(det);
  m.orientation = orientation;
  return m;
}

/// Gamma^a_bc from metric jets; one order lower than g.
inline Tensor<Jet> christoffel(const Tensor<Jet>& g, const Tensor<Jet>& ginv) {
  const Tensor<Jet> dg = partials(g);  // dg(c, a, b) = d_c g_ab
  Tensor<Jet> lower(3);                // Gamma_dbc
  for (int d = 0; d < kDim; ++d)
    for (int b = 0; b < kDim; ++b)
      for (int c = b; c < kDim; ++c) {
        Jet v = 0.5 * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c));
        lower(d, c, b) = v;
        lower(d, b, c) = std::move(v);
      }
  Tensor<Jet> gamma(3);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = b; c < kDim; ++c) {
        Jet acc(0.0);
        for (int d = 0; d < kDim; ++d) acc += ginv(a, d) * lower(d, b, c);
        gamma(a, c, b) = acc;
        gamma(a, b, c) = std::move(acc);
      }
  return gamma;
}

struct Curvature {
  MetricJets metric;
  Tensor<Jet> gamma;     // Gamma^a_bc
  Tensor<Jet> riemann;   // R^a_bcd
  Tensor<Jet> riemann_lower;  // R_abcd
  Tensor<Jet> ricci;     // R_bd = R^a_bad
  Jet scalar;
  Tensor<Jet> weyl;      // C_abcd
};

/// Curvature with `order` derivatives retained (metric evaluated at order + 2).
inline Curvature levi_civita_curvature(const MetricField& metric, const Coords& x, int order = 0) {
  Curvature c;
  c.metric = metric_jets(metric, x, order + 2);
  const auto& g = c.metric.g;
  const auto& ginv = c.metric.ginv;
  c.gamma = christoffel(g, ginv);
  const Tensor<Jet> dgamma = partials(c.gamma);  // dgamma(e, a, b, c) = d_e Gamma^a_bc
  c.riemann = Tensor<Jet>(4);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int d = cc + 1; d < kDim; ++d) {
          Jet v = dgamma(cc, a, d, b) - dgamma(d, a, cc, b);
          for (int e = 0; e < kDim; ++e)
            v += c.gamma(a, cc, e) * c.gamma(e, d, b) - c.gamma(a, d, e) * c.gamma(e, cc, b);
          c.riemann(a, b, d, cc) = -v;
          c.riemann(a, b, cc, d) = std::move(v);
        }
  c.riemann_lower = transform_slot(c.riemann, 0, truncated(g, order));
  c.ricci = Tensor<Jet>(2);
  for (int b = 0; b < kDim; ++b)
    for (int d = 0; d < kDim; ++d) {
      Jet acc(0.0);
      for (int a = 0; a < kDim; ++a) acc += c.riemann(a, b, a, d);
      c.ricci(b, d) = std::move(acc);
    }
  c.scalar = Jet(0.0);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) c.scalar += ginv(a, b) * c.ricci(a, b);
  c.weyl = Tensor<Jet>(4);
  const Tensor<Jet> gt = truncated(g, order);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int d = 0; d < kDim; ++d) {
          Jet v = c.riemann_lower(a, b, cc, d);
          v -= 0.5 * (gt(a, cc) * c.ricci(b, d) - gt(a, d) * c.ricci(b, cc) -
                      gt(b, cc) * c.ricci(a, d) + gt(b, d) * c.ricci(a, cc));
          v += (c.scalar / 6.0) * (gt(a, cc) * gt(b, d) - gt(a, d) * gt(b, cc));
          c.weyl(a, b, cc, d) = std::move(v);
        }
  return c;
}

/// Covariant derivative of a tensor with `up` leading contravariant slots.
inline Tensor<Jet> covariant_derivative(const Tensor<Jet>& t, int up, const Tensor<Jet>& gamma) {
  const int r = t.rank();
  Tensor<Jet> out(r + 1);
  const std::size_t n = t.size();
  for (int c = 0; c < kDim; ++c) {
    for (std::size_t f = 0; f < n; ++f) {
      Jet v = t[f].derivative(c);
      for (int s = 0; s < r; ++s) {
        const std::size_t st = t.stride(s);
        const int is = static_cast<int>((f / st) % kDim);
        const std::size_t base = f - static_cast<std::size_t>(is) * st;
        for (int e = 0; e < kDim; ++e) {
          const Jet& te = t[base + static_cast<std::size_t>(e) * st];
          if (s < up) {
            v += gamma(is, c, e) * te;
          } else {
            v -= gamma(e, c, is) * te;
          }
        }
      }
      out[static_cast<std::size_t>(c) * n + f] = std::move(v);
    }
  }
  return out;
}

/// Exterior derivative of a p-form (all slots covariant, antisymmetric):
/// (dw)_{a0..ap} = sum_k (-1)^k d_{a_k} w_{a0..^a_k..ap}.
inline Tensor<Jet> exterior_derivative(const Tensor<Jet>& w) {
  const int p = w.rank();
  if (p > 3) throw ConfigError("exterior derivative needs p <= 3");
  const Tensor<Jet> dw = partials(w);
  Tensor<Jet> out(p + 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto a = out.digits(f);
    Jet acc(0.0);
    for (int k = 0; k <= p; ++k) {
      std::size_t rest = 0;
      for (int j = 0; j <= p; ++j)
        if (j != k) rest = rest * kDim + static_cast<std::size_t>(a[static_cast<std::size_t>(j)]);
      const Jet& term = dw[static_cast<std::size_t>(a[static_cast<std::size_t>(k)]) * w.size() + rest];
      if (k % 2 == 0) {
        acc += term;
      } else {
        acc -= term;
      }
    }
    out[f] = std::move(acc);
  }
  return out;
}

/// Lie derivative of t (with `up` contravariant slots) along the vector x.
inline Tensor<Jet> lie_derivative(const Tensor<Jet>& x, const Tensor<Jet>& t, int up) {
  const int r = t.rank();
  const Tensor<Jet> dx = partials(x);  // dx(c, a) = d_c x^a
  Tensor<Jet> out(r);
  for (std::size_t f = 0; f < t.size(); ++f) {
    Jet v(0.0);
    for (int c = 0; c < kDim; ++c) v += x[static_cast<std::size_t>(c)] * t[f].derivative(c);
    for (int s = 0; s < r; ++s) {
      const std::size_t st = t.stride(s);
      const int is = static_cast<int>((f / st) % kDim);
      const std::size_t base = f - static_cast<std::size_t>(is) * st;
      for (int c = 0; c < kDim; ++c) {
        const Jet& tc = t[base + static_cast<std::size_t>(c) * st];
        if (s < up) {
          v -= dx(c, is) * tc;
        } else {
          v += dx(is, c) * tc;
        }
      }
    }
    out[f] = std::move(v);
  }
  return out;
}

/// Interior product (x -| w)_{c..} = x^b w_{b c..}.
template <class T>
Tensor<T> interior(const Tensor<T>& x, const Tensor<T>& w) {
  Tensor<T> out(w.rank() - 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    T acc(0.0);
    for (int b = 0; b < kDim; ++b) acc += x[static_cast<std::size_t>(b)] * w[static_cast<std::size_t>(b) * out.size() + f];
    out[f] = acc;
  }
  return out;
}

template <class T>
Tensor<T> raise_all(Tensor<T> t, const Tensor<T>& ginv, int from_slot = 0) {
  for (int s = from_slot; s < t.rank(); ++s) t = transform_slot(t, s, ginv);
  return t;
}

template <class T>
Tensor<T> lower_all(Tensor<T> t, const Tensor<T>& g, int up) {
  for (int s = 0; s < up; ++s) t = transform_slot(t, s, g);
  return t;
}

/// Full metric contraction |t|^2 of a tensor with `up` leading upper slots.
template <class T>
T norm_sq(const Tensor<T>& t, int up, const Tensor<T>& g, const Tensor<T>& ginv) {
  Tensor<T> lo = lower_all(t, g, up);
  Tensor<T> hi = t;
  for (int s = up; s < t.rank(); ++s) hi = transform_slot(hi, s, ginv);
  T acc(0.0);
  for (std::size_t i = 0; i < t.size(); ++i) acc += lo[i] * hi[i];
  return acc;
}

inline double norm(const Tensor<double>& t, int up, const Tensor<double>& g,
                   const Tensor<double>& ginv) {
  return std::sqrt(std::max(0.0, norm_sq(t, up, g, ginv)));
}

/// <a, b> = 1/2 a_ab b^ab for covariant 2-forms.
template <class T>
T form_inner(const Tensor<T>& a, const Tensor<T>& b, const Tensor<T>& ginv) {
  const Tensor<T> bu = raise_all(b, ginv);
  T acc(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * bu[i];
  return 0.5 * acc;
}

template <class T>
T volume_density(const Tensor<T>& g) {
  using std::sqrt;
  return sqrt(inverse_and_det(g).second);
}

/// Hodge star of a covariant 2-form.
template <class T>
Tensor<T> hodge_star_2form(const Tensor<T>& w, const Tensor<T>& g, const Tensor<T>& ginv,
                           double orientation) {
  const T vol = orientation * volume_density(g);
  const Tensor<T> wu = raise_all(w, ginv);
  Tensor<T> out(2);
  for (int a = 0; a < kDim; ++a)
    for (int b = a + 1; b < kDim; ++b) {
      T acc(0.0);
      for (int c = 0; c < kDim; ++c)
        for (int d = c + 1; d < kDim; ++d) {
          const int s = permutation_sign(a, b, c, d);
          if (s != 0) acc += static_cast<double>(s) * wu(c, d);
        }
      acc *= vol;
      out(b, a) = -acc;
      out(a, b) = acc;
    }
  return out;
}

template <class T>
struct DualitySplit {
  Tensor<T> sd_part;
  Tensor<T> asd_part;
};

template <class T>
DualitySplit<T> sd_asd_split(const Tensor<T>& w, const Tensor<T>& g, const Tensor<T>& ginv,
                             double orientation) {
  const Tensor<T> star = hodge_star_2form(w, g, ginv, orientation);
  return {0.5 * (w + star), 0.5 * (w - star)};
}

/// Orthonormal frame e_i^a (rows) by Gram-Schmidt on the coordinate basis.
inline Tensor<double> orthonormal_frame(const Tensor<double>& g) {
  Tensor<double> e(2);
  for (int i = 0; i < kDim; ++i) {
    std::array<double, kDim> v{};
    v[static_cast<std::size_t>(i)] = 1.0;
    for (int j = 0; j < i; ++j) {
      double dot = 0.0;
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) dot += e(j, a) * g(a, b) * v[static_cast<std::size_t>(b)];
      for (int a = 0; a < kDim; ++a) v[static_cast<std::size_t>(a)] -= dot * e(j, a);
    }
    double nn = 0.0;
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b)
        nn += v[static_cast<std::size_t>(a)] * g(a, b) * v[static_cast<std::size_t>(b)];
    if (!(nn > 0.0)) throw SingularMetricError("metric is not positive definite");
    const double s = 1.0 / std::sqrt(nn);
    for (int a = 0; a < kDim; ++a) e(i, a) = v[static_cast<std::size_t>(a)] * s;
  }
  return e;
}

/// Components of a covariant tensor in an orthonormal frame.
inline Tensor<double> frame_components(const Tensor<double>& t, const Tensor<double>& g) {
  const Tensor<double> e = orthonormal_frame(g);
  Tensor<double> out = t;
  for (int s = 0; s < t.rank(); ++s) out = transform_slot(out, s, e);
  return out;
}

/// Largest orthonormal-frame component of a covariant tensor.
inline double frame_max_abs(const Tensor<double>& t, const Tensor<double>& g) {
  return max_abs(frame_components(t, g));
}

/// Full symmetrisation over all slots.
template <class T>
Tensor<T> symmetrize_all(const Tensor<T>& t) {
  const int r = t.rank();
  Tensor<T> out(r);
  std::vector<int> perm(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) perm[static_cast<std::size_t>(i)] = i;
  int count = 0;
  do {
    ++count;
    for (std::size_t f = 0; f < t.size(); ++f) {
      const auto d = t.digits(f);
      std::size_t g = 0;
      for (int i = 0; i < r; ++i) g = g * kDim + static_cast<std::size_t>(d[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      out[f] += t[g];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  out *= 1.0 / count;
  return out;
}

/// Full antisymmetrisation of a rank-3 tensor.
template <class T>
Tensor<T> antisymmetrize3(const Tensor<T>& t) {
  Tensor<T> out(3);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        out(a, b, c) = (t(a, b, c) + t(b, c, a) + t(c, a, b) - t(b, a, c) - t(a, c, b) -
                        t(c, b, a)) /
                       6.0;
  return out;
}

/// Metric jets of order `order + 1` together with the connection at `order`.
struct Connection {
  MetricJets metric;
  Tensor<Jet> gamma;
};

inline Connection connection(const MetricField& metric, const Coords& x, int order) {
  Connection c;
  c.metric = metric_jets(metric, x, order + 1);
  c.gamma = christoffel(c.metric.g, c.metric.ginv);
  return c;
}

/// t_c = -1/3 nabla^b Z_bc for a covariant 2-form Z.
inline Tensor<Jet> cky_vector(const Tensor<Jet>& z, const Tensor<Jet>& ginv, const Tensor<Jet>& gamma) {
  const Tensor<Jet> dz = covariant_derivative(z, 0, gamma);
  Tensor<Jet> t(1);
  for (int c = 0; c < kDim; ++c) {
    Jet acc(0.0);
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) acc += ginv(a, b) * dz(a, b, c);
    t(c) = acc * (-1.0 / 3.0);
  }
  return t;
}

}  // namespace instanton
