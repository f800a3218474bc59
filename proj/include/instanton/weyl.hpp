#pragma once

// Weyl operator restricted to self-dual or anti-self-dual 2-forms, and a
// closed-form symmetric 3x3 eigensolver.

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numbers>

#include "instanton/geometry.hpp"

namespace instanton {

using Mat3 = std::array<std::array<double, 3>, 3>;

namespace detail {

inline std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline std::array<double, 3> apply(const Mat3& m, const std::array<double, 3>& v) {
  return {dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)};
}

}  // namespace detail

/// Eigenvalues of a symmetric 3x3 matrix, sorted descending.
///
/// The trigonometric formula locates the spectrum; the most isolated
/// eigenvalue is then refined through its eigenvector and the remaining pair
/// comes from the deflated 2x2 block, which keeps near-degenerate pairs
/// accurate.
inline std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  if (p2 == 0.0) return {q, q, q};
  const double p = std::sqrt(p2 / 6.0);
  Mat3 b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                     b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                     b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;

  const double mu = (e1 - e2 >= e2 - e3) ? e1 : e3;
  std::array<std::array<double, 3>, 3> rows;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rows[i][j] = a[i][j] - (i == j ? mu : 0.0);
  std::array<double, 3> v{};
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto c = detail::cross(rows[i], rows[(i + 1) % 3]);
    const double n = detail::dot3(c, c);
    if (n > best) {
      best = n;
      v = c;
    }
  }
  if (best == 0.0) return {e1, e2, e3};
  const double vn = std::sqrt(best);
  for (double& x : v) x /= vn;
  const double mu_refined = detail::dot3(v, detail::apply(a, v));

  std::array<double, 3> u1{};
  const int k = std::abs(v[0]) < 0.6 ? 0 : (std::abs(v[1]) < 0.6 ? 1 : 2);
  std::array<double, 3> ek{};
  ek[static_cast<std::size_t>(k)] = 1.0;
  u1 = detail::cross(v, ek);
  const double u1n = std::sqrt(detail::dot3(u1, u1));
  for (double& x : u1) x /= u1n;
  const auto u2 = detail::cross(v, u1);
  const auto au1 = detail::apply(a, u1);
  const auto au2 = detail::apply(a, u2);
  const double b00 = detail::dot3(u1, au1);
  const double b11 = detail::dot3(u2, au2);
  const double b01 = 0.5 * (detail::dot3(u1, au2) + detail::dot3(u2, au1));
  const double mean = 0.5 * (b00 + b11);
  const double half = 0.5 * (b00 - b11);
  const double rad = std::hypot(half, b01);
  std::array<double, 3> out{mu_refined, mean + rad, mean - rad};
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

struct WeylBlock {
  Mat3 matrix{};
  std::array<double, 3> eigenvalues{};
  double trace = 0.0;
};

/// Orthonormal basis of (anti-)self-dual 2-forms (B_k +- *B_k)/sqrt(2) with
/// B_k = e^0 ^ e^k built from an orthonormal coframe.
inline std::array<Tensor<double>, 3> duality_basis(const Tensor<double>& g, const Tensor<double>& ginv,
                                                   double orientation, Duality duality) {
  const Tensor<double> e = orthonormal_frame(g);
  Tensor<double> coframe(2);  // coframe(i, a) = g_ab e_i^b
  for (int i = 0; i < kDim; ++i)
    for (int a = 0; a < kDim; ++a) {
      double acc = 0.0;
      for (int b = 0; b < kDim; ++b) acc += g(a, b) * e(i, b);
      coframe(i, a) = acc;
    }
  const double sign = duality == Duality::self_dual ? 1.0 : -1.0;
  std::array<Tensor<double>, 3> basis;
  for (int k = 1; k <= 3; ++k) {
    Tensor<double> bk(2);
    for (int a = 0; a < kDim; ++a)
      for (int b = 0; b < kDim; ++b) bk(a, b) = coframe(0, a) * coframe(k, b) - coframe(0, b) * coframe(k, a);
    const Tensor<double> star = hodge_star_2form(bk, g, ginv, orientation);
    basis[static_cast<std::size_t>(k - 1)] = (bk + sign * star) * (1.0 / std::sqrt(2.0));
  }
  return basis;
}

/// W(w)_ab = 1/2 C_ab^cd w_cd.
inline Tensor<double> weyl_apply(const Tensor<double>& weyl, const Tensor<double>& w,
                                 const Tensor<double>& ginv) {
  const Tensor<double> wu = raise_all(w, ginv);
  Tensor<double> out(2);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) {
      double acc = 0.0;
      for (int c = 0; c < kDim; ++c)
        for (int d = 0; d < kDim; ++d) acc += weyl(a, b, c, d) * wu(c, d);
      out(a, b) = 0.5 * acc;
    }
  return out;
}

/// Matrix <S_i, W(S_j)> of the Weyl operator on one duality block.
inline WeylBlock weyl_endomorphism(const Tensor<double>& weyl, const Tensor<double>& g,
                                   const Tensor<double>& ginv, double orientation,
                                   Duality duality) {
  const auto basis = duality_basis(g, ginv, orientation, duality);
  WeylBlock block;
  for (int j = 0; j < 3; ++j) {
    const Tensor<double> ws = weyl_apply(weyl, basis[static_cast<std::size_t>(j)], ginv);
    for (int i = 0; i < 3; ++i) block.matrix[i][j] = form_inner(basis[static_cast<std::size_t>(i)], ws, ginv);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double s = 0.5 * (block.matrix[i][j] + block.matrix[j][i]);
      block.matrix[i][j] = block.matrix[j][i] = s;
    }
  block.trace = block.matrix[0][0] + block.matrix[1][1] + block.matrix[2][2];
  block.eigenvalues = symmetric_eigenvalues(block.matrix);
  return block;
}

inline WeylBlock weyl_endomorphism(const MetricField& metric, const Coords& x, Duality duality) {
  const Curvature c = levi_civita_curvature(metric, x, 0);
  return weyl_endomorphism(values(c.weyl), values(c.metric.g), values(c.metric.ginv),
                           metric.orientation, duality);
}

}  // namespace instanton
