#pragma once

// Flat twistor space: incidence, quadrics restricted to twistor lines, the
// conformal factor they generate, and contour integrals on a line.
//
// Spinor conventions: eps_01 = eps^01 = 1, v^A = eps^AB v_B, v_B = v^A eps_AB.
// Twistors are Z = (omega^0, omega^1, pi_0', pi_1').

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <regex>
#include <string>

#include "instanton/errors.hpp"

namespace instanton::twistor {

using cplx = std::complex<double>;
using Spinor = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

inline constexpr cplx kI{0.0, 1.0};

namespace detail {

inline Mat2 eps() {
  Mat2 e;
  e << 0.0, 1.0, -1.0, 0.0;
  return e;
}

/// t^{AB} = eps^{AC} eps^{BD} t_CD
inline Mat2 raise2(const Mat2& t) { return eps() * t * eps().transpose(); }
/// t_AB = t^{CD} eps_CA eps_DB
inline Mat2 lower2(const Mat2& t) { return eps().transpose() * t * eps(); }
/// v_B = v^A eps_AB
inline Spinor lower1(const Spinor& v) { return eps().transpose() * v; }
/// contraction a_A b^A of a lower and an upper spinor
inline cplx contract(const Spinor& lower, const Spinor& upper) { return lower.transpose() * upper; }

inline double chordal(const Spinor& a, const Spinor& b) {
  return std::abs(a(0) * b(1) - a(1) * b(0)) / (a.norm() * b.norm());
}

}  // namespace detail

/// A point (t, x, y, z) of complexified Minkowski space.
struct ComplexPoint {
  std::array<cplx, 4> x{};

  /// x^{AA'}: rows A, columns A'.
  Mat2 matrix() const {
    const double s = std::numbers::sqrt2;
    Mat2 m;
    m << (x[0] + x[3]) / s, (x[1] + kI * x[2]) / s, (x[1] - kI * x[2]) / s, (x[0] - x[3]) / s;
    return m;
  }

  /// x_a x^a = t^2 - x^2 - y^2 - z^2
  cplx norm2() const { return x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]; }
};

/// (t, x, y, z) = (x0, -i x1, -i x2, -i x3), so x_a x^a is the Euclidean
/// square norm.
inline ComplexPoint euclidean_embed(const std::array<double, 4>& e) {
  return {{cplx(e[0]), -kI * e[1], -kI * e[2], -kI * e[3]}};
}

/// omega^A = i x^{AA'} pi_A'
inline Spinor incidence(const ComplexPoint& x, const Spinor& pi) { return kI * (x.matrix() * pi); }

class TwistorQuadric {
 public:
  /// Symmetric, and not of the form A_a A_b.
  explicit TwistorQuadric(const Mat4& q) : q_(q) {
    const double scale = q.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw ConfigError("twistor quadric is zero");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw ConfigError("twistor quadric is not symmetric");
    if (singular_values()(1) <= 1e-12 * singular_values()(0))
      throw ConfigError("twistor quadric is rank one (a double plane)");
  }

  const Mat4& matrix() const { return q_; }
  Eigen::Vector4d singular_values() const { return Eigen::JacobiSVD<Mat4>(q_).singularValues(); }

  /// Blocks in the dictionary that makes the closed-form conformal factor
  /// agree with the root factorisation: a_AB = i Q_ww, c^{A'B'} = i Q_pp,
  /// b_A^{B'} = i Q_(w A)(p B').
  Mat2 a() const { return kI * q_.topLeftCorner<2, 2>(); }
  Mat2 c() const { return kI * q_.bottomRightCorner<2, 2>(); }
  /// b_{AA'} with both indices down.
  Mat2 b() const { return kI * q_.topRightCorner<2, 2>() * detail::eps(); }

  TwistorQuadric scaled(cplx s) const { return TwistorQuadric(q_ * s); }

 private:
  Mat4 q_;
};

/// Z^a Z^b symmetrised: 1/2 (e_a e_b + e_b e_a).
inline Mat4 sym_product(int a, int b) {
  Mat4 m = Mat4::Zero();
  m(a, b) += 0.5;
  m(b, a) += 0.5;
  return m;
}

inline TwistorQuadric elementary_quadric() { return TwistorQuadric(sym_product(0, 1)); }

/// sqrt2 (Z0 Z3 - Z1 Z2): the factor makes Omega+^-1 the Euclidean radius.
inline TwistorQuadric dyon_quadric() {
  return TwistorQuadric(std::numbers::sqrt2 * (sym_product(0, 3) - sym_product(1, 2)));
}

/// Z0 Z1 + (c^2 / 2) Z2 Z3
inline TwistorQuadric two_center_quadric(double c) {
  return TwistorQuadric(sym_product(0, 1) + 0.5 * c * c * sym_product(2, 3));
}

/// "elementary", "dyon" or "two_center(c)".
inline TwistorQuadric builtin_quadric(const std::string& name) {
  if (name == "elementary") return elementary_quadric();
  if (name == "dyon") return dyon_quadric();
  static const std::regex tc(R"(two_center\(\s*([-+0-9.eE]+)\s*\))");
  std::smatch m;
  if (std::regex_match(name, m, tc)) return two_center_quadric(std::stod(m[1].str()));
  throw ConfigError("unknown quadric '" + name + "' (expected elementary, dyon or two_center(c))");
}

/// K^{A'B'} pi_A' pi_B' with chi|_L = -i K pi pi, and its principal spinors
/// K^{A'B'} = alpha^(A' beta^B'), ordered so that -2i / (alpha_A' beta^A')
/// is the principal branch of (det K)^(-1/2).
struct RestrictedQuadric {
  Mat2 K;
  Spinor alpha, beta;  // upper-index principal spinors
  Spinor root_alpha, root_beta;  // lower-index pi with alpha.pi = 0, beta.pi = 0

  cplx alpha_dot_beta() const { return detail::contract(detail::lower1(alpha), beta); }
  cplx evaluate(const Spinor& pi) const { return pi.transpose() * K * pi; }
  Mat2 K_lower() const { return detail::lower2(K); }
};

namespace detail {

/// Upper spinor v with v^A' pi_A' = 0 for the given root.
inline Spinor annihilator(const Spinor& root) { return Spinor(-root(1), root(0)); }

/// Roots of the binary form s^T q s as unit lower spinors.
inline std::array<Spinor, 2> binary_roots(const Mat2& q) {
  const cplx q00 = q(0, 0), q01 = 0.5 * (q(0, 1) + q(1, 0)), q11 = q(1, 1);
  const bool flip = std::abs(q11) < std::abs(q00);
  // p z^2 + 2 q01 z + r with s = (1, z), or s = (z, 1) when flipped.
  const cplx p = flip ? q00 : q11, r = flip ? q11 : q00;
  if (p == cplx(0.0)) return {Spinor(1.0, 0.0), Spinor(0.0, 1.0)};  // pure cross term
  const cplx d = std::sqrt(q01 * q01 - q00 * q11);
  const cplx w = std::abs(-q01 + d) > std::abs(-q01 - d) ? -q01 + d : -q01 - d;
  const cplx z1 = w / p, z2 = std::abs(w) > 0.0 ? r / w : cplx(0.0);
  std::array<Spinor, 2> out = flip ? std::array<Spinor, 2>{Spinor(z1, 1.0), Spinor(z2, 1.0)}
                                   : std::array<Spinor, 2>{Spinor(1.0, z1), Spinor(1.0, z2)};
  for (auto& s : out) s.normalize();
  return out;
}

/// alpha, beta upper with alpha^(A' beta^B') = K and the given roots.
inline std::pair<Spinor, Spinor> principal_spinors(const Mat2& K, const Spinor& ra, const Spinor& rb) {
  const Spinor a = annihilator(ra), b = annihilator(rb);
  // K pi pi = lambda (a.pi)(b.pi); fix lambda where the product is largest.
  const std::array<Spinor, 5> probes{Spinor(1.0, 0.0), Spinor(0.0, 1.0), Spinor(1.0, 1.0), Spinor(1.0, -1.0),
                                     Spinor(1.0, kI)};
  cplx lambda = 0.0;
  double best = -1.0;
  for (const auto& t : probes) {
    const cplx prod = (a.transpose() * t)(0) * (b.transpose() * t)(0);
    if (std::abs(prod) > best) {
      best = std::abs(prod);
      lambda = (t.transpose() * K * t)(0) / prod;
    }
  }
  return {a * lambda, b};
}

}  // namespace detail

/// chi restricted to the twistor line of x. Throws
/// DegenerateRestrictionError when det K vanishes (x on the singular set).
inline RestrictedQuadric restrict_to_line(const TwistorQuadric& q, const ComplexPoint& x, double tol = 1e-12) {
  Eigen::Matrix<cplx, 4, 2> M;
  M.topRows<2>() = kI * x.matrix();
  M.bottomRows<2>() = Mat2::Identity();
  RestrictedQuadric r;
  r.K = kI * (M.transpose() * q.matrix() * M);
  const double scale = r.K.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || std::abs(r.K.determinant()) <= tol * scale * scale)
    throw DegenerateRestrictionError("restricted quadric is degenerate at this point");
  const auto roots = detail::binary_roots(r.K);
  auto [a, b] = detail::principal_spinors(r.K, roots[0], roots[1]);
  r.alpha = a;
  r.beta = b;
  r.root_alpha = roots[0];
  r.root_beta = roots[1];
  const cplx target = 1.0 / std::sqrt(r.K.determinant());
  const cplx mine = -2.0 * kI / r.alpha_dot_beta();
  if (std::abs(mine + target) < std::abs(mine - target)) {
    std::swap(r.alpha, r.beta);
    std::swap(r.root_alpha, r.root_beta);
    // alpha^(A' beta^B') is symmetric, so K is unchanged.
  }
  return r;
}

/// 2 Omega+^-2 from the block form of Q.
inline cplx formula_cf(const TwistorQuadric& q, const ComplexPoint& p) {
  using detail::eps;
  const Mat2 x = p.matrix();
  const Mat2 a = q.a(), b = q.b(), cu = q.c();
  const Mat2 xl = detail::lower2(x), cl = detail::lower2(cu), au = detail::raise2(a), bu = detail::raise2(b);
  const cplx xx = (xl.array() * x.array()).sum();
  const cplx aa = (a.array() * au.array()).sum();
  const cplx cc = (cu.array() * cl.array()).sum();
  const cplx bb = (b.array() * bu.array()).sum();
  const cplx bx = (b.array() * x.array()).sum();
  const Mat2 b_up_low = eps() * b;              // b^B_A'
  const Mat2 b_low_up = b * eps().transpose();  // b_A^B'
  cplx t2 = 0.0, t3 = 0.0, t5 = 0.0;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int P = 0; P < 2; ++P) {
        t2 += a(A, B) * b_up_low(B, P) * x(A, P);
        t5 += b_low_up(A, B) * cl(P, B) * x(A, P);
        for (int R = 0; R < 2; ++R) t3 += a(A, B) * cl(P, R) * x(A, P) * x(B, R);
      }
  return 0.25 * aa * xx * xx + 2.0 * kI * t2 * xx - 2.0 * t3 - 2.0 * (bb * xx - bx * bx) + 4.0 * kI * t5 + cc;
}

struct ConformalFactor {
  cplx omega;           // from the root factorisation, -2i / (alpha . beta)
  cplx omega_formula;   // from the closed form
  double agreement = 0.0;  // relative difference
};

/// Omega+ two ways; throws Error if they differ by more than `gate`.
inline ConformalFactor omega_from_quadric(const TwistorQuadric& q, const ComplexPoint& x, double gate = 1e-10) {
  const RestrictedQuadric r = restrict_to_line(q, x);
  ConformalFactor out;
  out.omega = -2.0 * kI / r.alpha_dot_beta();
  out.omega_formula = 1.0 / std::sqrt(0.5 * formula_cf(q, x));
  out.agreement = std::abs(out.omega - out.omega_formula) / std::abs(out.omega);
  if (!(out.agreement <= gate)) throw Error("conformal factor consistency gate failed: " + std::to_string(out.agreement));
  return out;
}

/// (1/4) sqrt[(|x|^2 - c^2)^2 + 4 c^2 (x1^2 + x2^2)]
inline double two_center_radius(const std::array<double, 4>& x, double c) {
  const double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
  return 0.25 * std::sqrt((s - c * c) * (s - c * c) + 4.0 * c * c * (x[1] * x[1] + x[2] * x[2]));
}

// ------------------------------------------------------------------ contours

struct ContourResult {
  cplx scalar{};  // h = 0
  Mat2 field = Mat2::Zero();  // h = 1, lower indices
  int nodes = 0;
};

/// (2 pi i)^-1 of the integral of f(pi) pi_B' dpi^B' around a circle in
/// the affine coordinate pi = u + z v (u^B' ... normalised so that
/// u_B' v^B' = 1), by trapezoid rule with doubling from 64 nodes.
template <class F>
ContourResult contour_integral(F&& f, const Spinor& u, const Spinor& v, cplx centre, double radius, double tol = 1e-10,
                               int max_nodes = 1 << 16) {
  const cplx measure = detail::contract(u, detail::eps() * v);  // u_B' v^B'
  auto run = [&](int n) {
    ContourResult r;
    r.nodes = n;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      const cplx e = std::polar(1.0, th);
      const cplx z = centre + radius * e;
      const cplx dz = kI * radius * e * (2.0 * std::numbers::pi / n);
      const Spinor pi = u + z * v;
      const auto [s, m] = f(pi);
      r.scalar += s * measure * dz;
      r.field += m * (measure * dz);
    }
    r.scalar /= 2.0 * std::numbers::pi * kI;
    r.field /= 2.0 * std::numbers::pi * kI;
    return r;
  };
  ContourResult prev = run(64);
  for (int n = 128; n <= max_nodes; n *= 2) {
    ContourResult next = run(n);
    const double d = std::max(std::abs(next.scalar - prev.scalar), (next.field - prev.field).cwiseAbs().maxCoeff());
    const double big = std::max({1.0, std::abs(next.scalar), next.field.cwiseAbs().maxCoeff()});
    if (d < tol * big) return next;
    prev = next;
  }
  throw ContourError("contour integral did not converge");
}

/// Penrose transform of 2i (K pi pi)^-1 (h = 0) or 4i (K pi pi)^-2 (h = 1)
/// on the twistor line of x, around the alpha root (or the beta root).
inline ContourResult penrose_contour(const TwistorQuadric& q, const ComplexPoint& x, int h, bool around_alpha = true) {
  if (h != 0 && h != 1) throw ConfigError("helicity must be 0 or 1");
  const RestrictedQuadric r = restrict_to_line(q, x);
  if (detail::chordal(r.root_alpha, r.root_beta) < 1e-6) throw ContourError("roots of the restricted quadric coincide");
  // Affine chart centred on the chosen root: u = root, v its unitary partner.
  const Spinor u = around_alpha ? r.root_alpha : r.root_beta;
  const Spinor other = around_alpha ? r.root_beta : r.root_alpha;
  Spinor v(-std::conj(u(1)), std::conj(u(0)));
  v /= detail::contract(u, detail::eps() * v);  // u_B' v^B' = 1
  // other = s (u + z v)  =>  z = (u ^ other) / (other ^ v)
  const cplx den = other(0) * v(1) - other(1) * v(0);
  const cplx num = u(0) * other(1) - u(1) * other(0);
  // On the Euclidean section the other root is antipodal, at z = infinity.
  const double radius = std::abs(den) > 0.0 ? std::min(1.0, 0.5 * std::abs(num / den)) : 1.0;
  auto f = [&](const Spinor& pi) {
    const cplx k = r.evaluate(pi);
    if (h == 0) return std::pair<cplx, Mat2>{2.0 * kI / k, Mat2::Zero()};
    const Mat2 pp = pi * pi.transpose();
    return std::pair<cplx, Mat2>{0.0, (4.0 * kI / (k * k)) * pp};
  };
  return contour_integral(f, u, v, 0.0, radius);
}

/// Omega+^3 K_{A'B'}: the closed form of the h = 1 transform.
inline Mat2 kahler_spinor(const TwistorQuadric& q, const ComplexPoint& x) {
  const RestrictedQuadric r = restrict_to_line(q, x);
  const cplx om = -2.0 * kI / r.alpha_dot_beta();
  return om * om * om * r.K_lower();
}

// ------------------------------------------------------------ elementary states

struct ElementaryTest {
  bool is_elementary = false;
  std::optional<std::pair<Eigen::Vector4cd, Eigen::Vector4cd>> factors;  // Q = A_(a B_b)
  Eigen::Vector4d singular_values;
};

/// Q = A_(a B_b) with A, B independent iff rank Q = 2.
inline ElementaryTest elementary_state_test(const TwistorQuadric& q, double tol = 1e-10) {
  Eigen::JacobiSVD<Mat4> svd(q.matrix(), Eigen::ComputeFullU);
  ElementaryTest out;
  out.singular_values = svd.singularValues();
  if (out.singular_values(2) > tol * out.singular_values(0)) return out;
  const Eigen::Matrix<cplx, 4, 2> W = svd.matrixU().leftCols<2>();
  const Mat2 small = W.adjoint() * q.matrix() * W.conjugate();
  const auto roots = detail::binary_roots(small);
  auto [l1, l2] = detail::principal_spinors(small, roots[0], roots[1]);
  out.is_elementary = true;
  out.factors = std::pair<Eigen::Vector4cd, Eigen::Vector4cd>{W * l1, W * l2};
  return out;
}

}  // namespace instanton::twistor
