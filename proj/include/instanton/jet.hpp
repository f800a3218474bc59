#pragma once

// Truncated multivariate Taylor arithmetic in four variables.
//
// A Jet of order K holds the Taylor coefficients of a smooth function at a
// point for every monomial of total degree <= K. Arithmetic and elementary
// functions propagate the coefficients exactly (up to floating point), so
// derivatives of closed-form expressions come out without truncation error.
// Partial differentiation lowers the order by one, which is how curvature and
// other derived quantities are built from the metric jet.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "instanton/errors.hpp"

namespace instanton {

inline constexpr int kDim = 4;
inline constexpr int kMaxJetOrder = 6;

using MultiIndex = std::array<int, kDim>;

namespace detail {

class MonomialTable {
 public:
  struct Term {
    std::uint16_t lhs;
    std::uint16_t rhs;
    std::uint16_t out;
  };

  static const MonomialTable& instance() {
    static const MonomialTable table;
    return table;
  }

  int size(int order) const { return count_[static_cast<std::size_t>(order)]; }
  const MultiIndex& exponent(int i) const { return exps_[static_cast<std::size_t>(i)]; }
  int degree(int i) const { return degree_[static_cast<std::size_t>(i)]; }

  int index(const MultiIndex& e) const {
    int d = 0;
    for (int v : e) {
      if (v < 0) return -1;
      d += v;
    }
    if (d > kMaxJetOrder) return -1;
    return lookup_[static_cast<std::size_t>(key(e))];
  }

  int shifted(int i, int var) const {
    return shift_[static_cast<std::size_t>(i)][static_cast<std::size_t>(var)];
  }

  std::span<const Term> products(int order) const {
    return {terms_.data(), term_count_[static_cast<std::size_t>(order)]};
  }

 private:
  static constexpr int kBase = kMaxJetOrder + 1;
  static int key(const MultiIndex& e) {
    return ((e[0] * kBase + e[1]) * kBase + e[2]) * kBase + e[3];
  }

  MonomialTable() {
    lookup_.assign(static_cast<std::size_t>(kBase * kBase * kBase * kBase), -1);
    for (int d = 0; d <= kMaxJetOrder; ++d) {
      for (int a = d; a >= 0; --a) {
        for (int b = d - a; b >= 0; --b) {
          for (int c = d - a - b; c >= 0; --c) {
            MultiIndex e{a, b, c, d - a - b - c};
            lookup_[static_cast<std::size_t>(key(e))] = static_cast<int>(exps_.size());
            exps_.push_back(e);
            degree_.push_back(d);
          }
        }
      }
      count_[static_cast<std::size_t>(d)] = static_cast<int>(exps_.size());
    }
    shift_.resize(exps_.size());
    for (std::size_t i = 0; i < exps_.size(); ++i) {
      for (int v = 0; v < kDim; ++v) {
        MultiIndex e = exps_[i];
        ++e[static_cast<std::size_t>(v)];
        shift_[i][static_cast<std::size_t>(v)] = index(e);
      }
    }
    for (std::size_t i = 0; i < exps_.size(); ++i) {
      for (std::size_t j = 0; j < exps_.size(); ++j) {
        if (degree_[i] + degree_[j] > kMaxJetOrder) continue;
        MultiIndex e{};
        for (std::size_t v = 0; v < kDim; ++v) e[v] = exps_[i][v] + exps_[j][v];
        terms_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                          static_cast<std::uint16_t>(index(e))});
      }
    }
    std::stable_sort(terms_.begin(), terms_.end(), [this](const Term& x, const Term& y) {
      return degree_[x.out] < degree_[y.out];
    });
    for (int k = 0; k <= kMaxJetOrder; ++k) {
      term_count_[static_cast<std::size_t>(k)] = static_cast<std::size_t>(
          std::count_if(terms_.begin(), terms_.end(),
                        [&](const Term& t) { return degree_[t.out] <= k; }));
    }
  }

  std::vector<MultiIndex> exps_;
  std::vector<int> degree_;
  std::vector<int> lookup_;
  std::vector<std::array<int, kDim>> shift_;
  std::vector<Term> terms_;
  std::array<int, kMaxJetOrder + 1> count_{};
  std::array<std::size_t, kMaxJetOrder + 1> term_count_{};
};

}  // namespace detail

/// Number of Taylor coefficients carried by a jet of the given order.
inline int jet_size(int order) { return detail::MonomialTable::instance().size(order); }

class Jet {
 public:
  /// Order reported by constants: they never truncate the other operand.
  static constexpr int kConstantOrder = std::numeric_limits<int>::max();

  Jet() : c_{0.0} {}
  Jet(double value) : c_{value} {}  // NOLINT: constants convert implicitly

  /// Coordinate function x^var seeded at `value`.
  static Jet variable(double value, int var, int order) {
    check_order(order);
    Jet j = zero(order);
    j.c_[0] = value;
    if (order >= 1) j.c_[static_cast<std::size_t>(1 + var)] = 1.0;
    return j;
  }

  /// Zero jet carrying the given (finite) order.
  static Jet zero(int order) {
    check_order(order);
    Jet j;
    j.order_ = order;
    j.c_.assign(static_cast<std::size_t>(jet_size(order)), 0.0);
    return j;
  }

  static void check_order(int order) {
    if (order < 0 || order > kMaxJetOrder) {
      throw OrderError("jet order " + std::to_string(order) + " outside [0, " +
                       std::to_string(kMaxJetOrder) + "]");
    }
  }

  bool is_constant() const { return order_ == kConstantOrder; }
  int order() const { return order_; }
  double value() const { return c_[0]; }
  void set_value(double v) { c_[0] = v; }
  std::span<const double> coefficients() const { return c_; }

  /// Partial derivative d^alpha f at the expansion point.
  double partial(const MultiIndex& alpha) const {
    const auto& table = detail::MonomialTable::instance();
    int deg = 0;
    double factorial = 1.0;
    for (int a : alpha) {
      deg += a;
      for (int k = 2; k <= a; ++k) factorial *= k;
    }
    if (!is_constant() && deg > order_) {
      throw OrderError("partial of degree " + std::to_string(deg) + " exceeds jet order " +
                       std::to_string(order_));
    }
    const int idx = table.index(alpha);
    if (idx < 0 || static_cast<std::size_t>(idx) >= c_.size()) return 0.0;
    return c_[static_cast<std::size_t>(idx)] * factorial;
  }

  Jet derivative(int var) const {
    if (is_constant()) return Jet(0.0);
    if (order_ == 0) throw OrderError("cannot differentiate an order-0 jet");
    const auto& table = detail::MonomialTable::instance();
    Jet out = zero(order_ - 1);
    for (int i = 0; i < jet_size(order_ - 1); ++i) {
      const int src = table.shifted(i, var);
      out.c_[static_cast<std::size_t>(i)] =
          (table.exponent(i)[static_cast<std::size_t>(var)] + 1) * c_[static_cast<std::size_t>(src)];
    }
    return out;
  }

  Jet truncated(int order) const {
    if (is_constant() || order >= order_) return *this;
    check_order(order);
    Jet out = *this;
    out.order_ = order;
    out.c_.resize(static_cast<std::size_t>(jet_size(order)));
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (double& v : out.c_) v = -v;
    return out;
  }

  Jet& operator+=(const Jet& o) { return accumulate(o, 1.0); }
  Jet& operator-=(const Jet& o) { return accumulate(o, -1.0); }

  Jet& operator*=(const Jet& o) {
    if (o.is_constant()) {
      for (double& v : c_) v *= o.c_[0];
      return *this;
    }
    if (is_constant()) {
      const double s = c_[0];
      *this = o;
      for (double& v : c_) v *= s;
      return *this;
    }
    const int k = std::min(order_, o.order_);
    std::vector<double> out(static_cast<std::size_t>(jet_size(k)), 0.0);
    for (const auto& t : detail::MonomialTable::instance().products(k)) {
      out[t.out] += c_[t.lhs] * o.c_[t.rhs];
    }
    c_ = std::move(out);
    order_ = k;
    return *this;
  }

  Jet& operator/=(const Jet& o);

  /// f(a) from the Taylor coefficients d[n] = f^(n)(a0)/n! of a univariate f.
  static Jet compose(const Jet& a, std::span<const double> d) {
    if (a.is_constant()) return Jet(d[0]);
    Jet h = a;
    h.c_[0] = 0.0;
    const int k = std::min<int>(a.order_, static_cast<int>(d.size()) - 1);
    Jet r(d[static_cast<std::size_t>(k)]);
    for (int n = k - 1; n >= 0; --n) {
      r *= h;
      r += d[static_cast<std::size_t>(n)];
    }
    if (r.is_constant()) {
      Jet z = Jet::zero(a.order_);
      z += r;
      r = std::move(z);
    }
    return r.truncated(a.order_);
  }

 private:
  Jet& accumulate(const Jet& o, double sign) {
    if (o.is_constant()) {
      c_[0] += sign * o.c_[0];
      return *this;
    }
    if (is_constant()) {
      const double v = c_[0];
      *this = o;
      if (sign < 0) {
        for (double& x : c_) x = -x;
      }
      c_[0] += v;
      return *this;
    }
    if (o.order_ < order_) {
      order_ = o.order_;
      c_.resize(o.c_.size());
    }
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += sign * o.c_[i];
    return *this;
  }

  int order_ = kConstantOrder;
  std::vector<double> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator+(Jet a, double b) { return a += Jet(b); }
inline Jet operator+(double a, Jet b) { return b += Jet(a); }
inline Jet operator-(Jet a, double b) { return a -= Jet(b); }
inline Jet operator-(double a, const Jet& b) { return Jet(a) -= b; }
inline Jet operator*(Jet a, double b) { return a *= Jet(b); }
inline Jet operator*(double a, Jet b) { return b *= Jet(a); }

namespace detail {

inline std::vector<double> power_coefficients(double a0, double p, int order) {
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  d[0] = std::pow(a0, p);
  double binom = 1.0;
  double inv_pow = 1.0;
  for (int n = 1; n <= order; ++n) {
    binom *= (p - (n - 1)) / n;
    inv_pow /= a0;
    d[static_cast<std::size_t>(n)] = binom * d[0] * inv_pow;
  }
  return d;
}

/// Coefficients of f(h)^p for a univariate series f with f[0] != 0.
inline std::vector<double> series_power(std::span<const double> f, double p, int order) {
  std::vector<double> g(static_cast<std::size_t>(order) + 1, 0.0);
  g[0] = std::pow(f[0], p);
  for (int n = 1; n <= order; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n && k < static_cast<int>(f.size()); ++k) {
      acc += (p * k - (n - k)) * f[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(n - k)];
    }
    g[static_cast<std::size_t>(n)] = acc / (n * f[0]);
  }
  return g;
}

inline int effective_order(const Jet& a) { return a.is_constant() ? 0 : a.order(); }

}  // namespace detail

inline Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("reciprocal of a jet with zero value");
  const int k = detail::effective_order(a);
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  double p = 1.0 / a0;
  for (int n = 0; n <= k; ++n) {
    d[static_cast<std::size_t>(n)] = (n % 2 == 0 ? p : -p);
    p /= a0;
  }
  return Jet::compose(a, d);
}

inline Jet& Jet::operator/=(const Jet& o) {
  if (o.is_constant()) {
    if (o.c_[0] == 0.0) throw DomainError("division by zero constant");
    for (double& v : c_) v /= o.c_[0];
    return *this;
  }
  return *this *= reciprocal(o);
}

inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator/(Jet a, double b) { return a /= Jet(b); }
inline Jet operator/(double a, const Jet& b) { return reciprocal(b) *= Jet(a); }

inline Jet pow(const Jet& a, double p) {
  const double a0 = a.value();
  if (a0 <= 0.0 && std::floor(p) != p) throw DomainError("non-integer power of non-positive jet");
  return Jet::compose(a, detail::power_coefficients(a0, p, detail::effective_order(a)));
}

inline Jet sqrt(const Jet& a) {
  if (a.value() <= 0.0) throw DomainError("sqrt of non-positive jet");
  auto d = detail::power_coefficients(a.value(), 0.5, detail::effective_order(a));
  d[0] = std::sqrt(a.value());
  return Jet::compose(a, d);
}

inline Jet cbrt(const Jet& a) {
  if (a.value() == 0.0) throw DomainError("cbrt of jet with zero value");
  if (a.value() < 0.0) return -cbrt(-a);
  auto d = detail::power_coefficients(a.value(), 1.0 / 3.0, detail::effective_order(a));
  const double scale = std::cbrt(a.value()) / d[0];
  for (double& v : d) v *= scale;
  return Jet::compose(a, d);
}

inline Jet exp(const Jet& a) {
  const int k = detail::effective_order(a);
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  double e = std::exp(a.value());
  for (int n = 0; n <= k; ++n) {
    d[static_cast<std::size_t>(n)] = e;
    e /= (n + 1);
  }
  return Jet::compose(a, d);
}

inline Jet log(const Jet& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw DomainError("log of non-positive jet");
  const int k = detail::effective_order(a);
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  d[0] = std::log(a0);
  double p = 1.0;
  for (int n = 1; n <= k; ++n) {
    p /= a0;
    d[static_cast<std::size_t>(n)] = (n % 2 == 1 ? 1.0 : -1.0) * p / n;
  }
  return Jet::compose(a, d);
}

namespace detail {
inline Jet trig(const Jet& a, double phase_quarter_turns) {
  const int k = effective_order(a);
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  double fact = 1.0;
  for (int n = 0; n <= k; ++n) {
    if (n > 0) fact *= n;
    d[static_cast<std::size_t>(n)] =
        std::sin(a.value() + (n + phase_quarter_turns) * std::numbers::pi / 2) / fact;
  }
  return Jet::compose(a, d);
}
}  // namespace detail

inline Jet sin(const Jet& a) { return detail::trig(a, 0.0); }
inline Jet cos(const Jet& a) { return detail::trig(a, 1.0); }

inline Jet atan(const Jet& a) {
  const double a0 = a.value();
  const int k = detail::effective_order(a);
  // d/du atan(u) = 1/(1+u^2); expand 1/(q0 + q1 h + q2 h^2) and integrate.
  const double q0 = 1.0 + a0 * a0;
  const double q1 = 2.0 * a0;
  std::vector<double> r(static_cast<std::size_t>(std::max(k, 1)), 0.0);
  for (int n = 0; n < k; ++n) {
    double acc = (n == 0 ? 1.0 : 0.0);
    if (n >= 1) acc -= q1 * r[static_cast<std::size_t>(n - 1)];
    if (n >= 2) acc -= r[static_cast<std::size_t>(n - 2)];
    r[static_cast<std::size_t>(n)] = acc / q0;
  }
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  d[0] = std::atan(a0);
  for (int n = 1; n <= k; ++n) d[static_cast<std::size_t>(n)] = r[static_cast<std::size_t>(n - 1)] / n;
  return Jet::compose(a, d);
}

inline Jet acos(const Jet& a) {
  const double a0 = a.value();
  if (std::abs(a0) >= 1.0) throw DomainError("acos argument outside (-1, 1)");
  const int k = detail::effective_order(a);
  const std::array<double, 3> s{1.0 - a0 * a0, -2.0 * a0, -1.0};
  const auto g = detail::series_power(s, -0.5, std::max(k - 1, 0));
  std::vector<double> d(static_cast<std::size_t>(k) + 1);
  d[0] = std::acos(a0);
  for (int n = 1; n <= k; ++n) d[static_cast<std::size_t>(n)] = -g[static_cast<std::size_t>(n - 1)] / n;
  return Jet::compose(a, d);
}

inline Jet atan2(const Jet& y, const Jet& x) {
  const double y0 = y.value();
  const double x0 = x.value();
  if (x0 == 0.0 && y0 == 0.0) throw DomainError("atan2 at the origin");
  Jet r = std::abs(x0) >= std::abs(y0) ? atan(y / x) : -atan(x / y);
  r.set_value(std::atan2(y0, x0));
  return r;
}

using JetPoint = std::array<Jet, kDim>;

/// Coordinate jets of the given order at x: each x^a is a seeded variable.
inline JetPoint seed_point(const std::array<double, kDim>& x, int order) {
  JetPoint p;
  for (int a = 0; a < kDim; ++a) p[static_cast<std::size_t>(a)] = Jet::variable(x[static_cast<std::size_t>(a)], a, order);
  return p;
}

}  // namespace instanton
