#pragma once

// Dense tensors over four dimensions, indexed by flat row-major offsets.
// The scalar type is either double (values at a point) or Jet.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "instanton/errors.hpp"
#include "instanton/jet.hpp"

namespace instanton {

using Coords = std::array<double, kDim>;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& j) { return j.value(); }

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(int rank) : rank_(rank), c_(dimension(rank), T(0.0)) {}

  static std::size_t dimension(int rank) {
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) n *= kDim;
    return n;
  }

  int rank() const { return rank_; }
  std::size_t size() const { return c_.size(); }

  T& operator[](std::size_t i) { return c_[i]; }
  const T& operator[](std::size_t i) const { return c_[i]; }

  template <class... I>
  T& operator()(I... idx) {
    return c_[flat(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return c_[flat(idx...)];
  }

  std::vector<T>& data() { return c_; }
  const std::vector<T>& data() const { return c_; }

  template <class... I>
  static std::size_t flat(I... idx) {
    std::size_t f = 0;
    ((f = f * kDim + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  /// Index digits of a flat offset, most significant first.
  std::vector<int> digits(std::size_t f) const {
    std::vector<int> d(static_cast<std::size_t>(rank_));
    for (int s = rank_ - 1; s >= 0; --s) {
      d[static_cast<std::size_t>(s)] = static_cast<int>(f % kDim);
      f /= kDim;
    }
    return d;
  }

  std::size_t stride(int slot) const { return dimension(rank_ - 1 - slot); }

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  template <class S>
  Tensor& operator*=(const S& s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

 private:
  int rank_ = 0;
  std::vector<T> c_;
};

template <class T>
Tensor<T> operator+(Tensor<T> a, const Tensor<T>& b) { return a += b; }
template <class T>
Tensor<T> operator-(Tensor<T> a, const Tensor<T>& b) { return a -= b; }
template <class T, class S>
Tensor<T> operator*(Tensor<T> a, const S& s) { return a *= s; }
template <class T, class S>
Tensor<T> operator*(const S& s, Tensor<T> a) { return a *= s; }

inline Tensor<double> values(const Tensor<Jet>& t) {
  Tensor<double> out(t.rank());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].value();
  return out;
}
inline const Tensor<double>& values(const Tensor<double>& t) { return t; }

inline Tensor<Jet> lift(const Tensor<double>& t) {
  Tensor<Jet> out(t.rank());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = Jet(t[i]);
  return out;
}

inline Tensor<Jet> truncated(const Tensor<Jet>& t, int order) {
  Tensor<Jet> out(t.rank());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].truncated(order);
  return out;
}

/// Lowest jet order among the components.
inline int jet_order(const Tensor<Jet>& t) {
  int k = Jet::kConstantOrder;
  for (const auto& c : t.data()) k = std::min(k, c.order());
  return k;
}

/// Partial derivatives, derivative slot first: out(c, i...) = d_c t(i...).
inline Tensor<Jet> partials(const Tensor<Jet>& t) {
  Tensor<Jet> out(t.rank() + 1);
  for (int c = 0; c < kDim; ++c) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      out[static_cast<std::size_t>(c) * t.size() + i] = t[i].derivative(c);
    }
  }
  return out;
}

/// Applies a 4x4 matrix to one slot: out[..a..] = sum_b m(a, b) t[..b..].
template <class T, class M>
Tensor<T> transform_slot(const Tensor<T>& t, int slot, const Tensor<M>& m) {
  Tensor<T> out(t.rank());
  const std::size_t st = t.stride(slot);
  for (std::size_t f = 0; f < t.size(); ++f) {
    const std::size_t a = (f / st) % kDim;
    const std::size_t base = f - a * st;
    T acc(0.0);
    for (std::size_t b = 0; b < kDim; ++b) acc += m(a, b) * t[base + b * st];
    out[f] = acc;
  }
  return out;
}

template <class T>
Tensor<T> transpose2(const Tensor<T>& t) {
  Tensor<T> out(2);
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) out(a, b) = t(b, a);
  return out;
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> out(2);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      T acc(0.0);
      for (int k = 0; k < kDim; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

template <class T>
Tensor<T> identity2() {
  Tensor<T> out(2);
  for (int a = 0; a < kDim; ++a) out(a, a) = T(1.0);
  return out;
}

/// Inverse and determinant of a 4x4 matrix by Gauss-Jordan elimination,
/// pivoting on the values.
template <class T>
std::pair<Tensor<T>, T> inverse_and_det(const Tensor<T>& m) {
  std::array<std::array<T, 2 * kDim>, kDim> a;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < 2 * kDim; ++j)
      a[i][j] = j < kDim ? m(i, j) : T(i == j - kDim ? 1.0 : 0.0);
  T det(1.0);
  for (int col = 0; col < kDim; ++col) {
    int piv = col;
    for (int r = col + 1; r < kDim; ++r)
      if (std::abs(value_of(a[r][col])) > std::abs(value_of(a[piv][col]))) piv = r;
    if (value_of(a[piv][col]) == 0.0) throw SingularMetricError("singular matrix");
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    const T inv = T(1.0) / a[col][col];
    for (auto& v : a[col]) v *= inv;
    for (int r = 0; r < kDim; ++r) {
      if (r == col) continue;
      const T f = a[r][col];
      if (value_of(f) == 0.0 && std::is_same_v<T, double>) continue;
      for (int j = 0; j < 2 * kDim; ++j) a[r][j] -= f * a[col][j];
    }
  }
  Tensor<T> inv(2);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) inv(i, j) = a[i][j + kDim];
  return {inv, det};
}

/// Sign of the permutation (a, b, c, d) of (0, 1, 2, 3); zero on repeats.
inline int permutation_sign(int a, int b, int c, int d) {
  const std::array<int, 4> p{a, b, c, d};
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (p[i] == p[j]) return 0;
      if (p[i] > p[j]) sign = -sign;
    }
  return sign;
}

inline int levi_civita3(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

/// Largest absolute component.
template <class T>
double max_abs(const Tensor<T>& t) {
  double m = 0.0;
  for (const auto& v : t.data()) m = std::max(m, std::abs(value_of(v)));
  return m;
}

}  // namespace instanton
