#pragma once

// Charts, tensor fields and metrics.

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "instanton/errors.hpp"
#include "instanton/jet.hpp"
#include "instanton/tensor.hpp"

namespace instanton {

/// A coordinate patch: an open box plus excluded singular sets.
struct Chart {
  std::string id;
  std::array<std::string, kDim> names;
  Coords lo{};
  Coords hi{};
  /// Throws DomainError (or SingularityError) for excluded points.
  std::function<void(const Coords&)> exclusion;

  void check(const Coords& x) const {
    for (int a = 0; a < kDim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (!(x[i] > lo[i] && x[i] < hi[i])) {
        throw DomainError("coordinate " + names[i] + " = " + std::to_string(x[i]) +
                          " outside chart " + id);
      }
    }
    if (exclusion) exclusion(x);
  }

  bool contains(const Coords& x) const {
    try {
      check(x);
      return true;
    } catch (const DomainError&) {
      return false;
    }
  }
};

struct ChartPoint {
  std::string chart_id;
  Coords coords{};
};

enum class Symmetry { none, symmetric, antisymmetric };

/// Tensor field of valence (up, down); up slots come first.
///
/// A field always has a pointwise evaluator. Fields given by closed-form
/// expressions also expose them on jet points, which lets them be composed
/// with coordinate maps.
class TensorField {
 public:
  using Closed = std::function<Tensor<Jet>(const JetPoint&)>;
  using Pointwise = std::function<Tensor<Jet>(const Coords&, int order)>;

  TensorField() = default;

  /// `order_loss` is how many orders the closed form drops on jet inputs
  /// (nonzero for pullbacks, whose Jacobian costs a derivative).
  static TensorField closed_form(std::string name, int up, int down, Symmetry sym, Closed f,
                                 int order_loss = 0) {
    TensorField t(std::move(name), up, down, sym);
    t.closed_ = std::move(f);
    t.order_loss_ = order_loss;
    return t;
  }

  static TensorField pointwise(std::string name, int up, int down, Symmetry sym, Pointwise f) {
    TensorField t(std::move(name), up, down, sym);
    t.pointwise_ = std::move(f);
    return t;
  }

  const std::string& name() const { return name_; }
  int up() const { return up_; }
  int down() const { return down_; }
  int rank() const { return up_ + down_; }
  Symmetry symmetry() const { return sym_; }
  bool has_closed_form() const { return static_cast<bool>(closed_); }
  int order_loss() const { return order_loss_; }

  Tensor<Jet> at(const Coords& x, int order) const {
    Jet::check_order(order);
    if (closed_) {
      Jet::check_order(order + order_loss_);
      return truncated(closed_(seed_point(x, order + order_loss_)), order);
    }
    return pointwise_(x, order);
  }

  Tensor<Jet> on(const JetPoint& p) const {
    if (!closed_) throw ConfigError("field " + name_ + " has no closed form");
    return closed_(p);
  }

  Tensor<double> value(const Coords& x) const { return values(at(x, 0)); }

 private:
  TensorField(std::string name, int up, int down, Symmetry sym)
      : name_(std::move(name)), up_(up), down_(down), sym_(sym) {}

  std::string name_;
  int up_ = 0;
  int down_ = 0;
  Symmetry sym_ = Symmetry::none;
  Closed closed_;
  Pointwise pointwise_;
  int order_loss_ = 0;
};

/// Riemannian metric on a chart with a chosen volume-form sign.
struct MetricField {
  TensorField tensor;
  std::shared_ptr<const Chart> chart;
  double orientation = 1.0;

  Tensor<Jet> at(const Coords& x, int order) const { return tensor.at(x, order); }
};

/// Evaluates a field with its partial derivatives up to `order` after
/// checking the point against the chart.
inline Tensor<Jet> evaluate_jet(const TensorField& f, const Chart& chart, const Coords& x,
                                int order) {
  Jet::check_order(order);
  chart.check(x);
  return f.at(x, order);
}

using CoordinateMap = std::function<JetPoint(const JetPoint&)>;

/// Closed form of the pullback of a covariant closed-form field through
/// y = phi(x). On a jet point of order K the result has order K - 1, since
/// the Jacobian costs one derivative.
inline TensorField::Closed pullback_closed(const TensorField& f, CoordinateMap phi) {
  if (f.up() != 0) throw ConfigError("pullback needs a covariant field");
  if (!f.has_closed_form()) throw ConfigError("pullback needs a closed-form field");
  const int rank = f.down();
  return [f, phi = std::move(phi), rank](const JetPoint& p) {
    const JetPoint y = phi(p);
    Tensor<Jet> t = f.on(y);
    Tensor<Jet> jt(2);  // jt(a, b) = d y^b / d x^a
    for (int b = 0; b < kDim; ++b)
      for (int a = 0; a < kDim; ++a) jt(a, b) = y[static_cast<std::size_t>(b)].derivative(a);
    for (int s = 0; s < rank; ++s) t = transform_slot(t, s, jt);
    return t;
  };
}

inline TensorField pullback(const TensorField& f, CoordinateMap phi, std::string name) {
  return TensorField::closed_form(std::move(name), 0, f.down(), f.symmetry(),
                                  pullback_closed(f, std::move(phi)), f.order_loss() + 1);
}

}  // namespace instanton
