#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace instanton {

/// Upper-bound checks pass when every residual is at most the tolerance.
/// Lower-bound checks pass when at least `required_fraction` of the samples
/// reach the tolerance.
enum class Bound { upper, lower };

struct CheckReport {
  std::string check;
  int n_samples = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double min_residual = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::upper;
  double required_fraction = 1.0;
  double fraction = 0.0;  // share of samples on the passing side
  bool pass = false;
  std::string note;
  std::vector<double> residuals;
};

inline CheckReport make_report(std::string name, std::vector<double> residuals, double tolerance,
                               Bound bound = Bound::upper, double required_fraction = 1.0) {
  CheckReport r;
  r.check = std::move(name);
  r.tolerance = tolerance;
  r.bound = bound;
  r.required_fraction = required_fraction;
  r.n_samples = static_cast<int>(residuals.size());
  if (!residuals.empty()) {
    double sum = 0.0;
    int good = 0;
    r.max_residual = residuals.front();
    r.min_residual = residuals.front();
    for (double v : residuals) {
      sum += v;
      r.max_residual = std::max(r.max_residual, v);
      r.min_residual = std::min(r.min_residual, v);
      const bool ok = bound == Bound::upper ? v <= tolerance : v >= tolerance;
      if (ok) ++good;
    }
    r.mean_residual = sum / static_cast<double>(residuals.size());
    r.fraction = static_cast<double>(good) / static_cast<double>(residuals.size());
    // NaN residuals never count as good.
    r.pass = r.fraction >= required_fraction;
  }
  r.residuals = std::move(residuals);
  return r;
}

/// A check that could not run; recorded in-band as a failure.
inline CheckReport failed_report(std::string name, std::string why, double tolerance = 0.0) {
  CheckReport r;
  r.check = std::move(name);
  r.tolerance = tolerance;
  r.note = std::move(why);
  return r;
}

/// A negative control whose expected outcome is an exception.
inline CheckReport expected_error_report(std::string name, bool raised, std::string what) {
  CheckReport r;
  r.check = std::move(name);
  r.pass = raised;
  r.fraction = raised ? 1.0 : 0.0;
  r.note = std::move(what);
  return r;
}

}  // namespace instanton
