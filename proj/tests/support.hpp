#pragma once

#include <random>
#include <vector>

#include "instanton/field.hpp"
#include "instanton/instanton_zoo.hpp"

namespace testing_support {

using namespace instanton;

inline GHData two_centre_ale() {
  GHData d;
  d.V0 = 0.0;
  d.centres = {{0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}};
  return d;
}

inline GHData two_centre_alf() {
  GHData d;
  d.V0 = 1.0;
  d.centres = {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.5}};
  return d;
}

inline GHData three_centre() {
  GHData d;
  d.V0 = 1.0;
  d.centres = {{0.0, 0.0, 1.0}, {1.2, 0.3, -0.5}, {-0.7, 0.9, 0.2}};
  d.axis = Vec3{0.0, 0.0, 1.0};
  return d;
}

/// Uniform points in a box accepted by the chart.
inline std::vector<Coords> points_in(const Chart& chart, const Coords& lo, const Coords& hi, int count,
                                     unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<Coords> out;
  while (static_cast<int>(out.size()) < count) {
    Coords x;
    for (std::size_t a = 0; a < 4; ++a) x[a] = std::uniform_real_distribution<double>(lo[a], hi[a])(rng);
    if (chart.contains(x)) out.push_back(x);
  }
  return out;
}

inline std::vector<Coords> gh_points(const GeometryBundle& b, int count, unsigned seed = 5) {
  return points_in(*b.metric.chart, {-3.0, -2.5, -2.5, -2.5}, {3.0, 2.5, 2.5, 2.5}, count, seed);
}

inline std::vector<Coords> taub_nut_points(double n, int count, unsigned seed = 5) {
  return points_in(*taub_nut_chart(n), {-3.0, n + 0.4, 0.3, -3.0}, {3.0, n + 6.0, 2.8, 3.0}, count, seed);
}

}  // namespace testing_support
