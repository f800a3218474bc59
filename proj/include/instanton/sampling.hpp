#pragma once

// Deterministic sample sets and an order-preserving parallel map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "instanton/errors.hpp"
#include "instanton/field.hpp"

namespace instanton {

struct ExclusionPolicy {
  std::string chart_id;
  double exclusion_radius = 0.1;
  Coords box_lo{};
  Coords box_hi{};
  long long drawn = 0;  // Halton indices consumed to accept `count` points
};

struct SampleSet {
  std::vector<Coords> points;
  std::uint64_t seed = 0;
  ExclusionPolicy policy;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, out = 0.0;
  while (i > 0) {
    out += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return out;
}

}  // namespace detail

/// Halton points (bases 2, 3, 5, 7) with a seed-dependent Cranley-Patterson
/// shift, kept if the chart accepts them. Gives up after 100x oversampling.
inline SampleSet halton_samples(const Chart& chart, const Coords& lo, const Coords& hi, int count,
                                std::uint64_t seed, double exclusion_radius = 0.1) {
  if (count < 1) throw ConfigError("sample count must be at least 1");
  constexpr unsigned bases[kDim] = {2, 3, 5, 7};
  std::uint64_t state = seed;
  std::array<double, kDim> shift{};
  for (auto& s : shift) s = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
  SampleSet set;
  set.seed = seed;
  set.policy = {chart.id, exclusion_radius, lo, hi, 0};
  const long long cap = 100LL * count;
  long long i = 0;
  while (static_cast<int>(set.points.size()) < count) {
    if (i >= cap) throw ConfigError("sampling box rejected too many points in chart " + chart.id);
    ++i;
    Coords x;
    for (std::size_t a = 0; a < kDim; ++a) {
      double u = detail::radical_inverse(static_cast<std::uint64_t>(i), bases[a]) + shift[a];
      u -= std::floor(u);
      x[a] = lo[a] + u * (hi[a] - lo[a]);
    }
    if (chart.contains(x)) set.points.push_back(x);
  }
  set.policy.drawn = i;
  return set;
}

/// Worker count: INSTANTON_VERIFY_THREADS if set, else the hardware count.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("INSTANTON_VERIFY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

/// out[i] = f(i). Results land by index, so the output never depends on
/// scheduling. The lowest-index exception is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1)));
  auto run = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace instanton
