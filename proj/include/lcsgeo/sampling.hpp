#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcsgeo/manifold.hpp"

namespace lcsgeo {

/// Deterministic 64-bit generator (SplitMix64). Used instead of the standard
/// distributions so that point sets are bit-identical across platforms.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
  std::uint64_t state_;
};

struct SampleSpec {
  std::map<std::string, std::pair<double, double>> ranges;
  int grid_per_axis = 3;
  int random_count = 8;
  std::uint64_t seed = 0;
};

/// Deterministic point set: a grid_per_axis^dim lattice over the declared
/// ranges plus random_count pseudorandom points. Every point must satisfy the
/// domain constraints with margin 1e-8; a violating point is an error, not a
/// skip, so that windows straddling a singular locus are rejected loudly.
inline std::vector<Point> sample_points(const ChartManifold& m,
                                        const SampleSpec& spec) {
  const double margin = 1e-8;
  std::vector<std::pair<double, double>> ranges(m.n);
  for (int i = 0; i < m.n; ++i) {
    auto it = spec.ranges.find(m.coords[i]);
    if (it == spec.ranges.end())
      throw SamplingError("no sampling range for coordinate '" + m.coords[i] +
                          "'");
    ranges[i] = it->second;
    if (!(ranges[i].first <= ranges[i].second))
      throw SamplingError("empty admissible region for coordinate '" +
                          m.coords[i] + "'");
  }

  std::vector<Point> pts;
  int g = spec.grid_per_axis;
  if (g < 1) g = 1;
  std::size_t total = 1;
  for (int i = 0; i < m.n; ++i) total *= static_cast<std::size_t>(g);

  for (std::size_t f = 0; f < total; ++f) {
    Point p(m.n);
    std::size_t rem = f;
    for (int i = m.n - 1; i >= 0; --i) {
      int step = static_cast<int>(rem % static_cast<std::size_t>(g));
      rem /= static_cast<std::size_t>(g);
      auto [lo, hi] = ranges[i];
      p[i] = (g == 1) ? 0.5 * (lo + hi)
                      : lo + (hi - lo) * static_cast<double>(step) / (g - 1);
    }
    pts.push_back(std::move(p));
  }

  SplitMix64 rng(spec.seed);
  for (int r = 0; r < spec.random_count; ++r) {
    Point p(m.n);
    for (int i = 0; i < m.n; ++i)
      p[i] = rng.uniform(ranges[i].first, ranges[i].second);
    pts.push_back(std::move(p));
  }

  if (pts.empty()) throw SamplingError("empty admissible region");
  for (const Point& p : pts) {
    for (const Expr& c : m.domain) {
      double v = eval(c, p);
      if (std::fabs(v) <= margin)
        throw SamplingError("sampled point violates domain constraint '" +
                            to_string(c) + "' within margin 1e-8; shrink the "
                            "sampling window");
    }
  }
  return pts;
}

} // namespace lcsgeo
