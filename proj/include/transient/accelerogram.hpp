#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace transient {

/// Tabulated ground-acceleration record. Times are strictly increasing and
/// non-negative; values are in force-per-unit-mass units of the oscillator.
struct Accelerogram {
  std::vector<double> t;
  std::vector<double> a;
  std::string source;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  double start() const { return t.front(); }
  double stop() const { return t.back(); }
  double duration() const { return empty() ? 0.0 : t.back() - t.front(); }

  /// Piecewise-linear value; exact at sample times, zero outside the support.
  double interpolate(double time) const {
    if (empty() || time < t.front() || time > t.back()) return 0.0;
    auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    if (time == t[lo] || hi == t.size()) return a[lo];
    const double w = (time - t[lo]) / (t[hi] - t[lo]);
    return a[lo] + w * (a[hi] - a[lo]);
  }
};

}  // namespace transient
