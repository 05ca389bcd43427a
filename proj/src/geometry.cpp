#include "transient/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transient/manifold.hpp"
#include "transient/parallel.hpp"

namespace transient {

namespace {

// Where edge a-b meets the horizontal line v = y, if it straddles it under the
// half-open rule. Shared by the point test and the row scanner so that both
// give bit-identical answers.
inline bool straddles(const Stated& a, const Stated& b, double y) { return (a.y() > y) != (b.y() > y); }

inline double crossing_x(const Stated& a, const Stated& b, double y) {
  return a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
}

std::vector<double> row_crossings(const Polygon& poly, double y) {
  std::vector<double> xs;
  const auto& v = poly.vertices();
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (straddles(v[k], v[k + 1], y)) xs.push_back(crossing_x(v[k], v[k + 1], y));
  std::sort(xs.begin(), xs.end());
  return xs;
}

// Inside flags for increasing sample abscissae; a point is inside when the
// number of crossings strictly to its right is odd.
void row_membership(const std::vector<double>& crossings, const std::vector<double>& xs, std::vector<char>& out) {
  out.assign(xs.size(), 0);
  std::size_t passed = 0;  // crossings with xc <= x
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (passed < crossings.size() && crossings[passed] <= xs[i]) ++passed;
    out[i] = ((crossings.size() - passed) & 1u) != 0;
  }
}

}  // namespace

Polygon::Polygon(std::vector<Stated> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw Error(ErrorCode::invalid_argument, "degenerate polygon: no vertices");
  if (vertices_.front() != vertices_.back()) vertices_.push_back(vertices_.front());
  std::size_t distinct = 0;
  for (std::size_t k = 0; k + 1 < vertices_.size(); ++k) {
    bool seen = false;
    for (std::size_t q = 0; q < k && !seen; ++q) seen = vertices_[q] == vertices_[k];
    distinct += !seen;
    if (distinct >= 3) break;
  }
  if (distinct < 3) throw Error(ErrorCode::invalid_argument, "degenerate polygon: fewer than three vertices");
}

double Polygon::signed_area() const {
  double twice = 0;
  for (std::size_t k = 0; k + 1 < vertices_.size(); ++k)
    twice += vertices_[k].x() * vertices_[k + 1].y() - vertices_[k + 1].x() * vertices_[k].y();
  return twice / 2;
}

Polygon Polygon::scaled(double factor) const {
  std::vector<Stated> v = vertices_;
  for (auto& p : v) p *= factor;
  return Polygon(std::move(v));
}

bool point_in_polygon(const Polygon& poly, const Stated& p) {
  const auto& v = poly.vertices();
  if (v.size() < 4) throw Error(ErrorCode::invalid_argument, "degenerate polygon");
  bool inside = false;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (straddles(v[k], v[k + 1], p.y()) && p.x() < crossing_x(v[k], v[k + 1], p.y())) inside = !inside;
  return inside;
}

double distance_to_boundary(const Polygon& poly, const Stated& p) {
  const auto& v = poly.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) best = std::min(best, segment_distance(p, v[k], v[k + 1]));
  return best;
}

namespace {

struct LatticeCounts {
  std::size_t in_a = 0;
  std::size_t in_both = 0;
  std::size_t samples = 0;
};

LatticeCounts lattice_counts(const Polygon& a, const Polygon& b, const PhaseWindow& window, std::size_t n_samples,
                             int jobs) {
  if (!(window.x_min < window.x_max) || !(window.v_min < window.v_max))
    throw Error(ErrorCode::invalid_argument, "empty sampling window");
  const std::size_t side = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(double(n_samples)))));
  const double hx = (window.x_max - window.x_min) / double(side);
  const double hv = (window.v_max - window.v_min) / double(side);
  std::vector<double> xs(side);
  for (std::size_t i = 0; i < side; ++i) xs[i] = window.x_min + (double(i) + 0.5) * hx;

  std::vector<std::size_t> row_a(side, 0), row_both(side, 0);
  parallel_for(side, jobs, [&](std::size_t j) {
    const double y = window.v_min + (double(j) + 0.5) * hv;
    std::vector<char> ina, inb;
    row_membership(row_crossings(a, y), xs, ina);
    row_membership(row_crossings(b, y), xs, inb);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < side; ++i) {
      na += ina[i];
      nb += ina[i] && inb[i];
    }
    row_a[j] = na;
    row_both[j] = nb;
  });

  LatticeCounts c;
  c.samples = side * side;
  for (std::size_t j = 0; j < side; ++j) {
    c.in_a += row_a[j];
    c.in_both += row_both[j];
  }
  return c;
}

}  // namespace

OverlapResult overlap_area(const Polygon& a, const Polygon& b, const PhaseWindow& window, std::size_t n_samples,
                           int jobs) {
  const LatticeCounts c = lattice_counts(a, b, window, n_samples, jobs);
  OverlapResult r;
  r.samples = c.samples;
  r.hits = c.in_both;
  r.empty = c.in_both == 0;
  r.area = double(c.in_both) / double(c.samples) * window.area();
  return r;
}

double danger_index(const Polygon& initial, const Polygon& transformed, const PhaseWindow& window,
                    std::size_t n_samples, int jobs) {
  const LatticeCounts c = lattice_counts(initial, transformed, window, n_samples, jobs);
  if (c.in_a == 0) throw Error(ErrorCode::undefined_index, "initial safe zone has zero sampled area");
  return 1.0 - double(c.in_both) / double(c.in_a);
}

}  // namespace transient
