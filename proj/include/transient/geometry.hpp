#pragma once

#include <cstddef>
#include <vector>

#include "transient/basin.hpp"
#include "transient/model.hpp"

namespace transient {

/// Closed planar polygon; the last vertex repeats the first.
class Polygon {
 public:
  Polygon() = default;
  /// Closes the ring if needed. Throws on fewer than three distinct vertices.
  explicit Polygon(std::vector<Stated> vertices);

  const std::vector<Stated>& vertices() const { return vertices_; }
  std::size_t edge_count() const { return vertices_.size() - 1; }

  /// Shoelace area (positive for counter-clockwise rings).
  double signed_area() const;
  Polygon scaled(double factor) const;

 private:
  std::vector<Stated> vertices_;
};

/// Even-odd rule by horizontal ray casting toward +x. Edges are half-open in
/// v (an edge counts when exactly one endpoint lies strictly above the ray)
/// and a point counts as inside only when strictly left of a crossing, so
/// points on right or top edges of an axis-aligned box are outside while
/// those on left or bottom edges are inside.
bool point_in_polygon(const Polygon& poly, const Stated& p);

double distance_to_boundary(const Polygon& poly, const Stated& p);

struct OverlapResult {
  double area = 0.0;
  bool empty = true;  // no lattice sample hit both polygons
  std::size_t hits = 0;
  std::size_t samples = 0;
};

/// Area of the intersection estimated on a fixed stratified lattice of
/// about n_samples cell-center points covering the window (only its bounds
/// are used, not its grid resolution).
OverlapResult overlap_area(const Polygon& a, const Polygon& b, const PhaseWindow& window, std::size_t n_samples,
                           int jobs = 1);

/// Fraction of the initial safe zone not covered by the time-0 image of the
/// final one: 1 - |initial & transformed| / |initial|, both on the lattice.
double danger_index(const Polygon& initial, const Polygon& transformed, const PhaseWindow& window,
                    std::size_t n_samples, int jobs = 1);

}  // namespace transient
