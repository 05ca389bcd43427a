#include "transient/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "transient/io.hpp"
#include "transient/parallel.hpp"

namespace transient {

const char* to_string(EdgeSource source) {
  switch (source) {
    case EdgeSource::basin: return "basin";
    case EdgeSource::cap: return "cap";
    case EdgeSource::window: return "window";
  }
  return "unknown";
}

std::vector<Stated> BoundaryPolyline::states() const {
  std::vector<Stated> out;
  out.reserve(vertices.size());
  for (const auto& v : vertices)
    if (v.status == VertexStatus::mapped) out.push_back(v.state);
  return out;
}

Polygon BoundaryPolyline::polygon() const { return Polygon(states()); }

namespace {

// ---------------------------------------------------------------------------
// Safe-zone extraction

struct Crossing {
  Stated point;
  EdgeSource source;
};

// Flood fill (4-connected) of the indicator mask from the seed cell.
std::vector<char> component_mask(const BasinGrid& grid, double cap_v, int si, int sj) {
  const PhaseWindow& w = grid.window;
  auto eligible = [&](int i, int j) {
    return grid.at(i, j) == BasinLabel::plus && w.cell_center(i, j).y() <= cap_v;
  };
  std::vector<char> mask(static_cast<std::size_t>(w.nx) * w.nv, 0);
  if (!eligible(si, sj)) return mask;
  std::deque<std::pair<int, int>> queue{{si, sj}};
  mask[static_cast<std::size_t>(sj) * w.nx + si] = 1;
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (ni < 0 || nj < 0 || ni >= w.nx || nj >= w.nv) continue;
      auto& m = mask[static_cast<std::size_t>(nj) * w.nx + ni];
      if (m || !eligible(ni, nj)) continue;
      m = 1;
      queue.emplace_back(ni, nj);
    }
  }
  return mask;
}

// Marching squares on the padded sample lattice; returns the ring with the
// largest enclosed area (holes are ignored).
std::vector<Crossing> trace_outer_ring(const BasinGrid& grid, const std::vector<char>& mask, double cap_v) {
  const PhaseWindow& w = grid.window;
  const int W = w.nx + 2;  // padded samples per row
  const int H = w.nv + 2;
  auto inside = [&](int I, int J) {
    const int i = I - 1;
    const int j = J - 1;
    if (i < 0 || j < 0 || i >= w.nx || j >= w.nv) return false;
    return mask[static_cast<std::size_t>(j) * w.nx + i] != 0;
  };
  auto center = [&](int I, int J) { return w.cell_center(I - 1, J - 1); };
  auto real_cell = [&](int I, int J) { return I >= 1 && J >= 1 && I <= w.nx && J <= w.nv; };

  // Edge ids: horizontal edge (I,J)-(I+1,J) -> 2*(J*W+I); vertical (I,J)-(I,J+1) -> +1.
  auto h_edge = [&](int I, int J) { return 2L * (long(J) * W + I); };
  auto v_edge = [&](int I, int J) { return 2L * (long(J) * W + I) + 1; };

  auto crossing_of = [&](long id) -> Crossing {
    const long cell = id / 2;
    const int I = static_cast<int>(cell % W);
    const int J = static_cast<int>(cell / W);
    int I2 = I, J2 = J;
    if (id % 2 == 0) ++I2; else ++J2;
    // Orient so that (Ia, Ja) is the inside sample.
    int Ia = I, Ja = J, Ib = I2, Jb = J2;
    if (!inside(Ia, Ja)) {
      std::swap(Ia, Ib);
      std::swap(Ja, Jb);
    }
    const Stated a = center(Ia, Ja);
    const Stated b = center(Ib, Jb);
    if (!real_cell(Ib, Jb)) return {(a + b) / 2, EdgeSource::window};
    const bool capped = grid.at(Ib - 1, Jb - 1) == BasinLabel::plus && b.y() > cap_v && Ia == Ib;
    if (capped) {
      const double v = std::clamp(cap_v, std::min(a.y(), b.y()), std::max(a.y(), b.y()));
      return {Stated(a.x(), v), EdgeSource::cap};
    }
    return {(a + b) / 2, EdgeSource::basin};
  };

  std::map<long, std::vector<long>> links;
  auto link = [&](long e1, long e2) {
    links[e1].push_back(e2);
    links[e2].push_back(e1);
  };
  for (int J = 0; J + 1 < H; ++J) {
    for (int I = 0; I + 1 < W; ++I) {
      const bool c0 = inside(I, J), c1 = inside(I + 1, J), c2 = inside(I + 1, J + 1), c3 = inside(I, J + 1);
      const int index = c0 | (c1 << 1) | (c2 << 2) | (c3 << 3);
      if (index == 0 || index == 15) continue;
      const long e0 = h_edge(I, J), e1 = v_edge(I + 1, J), e2 = h_edge(I, J + 1), e3 = v_edge(I, J);
      if (index == 5) {  // c0, c2 inside: keep them separate (4-connectivity)
        link(e3, e0);
        link(e1, e2);
        continue;
      }
      if (index == 10) {
        link(e0, e1);
        link(e2, e3);
        continue;
      }
      std::vector<long> crossed;
      if (c0 != c1) crossed.push_back(e0);
      if (c1 != c2) crossed.push_back(e1);
      if (c3 != c2) crossed.push_back(e2);
      if (c0 != c3) crossed.push_back(e3);
      link(crossed[0], crossed[1]);
    }
  }

  std::vector<Crossing> best;
  double best_area = -1;
  std::map<long, bool> visited;
  for (const auto& [start, _] : links) {
    if (visited[start]) continue;
    std::vector<Crossing> ring;
    long prev = -1;
    long cur = start;
    while (!visited[cur]) {
      visited[cur] = true;
      ring.push_back(crossing_of(cur));
      const auto& nb = links[cur];
      const long next = nb[0] != prev ? nb[0] : nb[1];
      prev = cur;
      cur = next;
    }
    double twice = 0;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const Stated& p = ring[k].point;
      const Stated& q = ring[(k + 1) % ring.size()].point;
      twice += p.x() * q.y() - q.x() * p.y();
    }
    if (std::abs(twice) > best_area) {
      best_area = std::abs(twice);
      if (twice < 0) std::reverse(ring.begin(), ring.end());
      best = std::move(ring);
    }
  }
  return best;
}

struct Snap {
  int branch = -1;
  double param = 0;
  Stated point;
};

// Replaces runs of basin crossings lying within `reach` of a manifold branch
// by the branch itself between the projections of the run ends.
std::vector<Crossing> snap_to_manifold(const std::vector<Crossing>& ring,
                                       const std::array<ManifoldBranch, 2>& branches, double reach) {
  const std::size_t n = ring.size();
  std::vector<Snap> snaps(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (ring[k].source != EdgeSource::basin) continue;
    double best = reach;
    for (int b = 0; b < 2; ++b) {
      if (branches[b].points.size() < 2) continue;
      const auto proj = project_onto(branches[b].points, ring[k].point);
      if (proj.distance <= best) {
        best = proj.distance;
        snaps[k] = {b, proj.param, proj.point};
      }
    }
  }

  // Start the walk at a run boundary so that no run wraps around.
  std::size_t start = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Snap& prev = snaps[(k + n - 1) % n];
    if (snaps[k].branch < 0 || snaps[k].branch != prev.branch) {
      start = k;
      break;
    }
  }

  std::vector<Crossing> out;
  out.reserve(n * 2);
  std::size_t k = 0;
  while (k < n) {
    const std::size_t idx = (start + k) % n;
    if (snaps[idx].branch < 0) {
      out.push_back(ring[idx]);
      ++k;
      continue;
    }
    // Collect the run on this branch.
    const int b = snaps[idx].branch;
    std::vector<std::size_t> run;
    while (k < n && snaps[(start + k) % n].branch == b) {
      run.push_back((start + k) % n);
      ++k;
    }
    const auto& pts = branches[b].points;
    const double s0 = snaps[run.front()].param;
    const double s1 = snaps[run.back()].param;
    out.push_back({snaps[run.front()].point, EdgeSource::basin});
    if (s1 >= s0) {
      for (std::size_t q = static_cast<std::size_t>(std::floor(s0)) + 1; double(q) < s1; ++q)
        out.push_back({pts[q], EdgeSource::basin});
    } else {
      for (long q = static_cast<long>(std::ceil(s0)) - 1; q > 0 && double(q) > s1; --q)
        out.push_back({pts[static_cast<std::size_t>(q)], EdgeSource::basin});
    }
    if (run.size() > 1) out.push_back({snaps[run.back()].point, EdgeSource::basin});
  }
  return out;
}

EdgeSource segment_source(EdgeSource a, EdgeSource b) {
  if (a == b) return a;
  return EdgeSource::basin;
}

// Uniform arc-length resampling of a closed ring.
std::vector<BoundaryVertex> resample_ring(const std::vector<Crossing>& ring, double step) {
  std::vector<BoundaryVertex> out;
  const std::size_t n = ring.size();
  double carry = 0;  // arc length already travelled past the last emitted point
  for (std::size_t k = 0; k < n; ++k) {
    const Crossing& a = ring[k];
    const Crossing& b = ring[(k + 1) % n];
    const double len = (b.point - a.point).norm();
    const EdgeSource src = segment_source(a.source, b.source);
    if (k == 0) out.push_back({a.point, VertexStatus::mapped, a.source});
    double s = step - carry;
    while (s < len) {
      out.push_back({a.point + (s / len) * (b.point - a.point), VertexStatus::mapped, src});
      s += step;
    }
    carry = len - (s - step);
  }
  // Drop a final point that nearly duplicates the first.
  if (out.size() > 3 && (out.back().state - out.front().state).norm() < step * 1e-3) out.pop_back();
  out.push_back(out.front());
  return out;
}

}  // namespace

SafeZone build_safe_zone(const BasinGrid& grid, const std::array<ManifoldBranch, 2>& branches, double cap_v,
                         const Stated& attractor, double arc_step) {
  const PhaseWindow& w = grid.window;
  w.validate();
  if (grid.labels.size() != static_cast<std::size_t>(w.nx) * w.nv)
    throw Error(ErrorCode::invalid_argument, "basin grid size does not match its window");
  if (!(arc_step > 0)) throw Error(ErrorCode::invalid_argument, "arc step must be positive");

  const auto seed = w.cell_of(attractor);
  if (!seed) throw Error(ErrorCode::empty_safe_zone, "acceptable attractor lies outside the window");
  const auto mask = component_mask(grid, cap_v, seed->first, seed->second);
  if (std::none_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
    throw Error(ErrorCode::empty_safe_zone, "no plus cells below the cap around the acceptable attractor");

  auto ring = trace_outer_ring(grid, mask, cap_v);
  ring = snap_to_manifold(ring, branches, w.cell_diagonal());
  // Snapping near the cap corners may overshoot the cap line.
  for (Crossing& c : ring) c.point.y() = std::min(c.point.y(), cap_v);

  SafeZone zone;
  zone.boundary.vertices = resample_ring(ring, arc_step);
  zone.boundary.time = BoundaryTime::at_t_end;
  zone.description = "plus-attractor basin capped at v=" + format_number(cap_v) + " (" + std::to_string(w.nx) + "x" +
                     std::to_string(w.nv) + " grid)";
  return zone;
}

namespace {

struct MappedPoint {
  Stated source;
  Stated image;
  VertexStatus status;
  EdgeSource origin;
};

MappedPoint map_point(const SystemParamsd& params, const ForcingProfile& profile, const Stated& p, EdgeSource origin,
                      double t_end, const IntegratorSettingsd& settings) {
  const auto r = flow_backward(params, profile, p, t_end, settings);
  const VertexStatus status = r.status == TerminalStatus::reached_t_final ? VertexStatus::mapped : VertexStatus::escaped;
  return {p, r.state, status, origin};
}

struct SegmentRefinement {
  std::vector<MappedPoint> interior;
  bool depth_limited = false;
};

void refine(const SystemParamsd& params, const ForcingProfile& profile, double t_end,
            const IntegratorSettingsd& settings, const MappingSettings& mapping, const MappedPoint& a,
            const MappedPoint& b, EdgeSource origin, int depth, SegmentRefinement& out) {
  if (a.status != VertexStatus::mapped || b.status != VertexStatus::mapped) return;
  if ((a.image - b.image).norm() <= mapping.refine_distance) return;
  if (depth >= mapping.max_depth) {
    out.depth_limited = true;
    return;
  }
  const MappedPoint mid = map_point(params, profile, (a.source + b.source) / 2, origin, t_end, settings);
  refine(params, profile, t_end, settings, mapping, a, mid, origin, depth + 1, out);
  out.interior.push_back(mid);
  refine(params, profile, t_end, settings, mapping, mid, b, origin, depth + 1, out);
}

}  // namespace

BoundaryPolyline map_boundary_backward(const SystemParamsd& params, const ForcingProfile& profile,
                                       const SafeZone& zone, double t_end, const IntegratorSettingsd& settings,
                                       const MappingSettings& mapping) {
  if (!(t_end >= 0)) throw Error(ErrorCode::invalid_argument, "transient duration must be non-negative");
  profile.validate();
  const auto& src = zone.boundary.vertices;
  if (src.size() < 4) throw Error(ErrorCode::invalid_argument, "safe-zone boundary has too few vertices");
  const std::size_t n = src.size() - 1;  // ring without the closing duplicate

  std::vector<MappedPoint> images(n);
  parallel_for(n, mapping.jobs, [&](std::size_t k) {
    images[k] = map_point(params, profile, src[k].state, src[k].source, t_end, settings);
  });

  std::vector<SegmentRefinement> segments(n);
  parallel_for(n, mapping.jobs, [&](std::size_t k) {
    const EdgeSource origin = src[k].source == src[k + 1].source ? src[k].source : EdgeSource::basin;
    refine(params, profile, t_end, settings, mapping, images[k], images[(k + 1) % n], origin, 0, segments[k]);
  });

  BoundaryPolyline out;
  out.time = BoundaryTime::at_zero;
  out.profile = profile.description();
  std::size_t total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto emit = [&](const MappedPoint& p) {
      ++total;
      if (p.status == VertexStatus::mapped) {
        out.vertices.push_back({p.image, VertexStatus::mapped, p.origin});
      } else {
        ++out.escaped;
      }
    };
    emit(images[k]);
    for (const auto& p : segments[k].interior) emit(p);
    out.depth_limited = out.depth_limited || segments[k].depth_limited;
  }
  if (out.vertices.empty()) throw Error(ErrorCode::invalid_state, "every boundary point escaped");
  out.vertices.push_back(out.vertices.front());
  out.unreliable = double(out.escaped) > 0.01 * double(total);
  return out;
}

namespace {
// A B-like pick must be this much nearer a separatrix image than a cap image.
constexpr double kCapClearance = 0.05;
}  // namespace

DiscriminatingPoints find_discriminating_points(const BoundaryPolyline& transformed, const BasinGrid& initial_grid,
                                                const SafeZone& initial_zone, double margin) {
  const Polygon poly = transformed.polygon();
  const Polygon initial = initial_zone.polygon();
  const auto& ring = transformed.vertices;
  const PhaseWindow& w = initial_grid.window;

  DiscriminatingPoints out;
  double best_a = -1;
  double best_b = std::numeric_limits<double>::infinity();
  for (int j = 0; j < w.nv; ++j) {
    for (int i = 0; i < w.nx; ++i) {
      const BasinLabel label = initial_grid.at(i, j);
      if (label != BasinLabel::plus && label != BasinLabel::minus) continue;
      const Stated p = w.cell_center(i, j);
      const bool in_transformed = point_in_polygon(poly, p);
      const bool in_basin = label == BasinLabel::plus;
      if (in_transformed == in_basin) continue;
      if (!in_transformed && !point_in_polygon(initial, p)) continue;

      // Distances to the separatrix-derived and to the cap/window-derived
      // parts of the transformed boundary.
      double to_basin = std::numeric_limits<double>::infinity();
      double to_other = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        const double d = segment_distance(p, ring[k].state, ring[k + 1].state);
        double& slot = segment_source(ring[k].source, ring[k + 1].source) == EdgeSource::basin ? to_basin : to_other;
        slot = std::min(slot, d);
      }
      const double dist = std::min(to_basin, to_other);
      if (dist < margin) continue;

      if (in_transformed) {
        ++out.a_candidates;
        if (dist > best_a) {
          best_a = dist;
          out.a_like = p;
        }
      } else {
        ++out.b_candidates;
        if (to_other >= to_basin + kCapClearance && to_basin < best_b) {
          best_b = to_basin;
          out.b_like = p;
        }
      }
    }
  }
  return out;
}

std::vector<Stated> uniform_samples(const PhaseWindow& window, std::size_t n, std::uint64_t seed) {
  std::uint64_t state = seed;
  auto next = [&state] {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return double(z >> 11) * 0x1.0p-53;
  };
  std::vector<Stated> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = window.x_min + next() * (window.x_max - window.x_min);
    const double v = window.v_min + next() * (window.v_max - window.v_min);
    out.emplace_back(x, v);
  }
  return out;
}

VerificationResult verify_transformed_boundary(const SystemParamsd& params, const ForcingProfile& profile,
                                               const SafeZone& zone, const BoundaryPolyline& transformed,
                                               double t_end, const PhaseWindow& window, std::size_t n,
                                               const IntegratorSettingsd& settings, double margin,
                                               std::uint64_t seed, int jobs) {
  const Polygon target = zone.polygon();
  const Polygon image = transformed.polygon();

  // Draw candidates in batches until n of them clear the margin.
  std::vector<Stated> points;
  std::uint64_t batch_seed = seed;
  while (points.size() < n) {
    for (const Stated& p : uniform_samples(window, n, batch_seed++)) {
      if (points.size() == n) break;
      if (distance_to_boundary(image, p) >= margin) points.push_back(p);
    }
  }

  std::vector<char> agree(n, 0);
  parallel_for(n, jobs, [&](std::size_t k) {
    const bool predicted = point_in_polygon(image, points[k]);
    const auto end = flow(params, profile, points[k], 0.0, t_end, settings);
    const bool actual = end.status == TerminalStatus::reached_t_final && point_in_polygon(target, end.state);
    agree[k] = predicted == actual;
  });

  VerificationResult r;
  r.tested = n;
  for (char a : agree) r.agreed += a != 0;
  return r;
}

}  // namespace transient
