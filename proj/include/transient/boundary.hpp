#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "transient/basin.hpp"
#include "transient/forcing.hpp"
#include "transient/geometry.hpp"
#include "transient/integrator.hpp"
#include "transient/manifold.hpp"

namespace transient {

enum class VertexStatus { mapped, escaped };
enum class BoundaryTime { at_t_end, at_zero };

/// Which piece of the safe-zone boundary a vertex descends from.
enum class EdgeSource { basin, cap, window };

const char* to_string(EdgeSource source);

struct BoundaryVertex {
  Stated state;
  VertexStatus status = VertexStatus::mapped;
  EdgeSource source = EdgeSource::basin;
};

/// Closed ring of boundary vertices (last == first when every vertex mapped).
struct BoundaryPolyline {
  std::vector<BoundaryVertex> vertices;
  BoundaryTime time = BoundaryTime::at_t_end;
  std::size_t escaped = 0;
  bool depth_limited = false;
  bool unreliable = false;  // more than 1% of the mapped points escaped
  std::string profile;

  std::vector<Stated> states() const;
  Polygon polygon() const;
};

struct SafeZone {
  BoundaryPolyline boundary;
  std::string description;

  Polygon polygon() const { return boundary.polygon(); }
};

/// Boundary of the connected component of {plus cells with v <= cap_v} that
/// contains `attractor`, traced by marching squares over cell centers.
/// Crossings against the cap sit exactly on v = cap_v; crossings against the
/// other basin are snapped onto the manifold where it runs within one cell
/// diagonal. The ring is counter-clockwise and resampled at `arc_step`.
SafeZone build_safe_zone(const BasinGrid& grid, const std::array<ManifoldBranch, 2>& branches, double cap_v,
                         const Stated& attractor, double arc_step = 0.005);

struct MappingSettings {
  double refine_distance = 0.01;
  int max_depth = 12;
  int jobs = 1;
};

/// Replaces every vertex by its time-0 preimage under the transient flow and
/// bisects source segments whose images are farther apart than
/// refine_distance. Escaped vertices are dropped and bridged by neighbours.
BoundaryPolyline map_boundary_backward(const SystemParamsd& params, const ForcingProfile& profile,
                                       const SafeZone& zone, double t_end, const IntegratorSettingsd& settings,
                                       const MappingSettings& mapping = {});

struct DiscriminatingPoints {
  std::optional<Stated> a_like;  // inside the transformed boundary, outside the initial basin
  std::optional<Stated> b_like;  // outside the transformed boundary, inside the initial safe zone
  std::size_t a_candidates = 0;
  std::size_t b_candidates = 0;
};

/// Scans the cell centers of the initial system's basin grid. A-like
/// candidates lie inside the transformed region but outside the initial
/// basin; the pick is the deepest one. B-like candidates lie in the initial
/// basin and its safe zone but outside the transformed region; the pick is
/// the one closest to (but at least `margin` from) a basin-derived part of
/// the transformed boundary, so that it crosses the separatrix rather than
/// the cap line.
DiscriminatingPoints find_discriminating_points(const BoundaryPolyline& transformed, const BasinGrid& initial_grid,
                                                const SafeZone& initial_zone, double margin = 0.02);

struct VerificationResult {
  std::size_t tested = 0;
  std::size_t agreed = 0;

  double fraction() const { return tested == 0 ? 0.0 : double(agreed) / double(tested); }
};

/// Homeomorphism check: for n pseudo-random window points at least `margin`
/// from the transformed boundary, membership in the transformed region must
/// match membership of the forward-integrated endpoint (at t_end) in the
/// safe zone.
VerificationResult verify_transformed_boundary(const SystemParamsd& params, const ForcingProfile& profile,
                                               const SafeZone& zone, const BoundaryPolyline& transformed,
                                               double t_end, const PhaseWindow& window, std::size_t n,
                                               const IntegratorSettingsd& settings, double margin = 0.05,
                                               std::uint64_t seed = 20130527, int jobs = 1);

/// Deterministic uniform points in the window (SplitMix64, platform independent).
std::vector<Stated> uniform_samples(const PhaseWindow& window, std::size_t n, std::uint64_t seed);

}  // namespace transient
