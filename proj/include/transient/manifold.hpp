#pragma once

#include <array>
#include <vector>

#include "transient/basin.hpp"
#include "transient/integrator.hpp"
#include "transient/model.hpp"

namespace transient {

enum class BranchSide { eigvec_plus, eigvec_minus };

const char* to_string(BranchSide side);

/// Stable manifold branch of the origin saddle, ordered from the seed outward
/// and resampled at a uniform arc step.
struct ManifoldBranch {
  std::vector<Stated> points;
  BranchSide side = BranchSide::eigvec_plus;

  double arc_length() const;
};

struct ManifoldSettings {
  double eps_seed = 1e-6;
  double arc_cap = 40.0;
  double arc_step = 0.01;
  double t_max = 1000.0;
};

/// Unit eigenvector of the saddle's negative eigenvalue, with x-component > 0.
Stated stable_eigvector(const SystemParamsd& params);

/// Both branches, grown by integrating the unforced field in reverse time from
/// saddle +- eps_seed * stable_eigvector until the window is left or the arc
/// cap is reached.
std::array<ManifoldBranch, 2> stable_manifold(const SystemParamsd& params, const IntegratorSettingsd& settings,
                                              const PhaseWindow& window, const ManifoldSettings& ms = {});

/// Fraction of branch points lying within one cell diagonal of an edge between
/// a plus cell and a minus cell of the grid.
double interface_tracking_fraction(const std::array<ManifoldBranch, 2>& branches, const BasinGrid& grid);

/// Closest point to p on a polyline; `param` is the fractional vertex index.
struct PolylineProjection {
  Stated point;
  double distance;
  double param;
};
PolylineProjection project_onto(const std::vector<Stated>& polyline, const Stated& p);

double segment_distance(const Stated& p, const Stated& a, const Stated& b);

}  // namespace transient
