#include "transient/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace transient {

const char* to_string(BranchSide side) {
  return side == BranchSide::eigvec_plus ? "eigvec-plus" : "eigvec-minus";
}

double ManifoldBranch::arc_length() const {
  double len = 0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

Stated stable_eigvector(const SystemParamsd& params) {
  for (const auto& fp : fixed_points(params)) {
    if (fp.location.x() != 0.0) continue;
    if (fp.kind != FixedPointKind::saddle) throw Error(ErrorCode::wrong_kind, "origin is not a saddle");
    const double lambda_s = fp.eigenvalues[1].real();
    return Stated(1.0, lambda_s).normalized();
  }
  throw Error(ErrorCode::wrong_kind, "no equilibrium at the origin");
}

namespace {

// Resamples a dense polyline at a fixed arc step, starting at its first point.
std::vector<Stated> resample(const std::vector<Stated>& dense, double step, double cap) {
  std::vector<Stated> out{dense.front()};
  double travelled = 0;  // arc length at dense[k]
  double next = step;
  for (std::size_t k = 1; k < dense.size(); ++k) {
    const Stated& a = dense[k - 1];
    const Stated& b = dense[k];
    const double seg = (b - a).norm();
    while (next <= travelled + seg && next <= cap) {
      const double w = (next - travelled) / seg;
      out.push_back(a + w * (b - a));
      next += step;
    }
    travelled += seg;
    if (next > cap) break;
  }
  return out;
}

ManifoldBranch grow_branch(const SystemParamsd& params, const IntegratorSettingsd& settings, const PhaseWindow& window,
                           const ManifoldSettings& ms, const Stated& seed, BranchSide side) {
  if (!window.contains(seed) || seed.norm() > settings.guard_radius)
    throw Error(ErrorCode::seed_too_large, "manifold seed lies outside the window");

  auto reversed = [&params](double, const Stated& y) -> Stated { return -rhs_unchecked(params, y, 0.0); };

  // Accepted steps are refined with the cubic Hermite interpolant built from
  // the field at both ends, so the polyline is accurate between steps.
  std::vector<Stated> dense{seed};
  Stated prev = seed;
  Stated prev_f = reversed(0.0, seed);
  double prev_t = 0.0;
  double arc = 0.0;
  const double fine = ms.arc_step / 4;
  bool left_window = false;

  auto observe = [&](double t, const Stated& y) {
    const Stated f = reversed(t, y);
    const double h = t - prev_t;
    const int pieces = std::max(1, static_cast<int>(std::ceil((y - prev).norm() / fine)));
    for (int k = 1; k <= pieces; ++k) {
      const double s = double(k) / pieces;
      const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
      const double h10 = s * (1 - s) * (1 - s);
      const double h01 = s * s * (3 - 2 * s);
      const double h11 = s * s * (s - 1);
      const Stated p = h00 * prev + h10 * h * prev_f + h01 * y + h11 * h * f;
      if (!window.contains(p)) {
        left_window = true;
        return false;
      }
      arc += (p - dense.back()).norm();
      dense.push_back(p);
      if (arc >= ms.arc_cap) return false;
    }
    prev = y;
    prev_f = f;
    prev_t = t;
    return true;
  };

  Rkf45<double> stepper(settings);
  double t = 0.0;
  Stated y = seed;
  const TerminalStatus status = stepper.advance(reversed, t, ms.t_max, y, observe);
  if (dense.size() < 2) {
    if (left_window || status == TerminalStatus::escaped)
      throw Error(ErrorCode::seed_too_large, "manifold branch escaped immediately");
  }
  return ManifoldBranch{resample(dense, ms.arc_step, ms.arc_cap), side};
}

}  // namespace

std::array<ManifoldBranch, 2> stable_manifold(const SystemParamsd& params, const IntegratorSettingsd& settings,
                                              const PhaseWindow& window, const ManifoldSettings& ms) {
  window.validate();
  const Stated e = stable_eigvector(params);
  return {grow_branch(params, settings, window, ms, ms.eps_seed * e, BranchSide::eigvec_plus),
          grow_branch(params, settings, window, ms, -ms.eps_seed * e, BranchSide::eigvec_minus)};
}

double segment_distance(const Stated& p, const Stated& a, const Stated& b) {
  const Stated ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

PolylineProjection project_onto(const std::vector<Stated>& polyline, const Stated& p) {
  PolylineProjection best{polyline.front(), (p - polyline.front()).norm(), 0.0};
  for (std::size_t k = 1; k < polyline.size(); ++k) {
    const Stated& a = polyline[k - 1];
    const Stated ab = polyline[k] - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Stated q = a + s * ab;
    const double d = (p - q).norm();
    if (d < best.distance) best = {q, d, double(k - 1) + s};
  }
  return best;
}

double interface_tracking_fraction(const std::array<ManifoldBranch, 2>& branches, const BasinGrid& grid) {
  const PhaseWindow& w = grid.window;
  const double diag = w.cell_diagonal();
  auto decided = [](BasinLabel l) { return l == BasinLabel::plus || l == BasinLabel::minus; };

  std::size_t total = 0;
  std::size_t tracked = 0;
  for (const auto& branch : branches) {
    for (const Stated& p : branch.points) {
      const auto cell = w.cell_of(p);
      if (!cell) continue;
      ++total;
      const auto [ci, cj] = *cell;
      double best = std::numeric_limits<double>::infinity();
      for (int j = std::max(0, cj - 3); j <= std::min(w.nv - 1, cj + 3); ++j) {
        for (int i = std::max(0, ci - 3); i <= std::min(w.nx - 1, ci + 3); ++i) {
          const BasinLabel here = grid.at(i, j);
          if (!decided(here)) continue;
          const double x1 = w.x_min + (i + 1) * w.dx();
          const double v0 = w.v_min + j * w.dv();
          const double v1 = w.v_min + (j + 1) * w.dv();
          const double x0 = w.x_min + i * w.dx();
          if (i + 1 < w.nx && decided(grid.at(i + 1, j)) && grid.at(i + 1, j) != here)
            best = std::min(best, segment_distance(p, Stated(x1, v0), Stated(x1, v1)));
          if (j + 1 < w.nv && decided(grid.at(i, j + 1)) && grid.at(i, j + 1) != here)
            best = std::min(best, segment_distance(p, Stated(x0, v1), Stated(x1, v1)));
        }
      }
      tracked += best <= diag;
    }
  }
  return total == 0 ? 0.0 : double(tracked) / double(total);
}

}  // namespace transient
