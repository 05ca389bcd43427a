#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "transient/forcing.hpp"
#include "transient/integrator.hpp"
#include "transient/model.hpp"

namespace transient {

/// Numeric values are the grid CSV encoding.
enum class BasinLabel : std::uint8_t { undecided = 0, plus = 1, minus = 2, escaped = 3 };

const char* to_string(BasinLabel label);

/// Rectangular phase-plane window split into nx x nv cells.
struct PhaseWindow {
  double x_min = -3.0;
  double x_max = 3.0;
  double v_min = -3.0;
  double v_max = 3.0;
  int nx = 200;
  int nv = 200;

  void validate() const;

  double dx() const { return (x_max - x_min) / nx; }
  double dv() const { return (v_max - v_min) / nv; }
  double cell_diagonal() const;
  double area() const { return (x_max - x_min) * (v_max - v_min); }
  bool contains(const Stated& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= v_min && p.y() <= v_max;
  }

  Stated cell_center(int i, int j) const {
    return {x_min + (i + 0.5) * dx(), v_min + (j + 0.5) * dv()};
  }
  std::optional<std::pair<int, int>> cell_of(const Stated& p) const;
};

struct BasinGrid {
  PhaseWindow window;
  std::vector<BasinLabel> labels;  // row-major, row j = v index

  BasinLabel at(int i, int j) const { return labels[static_cast<std::size_t>(j) * window.nx + i]; }
  std::size_t count(BasinLabel label) const;
  double fraction(BasinLabel label) const { return double(count(label)) / double(labels.size()); }
};

struct BasinSettings {
  double eps_conv = 1e-3;
  double confirm_interval = 5.0;
  double t_max = 200.0;
  int n_settle = 50;
  double rejection_radius = 0.5;
  double reference_tol = 1e-9;
  int max_reference_periods = 5000;
  int jobs = 1;
};

/// Decides which attractor an initial condition at t = 0 ends up on.
///
/// The profile is split into a transient part on [0, t_end] (switching ramps
/// and accelerograms; empty for steady profiles) followed by the final steady
/// regime. An unforced final regime is classified by dwell near a stable
/// equilibrium; a harmonic one by the stroboscopic map sampled at
/// t_end + k * period, compared with the map's settled fixed points.
class AttractorClassifier {
 public:
  AttractorClassifier(const SystemParamsd& params, const ForcingProfile& profile, const IntegratorSettingsd& settings,
                      const BasinSettings& basin = {});

  BasinLabel operator()(const Stated& ic) const;

  /// Reference points of the final regime: equilibria or stroboscopic fixed
  /// points. Index 0 is the plus (acceptable) attractor.
  const std::array<std::optional<Stated>, 2>& references() const { return refs_; }
  double transient_duration() const { return t_transient_; }
  bool forced_final() const { return forced_final_; }

  /// Classifies a state at the end of the transient, i.e. in the final regime.
  BasinLabel classify_final(const Stated& state) const;

 private:
  BasinLabel classify_unforced(const Stated& state, double t0) const;
  BasinLabel classify_stroboscopic(const Stated& state, double t0) const;
  BasinLabel nearest(const Stated& state, double radius) const;

  SystemParamsd params_;
  ForcingProfile profile_;
  ForcingProfile final_profile_;
  IntegratorSettingsd settings_;
  BasinSettings basin_;
  double t_transient_ = 0.0;
  bool forced_final_ = false;
  std::array<std::optional<Stated>, 2> refs_;
};

BasinLabel classify_ic(const SystemParamsd& params, const ForcingProfile& profile, const Stated& ic,
                       const IntegratorSettingsd& settings, const BasinSettings& basin = {});

/// Labels at every cell center of the window.
BasinGrid basin_grid(const SystemParamsd& params, const ForcingProfile& profile, const PhaseWindow& window,
                     const IntegratorSettingsd& settings, const BasinSettings& basin = {});

/// Period-T stroboscopic fixed points of a steady harmonic profile, sampled at
/// t = phase (mod T), settled from the plus and minus equilibria.
std::array<Stated, 2> poincare_reference_points(const SystemParamsd& params, const ForcingProfile& profile,
                                                const IntegratorSettingsd& settings, const BasinSettings& basin = {},
                                                double phase = 0.0);

/// The plus/minus attracting equilibria of the unforced system, if present.
std::array<std::optional<Stated>, 2> attracting_equilibria(const SystemParamsd& params);

}  // namespace transient
