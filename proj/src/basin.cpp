#include "transient/basin.hpp"

#include <cmath>
#include <limits>

#include "transient/parallel.hpp"

namespace transient {

const char* to_string(BasinLabel label) {
  switch (label) {
    case BasinLabel::undecided: return "undecided";
    case BasinLabel::plus: return "plus";
    case BasinLabel::minus: return "minus";
    case BasinLabel::escaped: return "escaped";
  }
  return "unknown";
}

void PhaseWindow::validate() const {
  if (!(x_min < x_max) || !(v_min < v_max)) throw Error(ErrorCode::invalid_argument, "empty phase window");
  if (nx < 2 || nv < 2) throw Error(ErrorCode::invalid_argument, "phase window needs at least 2x2 cells");
}

double PhaseWindow::cell_diagonal() const { return std::hypot(dx(), dv()); }

std::optional<std::pair<int, int>> PhaseWindow::cell_of(const Stated& p) const {
  if (!contains(p)) return std::nullopt;
  const int i = std::min(nx - 1, static_cast<int>((p.x() - x_min) / dx()));
  const int j = std::min(nv - 1, static_cast<int>((p.y() - v_min) / dv()));
  return std::make_pair(i, j);
}

std::size_t BasinGrid::count(BasinLabel label) const {
  std::size_t n = 0;
  for (BasinLabel l : labels) n += l == label;
  return n;
}

std::array<std::optional<Stated>, 2> attracting_equilibria(const SystemParamsd& params) {
  std::array<std::optional<Stated>, 2> out;
  std::vector<Stated> stable;
  for (const auto& fp : fixed_points(params))
    if (fp.attracting()) stable.push_back(fp.location);
  if (stable.empty()) return out;
  // fixed_points() is sorted by x: rightmost is the acceptable one.
  if (stable.back().x() > 0 || stable.size() > 1) out[0] = stable.back();
  if (stable.size() > 1 || stable.front().x() < 0) out[1] = stable.front();
  return out;
}

std::array<Stated, 2> poincare_reference_points(const SystemParamsd& params, const ForcingProfile& profile,
                                                const IntegratorSettingsd& settings, const BasinSettings& basin,
                                                double phase) {
  if (profile.kind != ForcingKind::steady_harmonic)
    throw Error(ErrorCode::wrong_kind, "stroboscopic references need a steady harmonic profile");
  profile.validate();
  const auto eq = attracting_equilibria(params);
  if (!eq[0] || !eq[1]) throw Error(ErrorCode::no_reference, "system lacks two attracting equilibria");
  if (profile.a0 == 0.0) return {*eq[0], *eq[1]};

  const double period = profile.period();
  const IntegratorSettingsd tight = settings.tightened(1e-12);
  const auto field = forward_field(params, profile);

  std::array<Stated, 2> out;
  for (int side = 0; side < 2; ++side) {
    Rkf45<double> stepper(tight);
    Stated y = *eq[side];
    double t = phase;
    bool converged = false;
    for (int k = 1; k <= basin.n_settle + basin.max_reference_periods; ++k) {
      const Stated before = y;
      if (stepper.advance(field, t, phase + k * period, y) != TerminalStatus::reached_t_final)
        throw Error(ErrorCode::no_reference, "stroboscopic settling left the admissible region");
      if (k > basin.n_settle && (y - before).norm() < basin.reference_tol) {
        out[side] = (y + before) / 2;
        converged = true;
        break;
      }
    }
    if (!converged) throw Error(ErrorCode::no_reference, "stroboscopic map did not settle within budget");
  }
  return out;
}

AttractorClassifier::AttractorClassifier(const SystemParamsd& params, const ForcingProfile& profile,
                                         const IntegratorSettingsd& settings, const BasinSettings& basin)
    : params_(params), profile_(profile), settings_(settings), basin_(basin) {
  params_.validate();
  profile_.validate();
  settings_.validate();
  switch (profile.kind) {
    case ForcingKind::zero:
      break;
    case ForcingKind::steady_harmonic:
      forced_final_ = true;
      final_profile_ = profile;
      break;
    case ForcingKind::ramp_harmonic:
      t_transient_ = profile.t_end;
      if (profile.ramp == RampDirection::on) {
        forced_final_ = true;
        final_profile_ = ForcingProfile::steady_harmonic(profile.a0, profile.omega);
      }
      break;
    case ForcingKind::accelerogram:
      t_transient_ = profile.t_end;
      break;
  }
  if (forced_final_) {
    const auto pts = poincare_reference_points(params_, final_profile_, settings_, basin_, t_transient_);
    refs_ = {pts[0], pts[1]};
  } else {
    refs_ = attracting_equilibria(params_);
  }
}

BasinLabel AttractorClassifier::nearest(const Stated& state, double radius) const {
  BasinLabel best = BasinLabel::undecided;
  double best_d = radius;
  for (int k = 0; k < 2; ++k) {
    if (!refs_[k]) continue;
    const double d = (state - *refs_[k]).norm();
    if (d < best_d) {
      best_d = d;
      best = k == 0 ? BasinLabel::plus : BasinLabel::minus;
    }
  }
  return best;
}

BasinLabel AttractorClassifier::classify_unforced(const Stated& state, double t0) const {
  const ForcingProfile none = ForcingProfile::zero();
  Rkf45<double> stepper(settings_);
  BasinLabel candidate = nearest(state, basin_.eps_conv);
  double since = t0;
  BasinLabel decided = BasinLabel::undecided;

  auto observe = [&](double t, const Stated& y) {
    const BasinLabel here = nearest(y, basin_.eps_conv);
    if (here != candidate) {
      candidate = here;
      since = t;
    }
    if (candidate != BasinLabel::undecided && t - since >= basin_.confirm_interval) {
      decided = candidate;
      return false;
    }
    return true;
  };

  double t = t0;
  Stated y = state;
  const TerminalStatus status = stepper.advance(forward_field(params_, none), t, t0 + basin_.t_max, y, observe);
  if (status == TerminalStatus::escaped) return BasinLabel::escaped;
  return decided;
}

BasinLabel AttractorClassifier::classify_stroboscopic(const Stated& state, double t0) const {
  Rkf45<double> stepper(settings_);
  const double period = final_profile_.period();
  const auto field = forward_field(params_, final_profile_);
  double t = t0;
  Stated y = state;
  for (int k = 1; k * period <= basin_.t_max; ++k) {
    const TerminalStatus status = stepper.advance(field, t, t0 + k * period, y);
    if (status == TerminalStatus::escaped) return BasinLabel::escaped;
    if (status != TerminalStatus::reached_t_final) return BasinLabel::undecided;
    const BasinLabel close = nearest(y, basin_.eps_conv);
    if (close != BasinLabel::undecided) return close;
    if (k >= basin_.n_settle) {
      const BasinLabel settled = nearest(y, basin_.rejection_radius);
      if (settled != BasinLabel::undecided) return settled;
    }
  }
  return BasinLabel::undecided;
}

BasinLabel AttractorClassifier::classify_final(const Stated& state) const {
  return forced_final_ ? classify_stroboscopic(state, t_transient_) : classify_unforced(state, t_transient_);
}

BasinLabel AttractorClassifier::operator()(const Stated& ic) const {
  if (!is_finite(ic)) throw Error(ErrorCode::invalid_state, "non-finite initial condition");
  Stated state = ic;
  if (t_transient_ > 0) {
    const auto end = flow(params_, profile_, ic, 0.0, t_transient_, settings_);
    if (end.status == TerminalStatus::escaped) return BasinLabel::escaped;
    if (end.status != TerminalStatus::reached_t_final) return BasinLabel::undecided;
    state = end.state;
  }
  return classify_final(state);
}

BasinLabel classify_ic(const SystemParamsd& params, const ForcingProfile& profile, const Stated& ic,
                       const IntegratorSettingsd& settings, const BasinSettings& basin) {
  return AttractorClassifier(params, profile, settings, basin)(ic);
}

BasinGrid basin_grid(const SystemParamsd& params, const ForcingProfile& profile, const PhaseWindow& window,
                     const IntegratorSettingsd& settings, const BasinSettings& basin) {
  window.validate();
  const AttractorClassifier classify(params, profile, settings, basin);
  BasinGrid grid{window, std::vector<BasinLabel>(static_cast<std::size_t>(window.nx) * window.nv)};
  // One work item per row keeps scheduling overhead negligible.
  parallel_for(static_cast<std::size_t>(window.nv), basin.jobs, [&](std::size_t j) {
    for (int i = 0; i < window.nx; ++i)
      grid.labels[j * window.nx + i] = classify(window.cell_center(i, static_cast<int>(j)));
  });
  return grid;
}

}  // namespace transient
