#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "transient/error.hpp"
#include "transient/forcing.hpp"
#include "transient/model.hpp"

namespace transient {

template <typename Scalar = double>
struct IntegratorSettings {
  Scalar rel_tol = Scalar(1e-8);
  Scalar abs_tol = Scalar(1e-8);
  Scalar h_init = Scalar(1e-3);
  Scalar h_min = Scalar(1e-12);
  Scalar h_max = Scalar(0.1);
  std::int64_t max_steps = 10'000'000;
  Scalar guard_radius = Scalar(50);

  void validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
    if (!(h_min > 0) || !(h_min <= h_init) || !(h_init <= h_max))
      throw Error(ErrorCode::invalid_argument, "step sizes must satisfy 0 < h_min <= h_init <= h_max");
    if (max_steps <= 0) throw Error(ErrorCode::invalid_argument, "max_steps must be positive");
    if (!(guard_radius > 0)) throw Error(ErrorCode::invalid_argument, "guard radius must be positive");
  }

  IntegratorSettings tightened(Scalar tol) const {
    IntegratorSettings s = *this;
    s.rel_tol = std::min(rel_tol, tol);
    s.abs_tol = std::min(abs_tol, tol);
    return s;
  }
};
using IntegratorSettingsd = IntegratorSettings<double>;

enum class TerminalStatus { reached_t_final, converged, escaped, step_limit };

inline const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::reached_t_final: return "reached-t-final";
    case TerminalStatus::converged: return "converged-to-attractor";
    case TerminalStatus::escaped: return "escaped";
    case TerminalStatus::step_limit: return "step-limit";
  }
  return "unknown";
}

template <typename Scalar>
struct TimedState {
  Scalar t;
  State<Scalar> state;
};

template <typename Scalar>
struct Trajectory {
  std::vector<TimedState<Scalar>> samples;
  TerminalStatus status = TerminalStatus::reached_t_final;

  const TimedState<Scalar>& back() const { return samples.back(); }
  const State<Scalar>& final_state() const { return samples.back().state; }
};

/// Endpoint of a flow computation when the intermediate steps are not needed.
template <typename Scalar>
struct FlowResult {
  State<Scalar> state;
  Scalar t;
  TerminalStatus status;
};

/// Runge-Kutta-Fehlberg 4(5) stepper. The fifth-order solution is propagated;
/// the embedded fourth-order one only feeds the error estimate. The proposed
/// step size survives between calls to advance(), so a sequence of
/// stroboscopic segments does not restart from h_init each time.
template <typename Scalar>
class Rkf45 {
 public:
  explicit Rkf45(const IntegratorSettings<Scalar>& settings) : settings_(settings), h_(settings.h_init) {
    settings_.validate();
  }

  std::int64_t steps() const { return steps_; }

  /// Integrates field(t, y) from t to t1 (t1 >= t), landing exactly on t1.
  /// observe(t, y) runs after each accepted step; returning false stops the
  /// integration with status `converged`.
  template <typename Field, typename Observer>
  TerminalStatus advance(Field&& field, Scalar& t, Scalar t1, State<Scalar>& y, Observer&& observe) {
    using std::abs;
    using std::pow;
    using std::sqrt;
    const auto& s = settings_;
    if (!is_finite(y)) throw Error(ErrorCode::invalid_state, "non-finite initial state");
    if (y.norm() > s.guard_radius) return TerminalStatus::escaped;

    while (t < t1) {
      if (steps_ >= s.max_steps) return TerminalStatus::step_limit;
      Scalar h = std::min(h_, s.h_max);
      bool clamped = false;
      if (t + h >= t1) {
        h = t1 - t;
        clamped = true;
      }

      const State<Scalar> k1 = field(t, y);
      const State<Scalar> k2 = field(t + h * c2, y + h * (a21 * k1));
      const State<Scalar> k3 = field(t + h * c3, y + h * (a31 * k1 + a32 * k2));
      const State<Scalar> k4 = field(t + h * c4, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const State<Scalar> k5 = field(t + h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State<Scalar> k6 = field(t + h * c6, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));

      const State<Scalar> y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State<Scalar> err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6);

      Scalar norm = 0;
      for (int i = 0; i < 2; ++i) {
        const Scalar scale = s.abs_tol + s.rel_tol * std::max(abs(y[i]), abs(y5[i]));
        const Scalar r = err[i] / scale;
        norm += r * r;
      }
      norm = sqrt(norm / 2);
      if (!(norm == norm)) norm = Scalar(1e10);  // NaN from blow-up inside the step

      if (norm <= 1 || h <= s.h_min) {
        t = clamped ? t1 : t + h;
        y = y5;
        ++steps_;
        const Scalar grow = norm == 0 ? Scalar(5) : std::clamp(Scalar(0.9) * pow(norm, Scalar(-0.2)), Scalar(0.2), Scalar(5));
        if (!clamped) h_ = std::max(h * grow, s.h_min);
        if (!is_finite(y) || y.norm() > s.guard_radius) return TerminalStatus::escaped;
        if (!observe(t, y)) return TerminalStatus::converged;
      } else {
        const Scalar shrink = std::clamp(Scalar(0.9) * pow(norm, Scalar(-0.2)), Scalar(0.2), Scalar(1));
        h_ = std::max(h * shrink, s.h_min);
      }
    }
    return TerminalStatus::reached_t_final;
  }

  template <typename Field>
  TerminalStatus advance(Field&& field, Scalar& t, Scalar t1, State<Scalar>& y) {
    return advance(std::forward<Field>(field), t, t1, y, [](Scalar, const State<Scalar>&) { return true; });
  }

 private:
  static constexpr Scalar c2 = Scalar(1) / 4, c3 = Scalar(3) / 8, c4 = Scalar(12) / 13, c6 = Scalar(1) / 2;
  static constexpr Scalar a21 = Scalar(1) / 4;
  static constexpr Scalar a31 = Scalar(3) / 32, a32 = Scalar(9) / 32;
  static constexpr Scalar a41 = Scalar(1932) / 2197, a42 = Scalar(-7200) / 2197, a43 = Scalar(7296) / 2197;
  static constexpr Scalar a51 = Scalar(439) / 216, a52 = Scalar(-8), a53 = Scalar(3680) / 513,
                          a54 = Scalar(-845) / 4104;
  static constexpr Scalar a61 = Scalar(-8) / 27, a62 = Scalar(2), a63 = Scalar(-3544) / 2565,
                          a64 = Scalar(1859) / 4104, a65 = Scalar(-11) / 40;
  static constexpr Scalar b1 = Scalar(16) / 135, b3 = Scalar(6656) / 12825, b4 = Scalar(28561) / 56430,
                          b5 = Scalar(-9) / 50, b6 = Scalar(2) / 55;
  // fifth-order minus fourth-order weights
  static constexpr Scalar e1 = Scalar(1) / 360, e3 = Scalar(-128) / 4275, e4 = Scalar(-2197) / 75240,
                          e5 = Scalar(1) / 50, e6 = Scalar(2) / 55;

  IntegratorSettings<Scalar> settings_;
  Scalar h_;
  std::int64_t steps_ = 0;
};

/// Forward vector field of the forced oscillator.
template <typename Scalar, typename Force>
auto forward_field(const SystemParams<Scalar>& params, const Force& force) {
  return [&params, &force](Scalar t, const State<Scalar>& y) {
    return rhs_unchecked(params, y, force_at(force, t));
  };
}

/// Reversed-time field dy/dtau = -f(y, t_end - tau).
template <typename Scalar, typename Force>
auto backward_field(const SystemParams<Scalar>& params, const TimeReversed<Force>& reversed) {
  return [&params, &reversed](Scalar tau, const State<Scalar>& y) -> State<Scalar> {
    return -rhs_unchecked(params, y, force_at(reversed, tau));
  };
}

template <typename Scalar, typename Field>
Trajectory<Scalar> integrate_field(Field&& field, const State<Scalar>& ic, Scalar t0, Scalar t1,
                                   const IntegratorSettings<Scalar>& settings) {
  if (!is_finite(ic)) throw Error(ErrorCode::invalid_state, "non-finite initial condition");
  if (!(t1 >= t0)) throw Error(ErrorCode::invalid_argument, "integration interval must satisfy t1 >= t0");
  Trajectory<Scalar> traj;
  traj.samples.push_back({t0, ic});
  Rkf45<Scalar> stepper(settings);
  Scalar t = t0;
  State<Scalar> y = ic;
  traj.status = stepper.advance(field, t, t1, y, [&traj](Scalar ts, const State<Scalar>& ys) {
    traj.samples.push_back({ts, ys});
    return true;
  });
  if (traj.status == TerminalStatus::escaped && traj.samples.back().t != t) traj.samples.push_back({t, y});
  return traj;
}

template <typename Scalar, typename Field>
FlowResult<Scalar> flow_field(Field&& field, const State<Scalar>& ic, Scalar t0, Scalar t1,
                              const IntegratorSettings<Scalar>& settings) {
  if (!is_finite(ic)) throw Error(ErrorCode::invalid_state, "non-finite initial condition");
  if (!(t1 >= t0)) throw Error(ErrorCode::invalid_argument, "integration interval must satisfy t1 >= t0");
  Rkf45<Scalar> stepper(settings);
  Scalar t = t0;
  State<Scalar> y = ic;
  const TerminalStatus status = stepper.advance(field, t, t1, y);
  return {y, t, status};
}

/// Trajectory of the forced oscillator over [t0, t1], recorded at accepted steps.
template <typename Scalar, typename Force>
Trajectory<Scalar> integrate(const SystemParams<Scalar>& params, const Force& force, const State<Scalar>& ic, Scalar t0,
                             Scalar t1, const IntegratorSettings<Scalar>& settings) {
  return integrate_field(forward_field(params, force), ic, t0, t1, settings);
}

/// Integrates the reversed system over tau in [0, t_end]; the terminal state is
/// the time-0 preimage of `ic` given at time t_end.
template <typename Scalar>
Trajectory<Scalar> integrate_backward(const SystemParams<Scalar>& params, const ForcingProfile& profile,
                                      const State<Scalar>& ic, Scalar t_end,
                                      const IntegratorSettings<Scalar>& settings) {
  const auto reversed = reverse(profile, double(t_end));
  return integrate_field(backward_field(params, reversed), ic, Scalar(0), t_end, settings);
}

template <typename Scalar, typename Force>
FlowResult<Scalar> flow(const SystemParams<Scalar>& params, const Force& force, const State<Scalar>& ic, Scalar t0,
                        Scalar t1, const IntegratorSettings<Scalar>& settings) {
  return flow_field(forward_field(params, force), ic, t0, t1, settings);
}

template <typename Scalar>
FlowResult<Scalar> flow_backward(const SystemParams<Scalar>& params, const ForcingProfile& profile,
                                 const State<Scalar>& ic, Scalar t_end, const IntegratorSettings<Scalar>& settings) {
  const auto reversed = reverse(profile, double(t_end));
  return flow_field(backward_field(params, reversed), ic, Scalar(0), t_end, settings);
}

}  // namespace transient
