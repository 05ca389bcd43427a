#pragma once

#include <charconv>
#include <cmath>
#include <memory>
#include <string>

#include "transient/accelerogram.hpp"
#include "transient/error.hpp"

namespace transient {

enum class ForcingKind { zero, steady_harmonic, ramp_harmonic, accelerogram };
enum class RampDirection { off, on };

/// Right-hand-side excitation a(t) p(t). Harmonic kinds use p(t) = cos(omega t);
/// the accelerogram kind is the whole force (p = 1) scaled by `scale`.
struct ForcingProfile {
  ForcingKind kind = ForcingKind::zero;
  double a0 = 0.0;
  double omega = 3.0;
  double t_end = 0.0;
  RampDirection ramp = RampDirection::off;
  std::shared_ptr<const Accelerogram> samples;
  double scale = 1.0;

  static ForcingProfile zero() { return {}; }

  static ForcingProfile steady_harmonic(double a0, double omega) {
    ForcingProfile p;
    p.kind = ForcingKind::steady_harmonic;
    p.a0 = a0;
    p.omega = omega;
    return p;
  }

  /// Amplitude a0 before t = 0, linear decay to zero at t_end, zero after.
  static ForcingProfile switching_off(double a0, double omega, double t_end) {
    ForcingProfile p = steady_harmonic(a0, omega);
    p.kind = ForcingKind::ramp_harmonic;
    p.t_end = t_end;
    p.ramp = RampDirection::off;
    return p;
  }

  static ForcingProfile switching_on(double a0, double omega, double t_end) {
    ForcingProfile p = switching_off(a0, omega, t_end);
    p.ramp = RampDirection::on;
    return p;
  }

  static ForcingProfile accelerogram(std::shared_ptr<const Accelerogram> record, double scale = 1.0) {
    ForcingProfile p;
    p.kind = ForcingKind::accelerogram;
    p.samples = std::move(record);
    p.scale = scale;
    p.t_end = p.samples && !p.samples->empty() ? p.samples->stop() : 0.0;
    return p;
  }

  double period() const { return 2.0 * M_PI / omega; }

  void validate() const {
    if (!(t_end >= 0)) throw Error(ErrorCode::invalid_argument, "transient duration must be non-negative");
    if ((kind == ForcingKind::steady_harmonic || kind == ForcingKind::ramp_harmonic) && !(omega > 0))
      throw Error(ErrorCode::invalid_argument, "harmonic forcing needs omega > 0");
    if (kind == ForcingKind::accelerogram && (!samples || samples->empty()))
      throw Error(ErrorCode::missing_data, "accelerogram forcing has no samples");
  }

  /// Amplitude envelope a(t) of the harmonic kinds.
  double amplitude(double t) const {
    if (kind == ForcingKind::steady_harmonic) return a0;
    if (kind != ForcingKind::ramp_harmonic) return 0.0;
    const bool off = ramp == RampDirection::off;
    const double before = off ? a0 : 0.0;
    const double after = off ? 0.0 : a0;
    if (t < 0) return before;
    if (t_end == 0 || t > t_end) return after;
    const double s = t / t_end;
    return off ? a0 * (1.0 - s) : a0 * s;
  }

  std::string description() const;
};

template <typename Scalar>
Scalar force_at(const ForcingProfile& p, Scalar t) {
  using std::cos;
  switch (p.kind) {
    case ForcingKind::zero:
      return Scalar(0);
    case ForcingKind::steady_harmonic:
    case ForcingKind::ramp_harmonic:
      return Scalar(p.amplitude(double(t))) * cos(Scalar(p.omega) * t);
    case ForcingKind::accelerogram:
      if (!p.samples || p.samples->empty()) throw Error(ErrorCode::missing_data, "accelerogram forcing has no samples");
      return Scalar(p.scale * p.samples->interpolate(double(t)));
  }
  return Scalar(0);
}

/// A profile seen in reversed time: value(tau) = inner(pivot - tau).
template <typename Inner>
struct TimeReversed {
  Inner inner;
  double pivot = 0.0;
};
using TimeReversedForcing = TimeReversed<ForcingProfile>;

template <typename Inner>
TimeReversed<Inner> reverse(const Inner& profile, double t_end) {
  if (!(t_end >= 0)) throw Error(ErrorCode::invalid_argument, "reversal pivot must be non-negative");
  return {profile, t_end};
}

template <typename Scalar, typename Inner>
Scalar force_at(const TimeReversed<Inner>& r, Scalar tau) {
  return force_at(r.inner, Scalar(r.pivot) - tau);
}

inline std::string ForcingProfile::description() const {
  auto num = [](double v) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    return std::string(buf, end);
  };
  switch (kind) {
    case ForcingKind::zero:
      return "zero";
    case ForcingKind::steady_harmonic:
      return "steady-harmonic a0=" + num(a0) + " omega=" + num(omega);
    case ForcingKind::ramp_harmonic:
      return std::string(ramp == RampDirection::off ? "switching-off" : "switching-on") + " a0=" + num(a0) +
             " omega=" + num(omega) + " t_end=" + num(t_end);
    case ForcingKind::accelerogram:
      return "accelerogram scale=" + num(scale) + " t_end=" + num(t_end) +
             (samples && !samples->source.empty() ? " source=" + samples->source : std::string());
  }
  return "unknown";
}

}  // namespace transient
