#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Core>

#include "transient/error.hpp"

namespace transient {

template <typename Scalar>
using State = Eigen::Matrix<Scalar, 2, 1>;
using Stated = State<double>;

template <typename Scalar>
using Jacobian = Eigen::Matrix<Scalar, 2, 2>;

/// Constants of the two-well oscillator
///   m x'' + c x' - k1 x + k2 x^2 + k3 x^3 = F(t).
template <typename Scalar = double>
struct SystemParams {
  Scalar m = 1;
  Scalar c = Scalar(0.25);
  Scalar k1 = 1;
  Scalar k2 = 1;
  Scalar k3 = 1;

  void validate() const {
    using std::isfinite;
    if (!(m > 0) || !isfinite(m)) throw Error(ErrorCode::invalid_argument, "mass must be positive");
    if (!(c >= 0) || !isfinite(c)) throw Error(ErrorCode::invalid_argument, "damping must be non-negative");
    if (!isfinite(k1) || !isfinite(k2) || !isfinite(k3))
      throw Error(ErrorCode::invalid_argument, "stiffness coefficients must be finite");
  }

  template <typename Other>
  SystemParams<Other> cast() const {
    return {Other(m), Other(c), Other(k1), Other(k2), Other(k3)};
  }
};
using SystemParamsd = SystemParams<double>;

enum class FixedPointKind { saddle, stable_node, stable_focus, unstable_node, unstable_focus, center_degenerate };

template <typename Scalar>
struct FixedPointInfo {
  State<Scalar> location;
  std::array<std::complex<Scalar>, 2> eigenvalues;
  FixedPointKind kind;

  bool attracting() const { return kind == FixedPointKind::stable_node || kind == FixedPointKind::stable_focus; }
};

template <typename Scalar>
bool is_finite(const State<Scalar>& s) {
  using std::isfinite;
  return isfinite(s.x()) && isfinite(s.y());
}

/// Restoring force -k1 x + k2 x^2 + k3 x^3 moved to the right-hand side.
template <typename Scalar>
Scalar restoring(const SystemParams<Scalar>& p, Scalar x) {
  return x * (p.k1 - x * (p.k2 + p.k3 * x));
}

// Hot path used by the integrator, which checks finiteness once per step.
template <typename Scalar>
State<Scalar> rhs_unchecked(const SystemParams<Scalar>& p, const State<Scalar>& s, Scalar force) {
  const Scalar x = s.x();
  const Scalar v = s.y();
  return State<Scalar>(v, (force - p.c * v + restoring(p, x)) / p.m);
}

/// First-order vector field (x' = v, v' = (F - c v + k1 x - k2 x^2 - k3 x^3) / m).
template <typename Scalar>
State<Scalar> rhs(const SystemParams<Scalar>& p, const State<Scalar>& s, Scalar force) {
  if (!is_finite(s)) throw Error(ErrorCode::invalid_state, "non-finite state");
  return rhs_unchecked(p, s, force);
}

template <typename Scalar>
Scalar potential(const SystemParams<Scalar>& p, Scalar x) {
  const Scalar x2 = x * x;
  return -p.k1 * x2 / 2 + p.k2 * x2 * x / 3 + p.k3 * x2 * x2 / 4;
}

template <typename Scalar>
Scalar energy(const SystemParams<Scalar>& p, const State<Scalar>& s) {
  if (!is_finite(s)) throw Error(ErrorCode::invalid_state, "non-finite state");
  return p.m * s.y() * s.y() / 2 + potential(p, s.x());
}

/// Effective stiffness dv'/dx * m at displacement x.
template <typename Scalar>
Scalar stiffness_slope(const SystemParams<Scalar>& p, Scalar x) {
  return p.k1 - 2 * p.k2 * x - 3 * p.k3 * x * x;
}

template <typename Scalar>
Jacobian<Scalar> jacobian(const SystemParams<Scalar>& p, const State<Scalar>& s) {
  Jacobian<Scalar> j;
  j << Scalar(0), Scalar(1), stiffness_slope(p, s.x()) / p.m, -p.c / p.m;
  return j;
}

namespace detail {

// Roots of a x^2 + b x + c without cancellation; empty when complex.
template <typename Scalar>
std::vector<Scalar> real_quadratic_roots(Scalar a, Scalar b, Scalar c) {
  using std::sqrt;
  if (a == 0) {
    if (b == 0) return {};
    return {-c / b};
  }
  const Scalar disc = b * b - 4 * a * c;
  if (disc < 0) return {};
  const Scalar q = -(b + std::copysign(sqrt(disc), b)) / 2;
  if (q == 0) return {Scalar(0), Scalar(0)};
  return {q / a, c / q};
}

}  // namespace detail

/// Eigenvalues of the 2x2 linearisation, roots of lambda^2 + (c/m) lambda - s/m.
template <typename Scalar>
std::array<std::complex<Scalar>, 2> linear_eigenvalues(const SystemParams<Scalar>& p, Scalar x) {
  using std::sqrt;
  const Scalar trace = -p.c / p.m;
  const Scalar det = -stiffness_slope(p, x) / p.m;
  const Scalar disc = trace * trace - 4 * det;
  if (disc >= 0) {
    // lambda^2 - trace*lambda + det: stable root formula.
    const Scalar q = (trace + std::copysign(sqrt(disc), trace == 0 ? Scalar(1) : trace)) / 2;
    if (q == 0) return {std::complex<Scalar>(0), std::complex<Scalar>(0)};
    std::array<Scalar, 2> r{q, det / q};
    if (r[0] < r[1]) std::swap(r[0], r[1]);
    return {std::complex<Scalar>(r[0]), std::complex<Scalar>(r[1])};
  }
  const Scalar im = sqrt(-disc) / 2;
  return {std::complex<Scalar>(trace / 2, im), std::complex<Scalar>(trace / 2, -im)};
}

template <typename Scalar>
FixedPointKind classify(const std::array<std::complex<Scalar>, 2>& ev) {
  const bool complex_pair = ev[0].imag() != 0;
  const Scalar re0 = ev[0].real();
  const Scalar re1 = ev[1].real();
  if (!complex_pair && re0 * re1 < 0) return FixedPointKind::saddle;
  if (re0 == 0 || re1 == 0) return FixedPointKind::center_degenerate;
  if (re0 < 0 && re1 < 0) return complex_pair ? FixedPointKind::stable_focus : FixedPointKind::stable_node;
  return complex_pair ? FixedPointKind::unstable_focus : FixedPointKind::unstable_node;
}

/// All equilibria, sorted by displacement. The cubic k3 x^3 + k2 x^2 - k1 x has
/// the root x = 0 for every parameter set, so the rest comes from a quadratic.
template <typename Scalar>
std::vector<FixedPointInfo<Scalar>> fixed_points(const SystemParams<Scalar>& p) {
  p.validate();
  if (p.k1 == 0 && p.k2 == 0 && p.k3 == 0)
    throw Error(ErrorCode::degenerate_system, "all stiffness coefficients are zero");

  std::vector<Scalar> roots{Scalar(0)};
  for (Scalar r : detail::real_quadratic_roots(p.k3, p.k2, -p.k1)) {
    bool duplicate = false;
    for (Scalar q : roots) duplicate = duplicate || q == r;
    if (!duplicate) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());

  std::vector<FixedPointInfo<Scalar>> out;
  out.reserve(roots.size());
  for (Scalar x : roots) {
    const auto ev = linear_eigenvalues(p, x);
    out.push_back({State<Scalar>(x, Scalar(0)), ev, classify<Scalar>(ev)});
  }
  return out;
}

inline const char* to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::saddle: return "saddle";
    case FixedPointKind::stable_node: return "stable-node";
    case FixedPointKind::stable_focus: return "stable-focus";
    case FixedPointKind::unstable_node: return "unstable-node";
    case FixedPointKind::unstable_focus: return "unstable-focus";
    case FixedPointKind::center_degenerate: return "center-degenerate";
  }
  return "unknown";
}

}  // namespace transient
