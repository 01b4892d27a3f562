#ifndef MRF_FLOCK_DYNAMICS_HPP
#define MRF_FLOCK_DYNAMICS_HPP

// Flat double-integrator model: the state is (position, velocity), the control
// input is the acceleration, and constant-input motion over a horizon is a
// closed-form quadratic per axis.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mrf_flock/common.hpp"

namespace mrf_flock {

struct FlatState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double time = 0.0;

  bool finite() const { return all_finite(position) && all_finite(velocity) && std::isfinite(time); }
  double speed() const { return velocity.norm(); }

  friend bool operator==(const FlatState& a, const FlatState& b) {
    return a.position == b.position && a.velocity == b.velocity && a.time == b.time;
  }
};

struct ControlAction {
  Vec3 acceleration = Vec3::Zero();

  friend bool operator==(const ControlAction& a, const ControlAction& b) {
    return a.acceleration == b.acceleration;
  }
};

/// Per-axis quadratic l(t) = c0 + c1 t + c2 t^2, valid on [0, duration].
struct Trajectory {
  // coefficients[axis] = {c0, c1, c2}, constant term first
  std::array<std::array<double, 3>, 3> coefficients{};
  double duration = 0.0;
  ControlAction action;
  FlatState origin_state;

  Vec3 position(double t) const {
    Vec3 p;
    for (int d = 0; d < 3; ++d) {
      const auto& c = coefficients[d];
      p[d] = c[0] + c[1] * t + c[2] * t * t;
    }
    return p;
  }

  Vec3 velocity(double t) const {
    Vec3 v;
    for (int d = 0; d < 3; ++d) {
      const auto& c = coefficients[d];
      v[d] = c[1] + 2.0 * c[2] * t;
    }
    return v;
  }

  /// Second derivative; constant, and equal to the action by construction.
  Vec3 acceleration() const {
    Vec3 a;
    for (int d = 0; d < 3; ++d) a[d] = 2.0 * coefficients[d][2];
    return a;
  }
};

struct ActionSpace {
  std::vector<ControlAction> actions;
  std::array<std::size_t, 3> counts{1, 1, 1};  // actions per axis

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
};

namespace detail {

inline std::vector<double> axis_values(double u_max, double step, std::size_t axis) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidArgument("d_u[" + std::to_string(axis) + "]", "discretization step must be positive");
  if (!(u_max >= 0.0) || !std::isfinite(u_max))
    throw InvalidArgument("u_max[" + std::to_string(axis) + "]", "must be non-negative");
  const double ratio = u_max / step;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) > 1e-9 * std::max(1.0, ratio))
    throw InvalidArgument("u_max[" + std::to_string(axis) + "]",
                          "must be an integer multiple of d_u");
  const auto half = static_cast<long>(whole);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(2 * half + 1));
  // built from integer multiples so that v and -v are exact negatives
  for (long i = -half; i <= half; ++i) values.push_back(static_cast<double>(i) * step);
  return values;
}

}  // namespace detail

/// Cartesian grid of accelerations in [-u_max, u_max] per axis, lexicographic in
/// (x, y, z). With dims == 2 the z axis carries only the zero action.
inline ActionSpace build_action_space(const Vec3& u_max, const Vec3& d_u, int dims) {
  if (dims != 2 && dims != 3) throw InvalidArgument("dims", "must be 2 or 3");
  std::array<std::vector<double>, 3> values;
  for (std::size_t d = 0; d < 3; ++d) {
    if (d == 2 && dims == 2)
      values[d] = {0.0};
    else
      values[d] = detail::axis_values(u_max[static_cast<Eigen::Index>(d)],
                                      d_u[static_cast<Eigen::Index>(d)], d);
  }
  ActionSpace space;
  for (std::size_t d = 0; d < 3; ++d) space.counts[d] = values[d].size();
  space.actions.reserve(values[0].size() * values[1].size() * values[2].size());
  for (double x : values[0])
    for (double y : values[1])
      for (double z : values[2]) space.actions.push_back(ControlAction{Vec3(x, y, z)});
  return space;
}

inline Trajectory make_trajectory(const FlatState& x, const ControlAction& u, double duration) {
  if (!(duration > 0.0)) throw InvalidArgument("duration", "must be positive");
  Trajectory traj;
  for (int d = 0; d < 3; ++d)
    traj.coefficients[d] = {x.position[d], x.velocity[d], 0.5 * u.acceleration[d]};
  traj.duration = duration;
  traj.action = u;
  traj.origin_state = x;
  return traj;
}

/// State reached after following `traj` for dt seconds.
inline FlatState end_state(const Trajectory& traj, double dt) {
  if (!(dt >= 0.0) || dt > traj.duration)
    throw InvalidArgument("dt", "must lie in [0, duration]");
  if (dt == 0.0) return traj.origin_state;
  return FlatState{traj.position(dt), traj.velocity(dt), traj.origin_state.time + dt};
}

/// One trajectory per action whose end-of-horizon speed respects v_max. If
/// none does, the single trajectory with the smallest end speed is kept
/// (lowest action index on ties), so the result is never empty.
inline std::vector<Trajectory> build_search_space(const FlatState& x, const ActionSpace& space,
                                                  double dt, double v_max) {
  if (space.empty()) throw InvalidArgument("action_space", "must not be empty");
  std::vector<Trajectory> kept;
  kept.reserve(space.size());
  std::size_t best = 0;
  double best_speed = HUGE_VAL;
  for (std::size_t a = 0; a < space.size(); ++a) {
    Trajectory traj = make_trajectory(x, space.actions[a], dt);
    const double speed = traj.velocity(dt).norm();
    if (speed < best_speed) {
      best_speed = speed;
      best = a;
    }
    if (speed <= v_max) kept.push_back(std::move(traj));
  }
  if (kept.empty()) kept.push_back(make_trajectory(x, space.actions[best], dt));
  return kept;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_DYNAMICS_HPP
