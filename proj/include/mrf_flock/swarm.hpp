#ifndef MRF_FLOCK_SWARM_HPP
#define MRF_FLOCK_SWARM_HPP

// Lock-step swarm simulation. Every tick all robots plan against one frozen
// snapshot, then every robot executes its own chosen action for the whole
// horizon.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mrf_flock/dynamics.hpp"
#include "mrf_flock/energy.hpp"
#include "mrf_flock/inference.hpp"
#include "mrf_flock/metrics.hpp"
#include "mrf_flock/mrf.hpp"

namespace mrf_flock {

struct Placement {
  enum class Kind { uniform_box, explicit_states };
  Kind kind = Kind::uniform_box;
  Vec3 box_min{-10.0, -10.0, 0.0};
  Vec3 box_max{10.0, 10.0, 0.0};
  double min_separation = 0.0;  // rejection-sampled spacing for uniform_box
  std::vector<Vec3> positions;   // explicit_states
  std::vector<Vec3> velocities;  // explicit_states, optional (zero when empty)

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct SwarmConfig {
  std::size_t n_robots = 10;
  int dims = 2;
  std::size_t k = 3;
  double dt = 0.2;
  Vec3 u_max{1.0, 1.0, 1.0};
  Vec3 d_u{0.5, 0.5, 0.5};
  double v_max = 1.0;
  MorseParams morse;
  bool roost_enabled = true;
  RoostParams roost;
  CouplingParams coupling;
  double tol = 1e-4;
  std::size_t max_sweeps = 50;
  UpdateOrder order = UpdateOrder::sequential;
  Placement placement;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_robots < 1) throw InvalidArgument("swarm.n_robots", "must be at least 1");
    if (dims != 2 && dims != 3) throw InvalidArgument("swarm.dims", "must be 2 or 3");
    if (k >= n_robots) throw InvalidArgument("swarm.k", "must be smaller than n_robots");
    if (!(dt > 0.0)) throw InvalidArgument("swarm.dt", "must be positive");
    if (!(v_max > 0.0)) throw InvalidArgument("swarm.v_max", "must be positive");
    morse.validate();
    if (roost_enabled) roost.validate();
    coupling.validate();
    if (!(tol > 0.0)) throw InvalidArgument("swarm.tol", "must be positive");
    if (max_sweeps < 1) throw InvalidArgument("swarm.max_sweeps", "must be at least 1");
    (void)build_action_space(u_max, d_u, dims);
    if (placement.kind == Placement::Kind::explicit_states) {
      if (placement.positions.size() != n_robots)
        throw InvalidArgument("swarm.placement.positions", "needs one entry per robot");
      if (!placement.velocities.empty() && placement.velocities.size() != n_robots)
        throw InvalidArgument("swarm.placement.velocities", "needs one entry per robot or none");
      for (const auto& v : placement.velocities)
        if (v.norm() > v_max + 1e-9) throw InvalidArgument("swarm.placement.velocities", "exceeds v_max");
    } else {
      for (int d = 0; d < dims; ++d)
        if (!(placement.box_max[d] >= placement.box_min[d]))
          throw InvalidArgument("swarm.placement.box_max", "must not be below box_min");
      if (!(placement.min_separation >= 0.0))
        throw InvalidArgument("swarm.placement.min_separation", "must be non-negative");
    }
  }

  EnergyModel energy_model() const {
    EnergyModel e;
    e.morse = morse;
    e.roost_enabled = roost_enabled;
    e.roost = roost;
    e.coupling = coupling;
    return e;
  }

  PlanOptions plan_options() const { return PlanOptions{tol, max_sweeps, order, false}; }

  ActionSpace action_space() const { return build_action_space(u_max, d_u, dims); }

  friend bool operator==(const SwarmConfig&, const SwarmConfig&) = default;
};

struct SwarmWorld {
  std::vector<FlatState> robots;
  SwarmConfig config;
  std::size_t tick = 0;
  double time = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Outcome of one robot's planning step.
struct RobotPlan {
  std::size_t robot = 0;
  ControlAction action;
  std::size_t sweeps = 0;
  double kl_final = 0.0;
  double wall_time = 0.0;
  bool converged = false;
  std::size_t pair_terms = 0;
};

/// Constant-acceleration state propagation over dt.
inline FlatState integrate(const FlatState& x, const ControlAction& u, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt", "must be positive");
  const Vec3 half_u = 0.5 * u.acceleration;
  FlatState out;
  for (int d = 0; d < 3; ++d) {
    out.position[d] = x.position[d] + x.velocity[d] * dt + half_u[d] * dt * dt;
    out.velocity[d] = x.velocity[d] + 2.0 * half_u[d] * dt;
  }
  out.time = x.time + dt;
  return out;
}

/// Initial world from the placement settings; uniform placement draws from the config seed.
inline SwarmWorld make_world(const SwarmConfig& config) {
  config.validate();
  SwarmWorld world;
  world.config = config;
  world.rng_seed = config.seed;
  const auto& pl = config.placement;
  world.robots.resize(config.n_robots);
  if (pl.kind == Placement::Kind::explicit_states) {
    for (std::size_t i = 0; i < config.n_robots; ++i) {
      world.robots[i].position = pl.positions[i];
      if (!pl.velocities.empty()) world.robots[i].velocity = pl.velocities[i];
    }
  } else {
    Rng rng(config.seed);
    constexpr int kMaxAttempts = 100000;
    for (std::size_t i = 0; i < config.n_robots; ++i) {
      int attempts = 0;
      for (;;) {
        Vec3 p = Vec3::Zero();
        for (int d = 0; d < config.dims; ++d) p[d] = rng.uniform(pl.box_min[d], pl.box_max[d]);
        bool ok = true;
        for (std::size_t j = 0; j < i && ok; ++j)
          ok = (world.robots[j].position - p).norm() >= pl.min_separation;
        if (ok) {
          world.robots[i].position = p;
          break;
        }
        if (++attempts == kMaxAttempts)
          throw InvalidArgument("swarm.placement.min_separation", "cannot place robots that far apart");
      }
    }
  }
  if (config.dims == 2)
    for (auto& r : world.robots) {
      r.position.z() = 0.0;
      r.velocity.z() = 0.0;
    }
  return world;
}

/// Plans robot `root` against a snapshot; a pure function of its arguments.
inline PlanResult plan_robot(std::span<const FlatState> snapshot, std::size_t root, const SwarmConfig& config,
                             const ActionSpace& actions) {
  const Neighborhood nb =
      build_neighborhood(snapshot, root, config.k, actions, config.v_max, config.energy_model(), config.dt);
  return plan(nb, config.plan_options());
}

/// Worker count for per-tick planning: MRF_FLOCK_THREADS if set and positive,
/// otherwise the hardware concurrency.
inline std::size_t planning_threads() {
  if (const char* env = std::getenv("MRF_FLOCK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<unsigned>(1, std::thread::hardware_concurrency());
}

struct StepResult {
  SwarmWorld world;
  std::vector<RobotPlan> plans;
};

inline StepResult step(const SwarmWorld& world, std::size_t threads = planning_threads()) {
  const SwarmConfig& config = world.config;
  const ActionSpace actions = config.action_space();
  const std::vector<FlatState> snapshot = world.robots;
  const std::size_t n = snapshot.size();

  std::vector<RobotPlan> plans(n);
  auto plan_one = [&](std::size_t r) {
    const PlanResult res = plan_robot(snapshot, r, config, actions);
    auto& out = plans[r];
    out.robot = r;
    out.action = res.trajectory.action;
    out.sweeps = res.diagnostics.sweeps_used;
    out.kl_final = res.diagnostics.final_kl();
    out.wall_time = res.diagnostics.wall_time;
    out.converged = res.diagnostics.converged;
    out.pair_terms = res.diagnostics.pair_terms;
  };

  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
  if (threads == 1) {
    for (std::size_t r = 0; r < n; ++r) plan_one(r);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t r = t; r < n; r += threads) plan_one(r);
      });
  }

  StepResult result{world, std::move(plans)};
  for (std::size_t r = 0; r < n; ++r) {
    FlatState next = integrate(snapshot[r], result.plans[r].action, config.dt);
    if (config.dims == 2) {
      next.position.z() = 0.0;
      next.velocity.z() = 0.0;
    }
    result.world.robots[r] = next;
  }
  ++result.world.tick;
  result.world.time = static_cast<double>(result.world.tick) * config.dt;
  return result;
}

using Observer = std::function<void(const SwarmWorld&, std::span<const RobotPlan>)>;

inline double default_fragmentation_threshold(const SwarmConfig& config) {
  return 2.0 * morse_equilibrium(config.morse);
}

inline std::vector<PlanStats> plan_stats(std::span<const RobotPlan> plans) {
  std::vector<PlanStats> out;
  out.reserve(plans.size());
  for (const auto& p : plans) out.push_back(PlanStats{p.sweeps, p.wall_time});
  return out;
}

/// Runs `horizon_ticks` ticks. Record t describes the snapshot at tick t
/// together with the plans made from it; the last record is the final world
/// with no plans, so horizon_ticks + 1 records come back. Observers are
/// called with the same (world, plans) pairs.
inline std::vector<MetricsRecord> run(const SwarmConfig& config, std::size_t horizon_ticks,
                                      std::span<const Observer> observers = {},
                                      std::size_t threads = planning_threads(),
                                      std::optional<double> fragmentation_threshold = std::nullopt) {
  SwarmWorld world = make_world(config);
  const double threshold = fragmentation_threshold.value_or(default_fragmentation_threshold(config));
  std::vector<MetricsRecord> records;
  records.reserve(horizon_ticks + 1);
  for (std::size_t t = 0; t < horizon_ticks; ++t) {
    StepResult next = step(world, threads);
    const auto stats = plan_stats(next.plans);
    records.push_back(compute_metrics(world.tick, world.time, world.robots, stats, threshold));
    for (const auto& obs : observers) obs(world, next.plans);
    world = std::move(next.world);
  }
  records.push_back(compute_metrics(world.tick, world.time, world.robots, {}, threshold));
  for (const auto& obs : observers) obs(world, {});
  return records;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_SWARM_HPP
