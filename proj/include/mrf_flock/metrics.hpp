#ifndef MRF_FLOCK_METRICS_HPP
#define MRF_FLOCK_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mrf_flock/dynamics.hpp"
#include "mrf_flock/vicsek.hpp"

namespace mrf_flock {

/// Per-robot planning statistics of one tick.
struct PlanStats {
  std::size_t sweeps = 0;
  double wall_time = 0.0;
};

struct MetricsRecord {
  std::size_t tick = 0;
  double time = 0.0;
  // pairwise quantities are empty for fewer than two robots
  std::optional<double> mean_pairwise_distance;
  std::optional<double> mean_nn_distance;
  std::optional<double> min_pairwise_distance;
  std::optional<double> velocity_disagreement;  // mean over pairs of ||v_i - v_j||
  double order_parameter = 0.0;
  std::size_t n_components = 1;
  std::vector<std::size_t> plan_sweeps;
  std::vector<double> plan_wall_time;

  std::optional<double> mean_plan_sweeps() const {
    if (plan_sweeps.empty()) return std::nullopt;
    return static_cast<double>(std::accumulate(plan_sweeps.begin(), plan_sweeps.end(), std::size_t{0})) /
           static_cast<double>(plan_sweeps.size());
  }
  std::optional<double> mean_plan_wall_time() const {
    if (plan_wall_time.empty()) return std::nullopt;
    return std::accumulate(plan_wall_time.begin(), plan_wall_time.end(), 0.0) /
           static_cast<double>(plan_wall_time.size());
  }
};

/// Number of connected components when robots closer than `threshold` are linked.
inline std::size_t count_components(std::span<const FlatState> states, double threshold) {
  const std::size_t n = states.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((states[i].position - states[j].position).norm() < threshold) {
        const std::size_t ri = find(i), rj = find(j);
        if (ri != rj) {
          parent[ri] = rj;
          --components;
        }
      }
  return components;
}

inline MetricsRecord compute_metrics(std::size_t tick, double time, std::span<const FlatState> states,
                                     std::span<const PlanStats> plans, double threshold) {
  if (states.empty()) throw InvalidArgument("states", "must not be empty");
  MetricsRecord rec;
  rec.tick = tick;
  rec.time = time;
  rec.order_parameter = order_parameter(states);
  rec.n_components = count_components(states, threshold);
  for (const auto& p : plans) {
    rec.plan_sweeps.push_back(p.sweeps);
    rec.plan_wall_time.push_back(p.wall_time);
  }

  const std::size_t n = states.size();
  if (n < 2) return rec;
  std::vector<double> nearest(n, HUGE_VAL);
  double sum_dist = 0.0, sum_vel = 0.0, min_dist = HUGE_VAL;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (states[i].position - states[j].position).norm();
      sum_dist += d;
      min_dist = std::min(min_dist, d);
      nearest[i] = std::min(nearest[i], d);
      nearest[j] = std::min(nearest[j], d);
      sum_vel += (states[i].velocity - states[j].velocity).norm();
    }
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  rec.mean_pairwise_distance = sum_dist / pairs;
  rec.min_pairwise_distance = min_dist;
  rec.velocity_disagreement = sum_vel / pairs;
  rec.mean_nn_distance = std::accumulate(nearest.begin(), nearest.end(), 0.0) / static_cast<double>(n);
  return rec;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_METRICS_HPP
