#ifndef MRF_FLOCK_MRF_HPP
#define MRF_FLOCK_MRF_HPP

// A robot's local neighborhood as a complete pairwise MRF. Each member is a
// discrete variable whose domain is its list of candidate trajectories; unary
// factors score a member's end-of-horizon state, pairwise factors score every
// unordered pair of members.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "mrf_flock/dynamics.hpp"
#include "mrf_flock/energy.hpp"

namespace mrf_flock {

struct JointAssignment {
  std::vector<std::size_t> indices;  // one candidate index per member
};

class Neighborhood {
 public:
  Neighborhood() = default;

  /// Assembles a neighborhood from explicit parts. The root is member_ids[0].
  Neighborhood(std::vector<std::size_t> member_ids, std::vector<FlatState> member_states,
               std::vector<std::vector<Trajectory>> search_spaces, EnergyModel energy, double horizon)
      : member_ids_(std::move(member_ids)),
        member_states_(std::move(member_states)),
        search_spaces_(std::move(search_spaces)),
        energy_(std::move(energy)),
        horizon_(horizon) {
    if (member_ids_.empty()) throw InvalidArgument("neighborhood", "needs at least the root");
    if (member_states_.size() != member_ids_.size() || search_spaces_.size() != member_ids_.size())
      throw InvalidArgument("neighborhood", "ids, states and search spaces differ in length");
    if (!(horizon_ > 0.0)) throw InvalidArgument("neighborhood.horizon", "must be positive");
    for (std::size_t i = 0; i < member_ids_.size(); ++i)
      for (std::size_t j = i + 1; j < member_ids_.size(); ++j)
        if (member_ids_[i] == member_ids_[j]) throw InvalidArgument("neighborhood", "duplicate member id");
    end_states_.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      if (search_spaces_[i].empty())
        throw InvalidArgument("neighborhood.search_spaces", "every member needs a candidate");
      end_states_[i].reserve(search_spaces_[i].size());
      for (const auto& traj : search_spaces_[i]) end_states_[i].push_back(end_state(traj, horizon_));
    }
  }

  std::size_t size() const { return member_ids_.size(); }
  std::size_t root_id() const { return member_ids_.front(); }
  const std::vector<std::size_t>& member_ids() const { return member_ids_; }
  const std::vector<FlatState>& member_states() const { return member_states_; }
  const std::vector<std::vector<Trajectory>>& search_spaces() const { return search_spaces_; }
  const std::vector<Trajectory>& search_space(std::size_t member) const { return search_spaces_[member]; }
  std::size_t candidates(std::size_t member) const { return search_spaces_[member].size(); }
  const EnergyModel& energy() const { return energy_; }
  double horizon() const { return horizon_; }

  /// End-of-horizon state of candidate `c` of member `i`.
  const FlatState& end_state_of(std::size_t i, std::size_t c) const { return end_states_[i][c]; }

  std::size_t unary_factor_count() const { return size(); }
  std::size_t pairwise_factor_count() const { return size() * (size() - 1) / 2; }

  /// Unordered member pairs (i < j); the graph is complete.
  std::vector<std::pair<std::size_t, std::size_t>> pairwise_factors() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(pairwise_factor_count());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) out.emplace_back(i, j);
    return out;
  }

  double unary_energy(std::size_t i, std::size_t c) const { return energy_.unary(end_states_[i][c]); }

  double pairwise_energy(std::size_t i, std::size_t ci, std::size_t j, std::size_t cj) const {
    return energy_.pairwise(end_states_[i][ci], end_states_[j][cj]);
  }

  bool valid(const JointAssignment& ja) const {
    if (ja.indices.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (ja.indices[i] >= candidates(i)) return false;
    return true;
  }

 private:
  std::vector<std::size_t> member_ids_;
  std::vector<FlatState> member_states_;
  std::vector<std::vector<Trajectory>> search_spaces_;
  std::vector<std::vector<FlatState>> end_states_;
  EnergyModel energy_;
  double horizon_ = 0.0;
};

/// Indices of the k robots nearest to `root` (root excluded), nearest first;
/// equal distances resolve to the lower robot index.
inline std::vector<std::size_t> nearest_neighbors(std::span<const FlatState> states, std::size_t root,
                                                  std::size_t k) {
  if (root >= states.size()) throw InvalidArgument("root", "index out of range");
  if (k >= states.size()) throw InvalidArgument("k", "must be smaller than the swarm size");
  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(states.size() - 1);
  for (std::size_t j = 0; j < states.size(); ++j)
    if (j != root) by_distance.emplace_back((states[j].position - states[root].position).squaredNorm(), j);
  std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k),
                    by_distance.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = by_distance[i].second;
  return out;
}

/// Root plus its k nearest neighbors, each with a search space built from the
/// shared action space and the member's snapshot state.
inline Neighborhood build_neighborhood(std::span<const FlatState> world_states, std::size_t root,
                                       std::size_t k, const ActionSpace& actions, double v_max,
                                       const EnergyModel& energy, double horizon) {
  std::vector<std::size_t> ids{root};
  for (std::size_t j : nearest_neighbors(world_states, root, k)) ids.push_back(j);
  std::vector<FlatState> states;
  std::vector<std::vector<Trajectory>> spaces;
  states.reserve(ids.size());
  spaces.reserve(ids.size());
  for (std::size_t id : ids) {
    states.push_back(world_states[id]);
    spaces.push_back(build_search_space(world_states[id], actions, horizon, v_max));
  }
  return Neighborhood(std::move(ids), std::move(states), std::move(spaces), energy, horizon);
}

/// Sum of all unary and pairwise energies at the assignment's end states.
inline double neighborhood_energy(const Neighborhood& nb, const JointAssignment& ja) {
  if (!nb.valid(ja)) throw InvalidArgument("assignment", "does not match the neighborhood");
  double e = 0.0;
  for (std::size_t i = 0; i < nb.size(); ++i) e += nb.unary_energy(i, ja.indices[i]);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      e += nb.pairwise_energy(i, ja.indices[i], j, ja.indices[j]);
  return e;
}

/// Exhaustive Gibbs table over every joint assignment.
/// Flat index layout is mixed radix with the last member varying fastest.
struct JointTable {
  std::vector<std::size_t> shape;
  std::vector<double> energy;
  std::vector<double> probability;
  double log_partition = 0.0;  // ln Z

  std::size_t size() const { return probability.size(); }

  JointAssignment assignment(std::size_t flat) const {
    JointAssignment ja;
    ja.indices.assign(shape.size(), 0);
    for (std::size_t i = shape.size(); i-- > 0;) {
      ja.indices[i] = flat % shape[i];
      flat /= shape[i];
    }
    return ja;
  }
};

inline constexpr std::size_t kBruteForceLimit = 1'000'000;

inline JointTable joint_distribution_bruteforce(const Neighborhood& nb) {
  JointTable table;
  std::size_t total = 1;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    table.shape.push_back(nb.candidates(i));
    if (total > kBruteForceLimit / nb.candidates(i))
      throw InvalidArgument("neighborhood", "joint assignment count exceeds the brute-force guard");
    total *= nb.candidates(i);
  }
  table.energy.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat)
    table.energy[flat] = neighborhood_energy(nb, table.assignment(flat));

  const double e_min = *std::min_element(table.energy.begin(), table.energy.end());
  table.probability.resize(total);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    table.probability[flat] = std::exp(-(table.energy[flat] - e_min));
    sum += table.probability[flat];
  }
  for (double& p : table.probability) p /= sum;
  table.log_partition = -e_min + std::log(sum);
  return table;
}

inline std::vector<std::vector<double>> exact_marginals(const JointTable& table) {
  std::vector<std::vector<double>> marginals(table.shape.size());
  for (std::size_t i = 0; i < table.shape.size(); ++i) marginals[i].assign(table.shape[i], 0.0);
  for (std::size_t flat = 0; flat < table.size(); ++flat) {
    const JointAssignment ja = table.assignment(flat);
    for (std::size_t i = 0; i < ja.indices.size(); ++i) marginals[i][ja.indices[i]] += table.probability[flat];
  }
  return marginals;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_MRF_HPP
