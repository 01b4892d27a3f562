#ifndef MRF_FLOCK_ORACLE_HPP
#define MRF_FLOCK_ORACLE_HPP

// Property suites that check the mean-field machinery against exhaustive
// enumeration on small random neighborhoods.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mrf_flock/inference.hpp"
#include "mrf_flock/mrf.hpp"

namespace mrf_flock {

struct OracleLimits {
  std::size_t instances = 50;
  std::size_t max_members = 3;
  std::size_t max_candidates = 5;
  std::uint64_t seed = 7;
  std::size_t sweeps = 20;  // sweeps checked for monotonicity
};

struct SuiteResult {
  std::string name;
  std::size_t checked = 0;
  std::vector<std::string> counterexamples;
  bool passed() const { return counterexamples.empty(); }
};

/// Random neighborhood with 1..max_members members and 1..max_candidates
/// candidates each. Candidate actions are continuous, not grid points, and
/// the horizon is long enough for the energies to differ noticeably.
inline Neighborhood random_neighborhood(Rng& rng, std::size_t max_members, std::size_t max_candidates,
                                        bool pairwise = true) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_members));
  const double horizon = rng.uniform(0.2, 1.0);
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<FlatState> states(n);
  std::vector<std::vector<Trajectory>> spaces(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      states[i].position[d] = rng.uniform(-2.0, 2.0);
      states[i].velocity[d] = rng.uniform(-0.5, 0.5);
    }
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_candidates));
    for (std::size_t c = 0; c < m; ++c) {
      ControlAction u{Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))};
      spaces[i].push_back(make_trajectory(states[i], u, horizon));
    }
  }
  EnergyModel energy;
  energy.pairwise_enabled = pairwise;
  energy.roost_enabled = rng.uniform() < 0.8;
  energy.roost.center = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0);
  energy.roost.k_R = rng.uniform(0.5, 3.0);
  energy.roost.mode = rng.uniform() < 0.5 ? RoostMode::attractive : RoostMode::verbatim;
  energy.coupling.mode = rng.uniform() < 0.5 ? PairCoupling::penalized : PairCoupling::multiplicative;
  energy.coupling.weight = rng.uniform(0.0, 1.0);
  return Neighborhood(std::move(ids), std::move(states), std::move(spaces), std::move(energy), horizon);
}

inline std::string describe(const Neighborhood& nb) {
  std::ostringstream os;
  os << "N=" << nb.size() << " |L|=(";
  for (std::size_t i = 0; i < nb.size(); ++i) os << (i ? "," : "") << nb.candidates(i);
  os << ") horizon=" << nb.horizon() << " coupling=" << to_string(nb.energy().coupling.mode);
  return os.str();
}

inline SuiteResult check_joint_table(const OracleLimits& lim) {
  SuiteResult res{"joint table normalizes and orders by energy", 0, {}};
  Rng rng(lim.seed);
  for (std::size_t n = 0; n < lim.instances; ++n, ++res.checked) {
    const Neighborhood nb = random_neighborhood(rng, lim.max_members, lim.max_candidates);
    const JointTable t = joint_distribution_bruteforce(nb);
    const double total = std::accumulate(t.probability.begin(), t.probability.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
      res.counterexamples.push_back(describe(nb) + ": table sums to " + std::to_string(total));
      continue;
    }
    for (std::size_t a = 0; a < t.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b)
        if (t.energy[a] < t.energy[b] - 1e-12 && !(t.probability[a] > t.probability[b])) {
          res.counterexamples.push_back(describe(nb) + ": lower energy without higher probability");
          a = b = t.size();
        }
  }
  return res;
}

inline SuiteResult check_factorized_exactness(const OracleLimits& lim) {
  SuiteResult res{"factorized instances: one sweep equals exact marginals", 0, {}};
  Rng rng(lim.seed + 1);
  for (std::size_t n = 0; n < lim.instances; ++n, ++res.checked) {
    const Neighborhood nb = random_neighborhood(rng, lim.max_members, lim.max_candidates, false);
    const auto exact = exact_marginals(joint_distribution_bruteforce(nb));
    const BeliefSet q = mfa_sweep(init_beliefs(nb), nb, UpdateOrder::sequential);
    double worst = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t c = 0; c < nb.candidates(i); ++c) worst = std::max(worst, std::abs(q[i][c] - exact[i][c]));
    if (worst > 1e-9) res.counterexamples.push_back(describe(nb) + ": max deviation " + std::to_string(worst));
  }
  return res;
}

inline SuiteResult check_free_energy_monotone(const OracleLimits& lim) {
  SuiteResult res{"sequential sweeps never decrease free energy", 0, {}};
  Rng rng(lim.seed + 2);
  for (std::size_t n = 0; n < lim.instances; ++n, ++res.checked) {
    const Neighborhood nb = random_neighborhood(rng, lim.max_members, lim.max_candidates);
    const MeanFieldProblem problem(nb);
    BeliefSet q = problem.init();
    double f = problem.free_energy(q);
    for (std::size_t s = 0; s < lim.sweeps; ++s) {
      q = problem.sweep(q, UpdateOrder::sequential);
      const double next = problem.free_energy(q);
      if (next < f - 1e-9) {
        std::ostringstream os;
        os << describe(nb) << ": sweep " << s + 1 << " lowered F from " << f << " to " << next;
        res.counterexamples.push_back(os.str());
        break;
      }
      f = next;
    }
  }
  return res;
}

inline SuiteResult check_energy_shift(const OracleLimits& lim) {
  SuiteResult res{"constant unary shift leaves beliefs unchanged", 0, {}};
  Rng rng(lim.seed + 3);
  for (std::size_t n = 0; n < lim.instances; ++n, ++res.checked) {
    const Neighborhood nb = random_neighborhood(rng, lim.max_members, lim.max_candidates);
    const double shift = rng.uniform(-50.0, 50.0);
    EnergyModel shifted_energy = nb.energy();
    shifted_energy.extra_unary.push_back([shift](const FlatState&) { return shift; });
    const Neighborhood shifted(nb.member_ids(), nb.member_states(), nb.search_spaces(), shifted_energy, nb.horizon());
    BeliefSet a = init_beliefs(nb), b = init_beliefs(shifted);
    for (int s = 0; s < 3; ++s) {
      a = mfa_sweep(a, nb);
      b = mfa_sweep(b, shifted);
    }
    const double diff = a.max_abs_diff(b);
    if (diff > 1e-12) res.counterexamples.push_back(describe(nb) + ": beliefs moved by " + std::to_string(diff));
  }
  return res;
}

inline SuiteResult check_normalization(const OracleLimits& lim) {
  SuiteResult res{"beliefs stay normalized after every sweep", 0, {}};
  Rng rng(lim.seed + 4);
  for (std::size_t n = 0; n < lim.instances; ++n, ++res.checked) {
    const Neighborhood nb = random_neighborhood(rng, lim.max_members, lim.max_candidates);
    const MeanFieldProblem problem(nb);
    BeliefSet q = problem.init();
    for (std::size_t s = 0; s < lim.sweeps; ++s) {
      q = problem.sweep(q, s % 2 ? UpdateOrder::parallel : UpdateOrder::sequential);
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double total = std::accumulate(q[i].begin(), q[i].end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9 || *std::min_element(q[i].begin(), q[i].end()) < 0.0) {
          res.counterexamples.push_back(describe(nb) + ": member " + std::to_string(i) + " not normalized");
          s = lim.sweeps;
          break;
        }
      }
    }
  }
  return res;
}

inline std::vector<SuiteResult> run_oracle_suites(const OracleLimits& lim) {
  if (lim.max_members < 1 || lim.max_candidates < 1)
    throw InvalidArgument("oracle", "limits must be at least 1");
  double worst = 1.0;
  for (std::size_t i = 0; i < lim.max_members; ++i) worst *= static_cast<double>(lim.max_candidates);
  if (worst > static_cast<double>(kBruteForceLimit))
    throw InvalidArgument("oracle", "limits exceed the brute-force guard");
  return {check_joint_table(lim), check_factorized_exactness(lim), check_free_energy_monotone(lim),
          check_energy_shift(lim), check_normalization(lim)};
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_ORACLE_HPP
