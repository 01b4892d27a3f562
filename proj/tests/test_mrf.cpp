#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrf_flock/mrf.hpp"
#include "mrf_flock/oracle.hpp"
#include "oracles.hpp"

using namespace mrf_flock;

namespace {

FlatState at(Vec3 p, Vec3 v = Vec3::Zero()) { return FlatState{p, v, 0.0}; }

EnergyModel no_roost() {
  EnergyModel e;
  e.roost_enabled = false;
  return e;
}

/// Neighborhood whose candidates all start from the given state.
Neighborhood explicit_nb(const std::vector<FlatState>& states, const std::vector<std::vector<Vec3>>& actions,
                         EnergyModel energy, double horizon = 0.2) {
  std::vector<std::size_t> ids(states.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<std::vector<Trajectory>> spaces(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    for (const auto& a : actions[i]) spaces[i].push_back(make_trajectory(states[i], ControlAction{a}, horizon));
  return Neighborhood(ids, states, spaces, std::move(energy), horizon);
}

}  // namespace

TEST(NearestNeighbors, CollinearRobots) {
  const std::vector<FlatState> s{at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0)), at(Vec3(2, 0, 0)), at(Vec3(3, 0, 0))};
  EXPECT_EQ(nearest_neighbors(s, 0, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(nearest_neighbors(s, 3, 3), (std::vector<std::size_t>{2, 1, 0}));
}

TEST(NearestNeighbors, TiesGoToLowerIndex) {
  const std::vector<FlatState> s{at(Vec3(5, 0, 0)), at(Vec3(-1, 0, 0)), at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0))};
  EXPECT_EQ(nearest_neighbors(s, 2, 1), (std::vector<std::size_t>{1}));
  const std::vector<FlatState> t{at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0)), at(Vec3(-1, 0, 0))};
  EXPECT_EQ(nearest_neighbors(t, 0, 1), (std::vector<std::size_t>{1}));
}

TEST(BuildNeighborhood, MembersAndSearchSpaces) {
  const std::vector<FlatState> s{at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0)), at(Vec3(2, 0, 0)), at(Vec3(3, 0, 0))};
  const auto actions = build_action_space(Vec3(1, 1, 1), Vec3(0.5, 0.5, 0.5), 2);
  const auto nb = build_neighborhood(s, 0, 2, actions, 1.0, no_roost(), 0.2);
  EXPECT_EQ(nb.member_ids(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(nb.root_id(), 0u);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    EXPECT_EQ(nb.candidates(i), 25u);
    EXPECT_EQ(nb.member_states()[i], s[nb.member_ids()[i]]);
  }
}

TEST(BuildNeighborhood, RootAloneWhenKIsZero) {
  const std::vector<FlatState> s{at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0))};
  const auto actions = build_action_space(Vec3(1, 1, 1), Vec3(1, 1, 1), 2);
  const auto nb = build_neighborhood(s, 1, 0, actions, 1.0, EnergyModel{}, 0.2);
  EXPECT_EQ(nb.size(), 1u);
  EXPECT_EQ(nb.pairwise_factor_count(), 0u);
  EXPECT_TRUE(nb.pairwise_factors().empty());
}

TEST(BuildNeighborhood, RejectsKAtLeastSwarmSize) {
  const std::vector<FlatState> s{at(Vec3(0, 0, 0)), at(Vec3(1, 0, 0))};
  const auto actions = build_action_space(Vec3(1, 1, 1), Vec3(1, 1, 1), 2);
  EXPECT_THROW(build_neighborhood(s, 0, 2, actions, 1.0, EnergyModel{}, 0.2), InvalidArgument);
}

TEST(NeighborhoodTest, FactorCounts) {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<FlatState> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(at(Vec3(static_cast<double>(i), 0, 0)));
    const auto nb = explicit_nb(s, std::vector<std::vector<Vec3>>(n, {Vec3::Zero()}), EnergyModel{});
    EXPECT_EQ(nb.unary_factor_count(), n);
    EXPECT_EQ(nb.pairwise_factor_count(), n * (n - 1) / 2);
    EXPECT_EQ(nb.pairwise_factors().size(), n * (n - 1) / 2);
  }
}

TEST(NeighborhoodEnergy, SingleMemberIsUnaryOnly) {
  EnergyModel e;
  const auto nb = explicit_nb({at(Vec3(3, 4, 0))}, {{Vec3::Zero()}}, e);
  EXPECT_NEAR(neighborhood_energy(nb, {{0}}), 1.0 - std::exp(-0.5), 1e-15);
}

TEST(NeighborhoodEnergy, PairComposition) {
  EnergyModel e;
  const FlatState a = at(Vec3(1, 0, 0)), b = at(Vec3(0, 2, 0));
  const auto nb = explicit_nb({a, b}, {{Vec3(1, 0, 0)}, {Vec3(0, -1, 0)}}, e, 0.5);
  const Vec3 pa = Vec3(1 + 0.125, 0, 0), pb = Vec3(0, 2 - 0.125, 0);
  const double expected = (1.0 - std::exp(-pa.norm() / 10.0)) + (1.0 - std::exp(-pb.norm() / 10.0)) +
                          oracles::morse((pa - pb).norm(), 5, 15, 1.5, 0.5);
  EXPECT_NEAR(neighborhood_energy(nb, {{0, 0}}), expected, 1e-12);
}

TEST(NeighborhoodEnergy, EquilateralRestIsMinimalOverFullGrid) {
  const double d = morse_equilibrium(MorseParams{});
  const std::vector<FlatState> s{at(Vec3(0, 0, 0)), at(Vec3(d, 0, 0)), at(Vec3(d / 2, d * std::sqrt(3.0) / 2, 0))};
  const auto actions = build_action_space(Vec3(1, 1, 1), Vec3(1, 1, 1), 3);
  std::vector<std::vector<Vec3>> per(3);
  for (auto& list : per)
    for (const auto& a : actions.actions) list.push_back(a.acceleration);
  const auto nb = explicit_nb(s, per, no_roost());
  const std::size_t zero = 13;  // (0, 0, 0) sits in the middle of the 3x3x3 grid
  ASSERT_EQ(actions.actions[zero].acceleration, Vec3::Zero());
  const double e_rest = neighborhood_energy(nb, {{zero, zero, zero}});
  EXPECT_NEAR(e_rest, 3.0 * morse_energy(d, MorseParams{}), 1e-12);
  const JointTable table = joint_distribution_bruteforce(nb);
  ASSERT_EQ(table.size(), 27u * 27u * 27u);
  EXPECT_GE(*std::min_element(table.energy.begin(), table.energy.end()), e_rest - 1e-12);
}

TEST(NeighborhoodEnergy, PermutationInvariant) {
  Rng rng(21);
  for (int n = 0; n < 30; ++n) {
    const Neighborhood nb = random_neighborhood(rng, 4, 3);
    std::vector<std::size_t> perm(nb.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    std::vector<std::size_t> ids;
    std::vector<FlatState> states;
    std::vector<std::vector<Trajectory>> spaces;
    JointAssignment ja, pja;
    for (std::size_t i = 0; i < nb.size(); ++i) ja.indices.push_back(nb.candidates(i) - 1);
    for (std::size_t p : perm) {
      ids.push_back(nb.member_ids()[p]);
      states.push_back(nb.member_states()[p]);
      spaces.push_back(nb.search_spaces()[p]);
      pja.indices.push_back(ja.indices[p]);
    }
    const Neighborhood permuted(ids, states, spaces, nb.energy(), nb.horizon());
    EXPECT_NEAR(neighborhood_energy(nb, ja), neighborhood_energy(permuted, pja), 1e-12);
  }
}

TEST(NeighborhoodEnergy, RejectsInvalidAssignment) {
  const auto nb = explicit_nb({at(Vec3::Zero())}, {{Vec3::Zero()}}, EnergyModel{});
  EXPECT_THROW(neighborhood_energy(nb, {{1}}), InvalidArgument);
  EXPECT_THROW(neighborhood_energy(nb, {{0, 0}}), InvalidArgument);
}

TEST(JointTableTest, UniformEnergiesGiveUniformTable) {
  EnergyModel e = no_roost();
  e.pairwise_enabled = false;
  const auto nb = explicit_nb({at(Vec3::Zero()), at(Vec3(1, 0, 0))},
                              {{Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Vec3::Zero(), Vec3(1, 0, 0)}}, e);
  const auto t = joint_distribution_bruteforce(nb);
  ASSERT_EQ(t.size(), 6u);
  for (double p : t.probability) EXPECT_NEAR(p, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(t.log_partition, std::log(6.0), 1e-12);
}

TEST(JointTableTest, TwoCandidatesWithLogTwoGap) {
  EnergyModel e = no_roost();
  // unary energies 0 and ln 2 through an extra term keyed on the end position
  e.extra_unary.push_back([](const FlatState& x) { return x.position.x() > 0.0 ? std::log(2.0) : 0.0; });
  const auto nb = explicit_nb({at(Vec3::Zero())}, {{Vec3::Zero(), Vec3(1, 0, 0)}}, e);
  const auto t = joint_distribution_bruteforce(nb);
  EXPECT_NEAR(t.probability[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.probability[1], 1.0 / 3.0, 1e-15);
}

TEST(JointTableTest, ConstantShiftLeavesTableUnchanged) {
  Rng rng(31);
  for (int n = 0; n < 20; ++n) {
    const Neighborhood nb = random_neighborhood(rng, 3, 4);
    EnergyModel shifted = nb.energy();
    shifted.extra_unary.push_back([](const FlatState&) { return 17.25; });
    const Neighborhood nb2(nb.member_ids(), nb.member_states(), nb.search_spaces(), shifted, nb.horizon());
    const auto a = joint_distribution_bruteforce(nb), b = joint_distribution_bruteforce(nb2);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.probability[i], b.probability[i], 1e-12);
  }
}

TEST(JointTableTest, MatchesDirectEnumeration) {
  Rng rng(41);
  for (int n = 0; n < 30; ++n) {
    const Neighborhood nb = random_neighborhood(rng, 3, 5);
    const auto t = joint_distribution_bruteforce(nb);
    // independent triple loop, padded to three members
    std::vector<std::size_t> shape(3, 1);
    for (std::size_t i = 0; i < nb.size(); ++i) shape[i] = nb.candidates(i);
    std::vector<double> weights;
    std::vector<std::vector<double>> marg(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) marg[i].assign(nb.candidates(i), 0.0);
    double z = 0.0;
    for (std::size_t a = 0; a < shape[0]; ++a)
      for (std::size_t b = 0; b < shape[1]; ++b)
        for (std::size_t c = 0; c < shape[2]; ++c) {
          const std::size_t idx[3] = {a, b, c};
          double e = 0.0;
          for (std::size_t i = 0; i < nb.size(); ++i) {
            e += nb.energy().unary(nb.end_state_of(i, idx[i]));
            for (std::size_t j = i + 1; j < nb.size(); ++j)
              e += oracles::morse((nb.end_state_of(i, idx[i]).position - nb.end_state_of(j, idx[j]).position).norm(),
                                  5, 15, 1.5, 0.5);
          }
          weights.push_back(std::exp(-e));
          z += weights.back();
        }
    ASSERT_EQ(weights.size(), t.size());
    for (std::size_t f = 0; f < t.size(); ++f) EXPECT_NEAR(t.probability[f], weights[f] / z, 1e-12);
    EXPECT_NEAR(t.log_partition, std::log(z), 1e-9);
    std::size_t f = 0;
    for (std::size_t a = 0; a < shape[0]; ++a)
      for (std::size_t b = 0; b < shape[1]; ++b)
        for (std::size_t c = 0; c < shape[2]; ++c, ++f) {
          const std::size_t idx[3] = {a, b, c};
          for (std::size_t i = 0; i < nb.size(); ++i) marg[i][idx[i]] += weights[f] / z;
        }
    const auto m = exact_marginals(t);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      EXPECT_NEAR(std::accumulate(m[i].begin(), m[i].end(), 0.0), 1.0, 1e-9);
      for (std::size_t c = 0; c < m[i].size(); ++c) EXPECT_NEAR(m[i][c], marg[i][c], 1e-12);
    }
  }
}

TEST(JointTableTest, ProbabilityOrdersInverselyToEnergy) {
  Rng rng(51);
  for (int n = 0; n < 20; ++n) {
    const auto t = joint_distribution_bruteforce(random_neighborhood(rng, 3, 4));
    for (std::size_t a = 0; a < t.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b)
        if (t.energy[a] < t.energy[b]) {
          EXPECT_GT(t.probability[a], t.probability[b]);
        }
  }
}

TEST(JointTableTest, GuardRejectsHugeTables) {
  std::vector<FlatState> s;
  std::vector<std::vector<Vec3>> acts;
  const auto grid = build_action_space(Vec3(1, 1, 1), Vec3(0.5, 0.5, 0.5), 3);  // 125 candidates
  for (int i = 0; i < 3; ++i) {
    s.push_back(at(Vec3(2.0 * i, 0, 0)));
    acts.emplace_back();
    for (const auto& a : grid.actions) acts.back().push_back(a.acceleration);
  }
  const auto nb = explicit_nb(s, acts, EnergyModel{});  // 125^3 > 1e6
  EXPECT_THROW(joint_distribution_bruteforce(nb), InvalidArgument);
}

TEST(ExactMarginals, FactorizedEqualsPerMemberSoftmax) {
  EnergyModel e;
  e.pairwise_enabled = false;
  const std::vector<FlatState> s{at(Vec3(3, 0, 0)), at(Vec3(-2, 1, 0))};
  const std::vector<std::vector<Vec3>> acts{{Vec3::Zero(), Vec3(1, 0, 0), Vec3(-1, 0, 0)},
                                            {Vec3::Zero(), Vec3(0, 1, 0)}};
  const auto nb = explicit_nb(s, acts, e, 1.0);
  const auto m = exact_marginals(joint_distribution_bruteforce(nb));
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> u;
    for (std::size_t c = 0; c < nb.candidates(i); ++c) u.push_back(nb.unary_energy(i, c));
    const auto ref = oracles::softmax_neg(u);
    for (std::size_t c = 0; c < u.size(); ++c) EXPECT_NEAR(m[i][c], ref[c], 1e-12);
  }
}

TEST(ExactMarginals, SymmetricPairHasEqualMarginals) {
  // mirror images about the roost with mirrored action lists
  const std::vector<FlatState> s{at(Vec3(1, 0, 0)), at(Vec3(-1, 0, 0))};
  const std::vector<std::vector<Vec3>> acts{{Vec3(1, 0, 0), Vec3::Zero(), Vec3(-1, 0, 0)},
                                            {Vec3(-1, 0, 0), Vec3::Zero(), Vec3(1, 0, 0)}};
  const auto m = exact_marginals(joint_distribution_bruteforce(explicit_nb(s, acts, EnergyModel{}, 0.5)));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(m[0][c], m[1][c], 1e-12);
}
