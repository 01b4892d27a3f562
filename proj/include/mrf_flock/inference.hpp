#ifndef MRF_FLOCK_INFERENCE_HPP
#define MRF_FLOCK_INFERENCE_HPP

// Naive mean-field inference over a Neighborhood with velocity-compatibility
// weighting of the pairwise term.
//
// For member i and candidate l the update energy is
//
//   E_i(l) = U_i(l) + sum_{j != i} sum_m Q_j(m) W_ij(l, m),
//
// where U is the unary energy of the candidate's end state and W is the
// coupled pairwise energy (see EnergyModel::coupled_pairwise). The new belief
// is Q_i = softmax(-E_i). Because W_ij(l, m) = W_ji(m, l), each member update
// is an exact coordinate ascent step on
//
//   F(Q) = -E_Q[sum_i U_i + sum_{i<j} W_ij] + sum_i H(Q_i),
//
// so sequential sweeps never decrease F.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mrf_flock/mrf.hpp"

namespace mrf_flock {

enum class UpdateOrder {
  sequential,  // members updated in order, each sees the already-updated ones
  parallel,    // every member updated from the pre-sweep beliefs
};

inline const char* to_string(UpdateOrder o) { return o == UpdateOrder::sequential ? "sequential" : "parallel"; }

/// One categorical distribution per neighborhood member.
struct BeliefSet {
  std::vector<std::vector<double>> q;

  std::size_t size() const { return q.size(); }
  const std::vector<double>& operator[](std::size_t i) const { return q[i]; }
  std::vector<double>& operator[](std::size_t i) { return q[i]; }

  /// Largest absolute per-entry difference.
  double max_abs_diff(const BeliefSet& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t c = 0; c < q[i].size(); ++c) m = std::max(m, std::abs(q[i][c] - other.q[i][c]));
    return m;
  }
};

struct InferenceDiagnostics {
  std::size_t sweeps_used = 0;
  std::vector<double> kl_trace;           // KL(previous || current), one per sweep
  std::vector<double> free_energy_trace;  // F after init, then after each sweep
  double wall_time = 0.0;                 // seconds, including table setup
  bool converged = false;
  std::size_t pair_terms = 0;  // candidate-pair products accumulated over all sweeps

  double final_kl() const { return kl_trace.empty() ? 0.0 : kl_trace.back(); }
};

namespace detail {

/// Normalized exp(-energy), shifted by the minimum for stability.
inline void softmin(std::span<const double> energy, std::vector<double>& out) {
  out.resize(energy.size());
  const double e_min = *std::min_element(energy.begin(), energy.end());
  double z = 0.0;
  for (std::size_t c = 0; c < energy.size(); ++c) {
    out[c] = std::exp(-(energy[c] - e_min));
    z += out[c];
  }
  for (double& p : out) p /= z;
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace detail

inline constexpr double kProbabilityFloor = 1e-300;

/// Precomputed unary and coupled pairwise tables for one neighborhood.
class MeanFieldProblem {
 public:
  explicit MeanFieldProblem(const Neighborhood& nb) : n_(nb.size()) {
    unary_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      unary_[i].resize(nb.candidates(i));
      for (std::size_t c = 0; c < nb.candidates(i); ++c) unary_[i][c] = nb.unary_energy(i, c);
    }
    coupled_.resize(n_ * n_);
    const EnergyModel& energy = nb.energy();
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const std::size_t ni = nb.candidates(i), nj = nb.candidates(j);
        auto& ij = coupled_[i * n_ + j];
        auto& ji = coupled_[j * n_ + i];
        ij.resize(ni * nj);
        ji.resize(ni * nj);
        for (std::size_t a = 0; a < ni; ++a)
          for (std::size_t b = 0; b < nj; ++b) {
            const double w = energy.coupled_pairwise(nb.end_state_of(i, a), nb.end_state_of(j, b));
            ij[a * nj + b] = w;
            ji[b * ni + a] = w;
          }
      }
    }
  }

  std::size_t size() const { return n_; }
  std::size_t candidates(std::size_t i) const { return unary_[i].size(); }
  double unary(std::size_t i, std::size_t c) const { return unary_[i][c]; }

  /// Coupled pairwise energy between candidate a of member i and b of member j.
  double coupled(std::size_t i, std::size_t a, std::size_t j, std::size_t b) const {
    return coupled_[i * n_ + j][a * candidates(j) + b];
  }

  BeliefSet init() const {
    BeliefSet beliefs;
    beliefs.q.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) detail::softmin(unary_[i], beliefs.q[i]);
    return beliefs;
  }

  /// Update energies E_i(.) of member i against the given beliefs.
  std::vector<double> update_energy(std::size_t i, const BeliefSet& beliefs) const {
    const std::size_t ni = candidates(i);
    std::vector<double> e(unary_[i]);
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      const std::size_t nj = candidates(j);
      const auto& table = coupled_[i * n_ + j];
      const auto& qj = beliefs.q[j];
      for (std::size_t a = 0; a < ni; ++a) {
        const double* row = table.data() + a * nj;
        double acc = 0.0;
        for (std::size_t b = 0; b < nj; ++b) acc += qj[b] * row[b];
        e[a] += acc;
      }
    }
    return e;
  }

  /// Candidate-pair products one sweep accumulates.
  std::size_t pair_terms_per_sweep() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j) total += candidates(i) * candidates(j);
    return total;
  }

  BeliefSet sweep(const BeliefSet& beliefs, UpdateOrder order) const {
    BeliefSet next = beliefs;
    const BeliefSet& source = order == UpdateOrder::sequential ? next : beliefs;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::vector<double> e = update_energy(i, source);
      detail::softmin(e, next.q[i]);
    }
    return next;
  }

  double free_energy(const BeliefSet& beliefs) const {
    double expected = 0.0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& qi = beliefs.q[i];
      for (std::size_t a = 0; a < candidates(i); ++a) expected += qi[a] * unary_[i][a];
      entropy += detail::entropy(qi);
      for (std::size_t j = i + 1; j < n_; ++j) {
        const auto& qj = beliefs.q[j];
        const std::size_t nj = candidates(j);
        const auto& table = coupled_[i * n_ + j];
        for (std::size_t a = 0; a < candidates(i); ++a) {
          if (qi[a] == 0.0) continue;
          double acc = 0.0;
          for (std::size_t b = 0; b < nj; ++b) acc += qj[b] * table[a * nj + b];
          expected += qi[a] * acc;
        }
      }
    }
    return -expected + entropy;
  }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> unary_;
  std::vector<std::vector<double>> coupled_;  // [i * n + j], row-major |L_i| x |L_j|
};

inline BeliefSet init_beliefs(const Neighborhood& nb) { return MeanFieldProblem(nb).init(); }

inline BeliefSet mfa_sweep(const BeliefSet& beliefs, const Neighborhood& nb,
                           UpdateOrder order = UpdateOrder::sequential) {
  return MeanFieldProblem(nb).sweep(beliefs, order);
}

inline double free_energy(const BeliefSet& beliefs, const Neighborhood& nb) {
  return MeanFieldProblem(nb).free_energy(beliefs);
}

/// Sum over members of KL(q_old_i || q_new_i), with both sides floored at
/// kProbabilityFloor and renormalized first.
inline double kl_divergence(const BeliefSet& q_old, const BeliefSet& q_new) {
  if (q_old.size() != q_new.size()) throw InvalidArgument("beliefs", "member counts differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < q_old.size(); ++i) {
    const auto& p = q_old.q[i];
    const auto& q = q_new.q[i];
    if (p.size() != q.size()) throw InvalidArgument("beliefs", "candidate counts differ");
    double zp = 0.0, zq = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      zp += std::max(p[c], kProbabilityFloor);
      zq += std::max(q[c], kProbabilityFloor);
    }
    double member = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      const double pc = std::max(p[c], kProbabilityFloor) / zp;
      const double qc = std::max(q[c], kProbabilityFloor) / zq;
      member += pc * std::log(pc / qc);
    }
    kl += std::max(member, 0.0);
  }
  return kl;
}

struct PlanOptions {
  double tol = 1e-4;
  std::size_t max_sweeps = 50;
  UpdateOrder order = UpdateOrder::sequential;
  bool trace_free_energy = false;

  void validate() const {
    if (!(tol > 0.0)) throw InvalidArgument("tol", "must be positive");
    if (max_sweeps < 1) throw InvalidArgument("max_sweeps", "must be at least 1");
  }
};

struct PlanResult {
  std::size_t root_candidate = 0;  // index into the root's search space
  Trajectory trajectory;
  BeliefSet beliefs;
  InferenceDiagnostics diagnostics;
};

/// Index of the largest entry, lowest index on ties.
inline std::size_t argmax(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

/// Runs mean-field sweeps until KL between consecutive beliefs drops below
/// `tol` or `max_sweeps` is reached, then picks the root's most probable
/// trajectory. Hitting the sweep cap is reported, not thrown.
inline PlanResult plan(const Neighborhood& nb, const PlanOptions& options = {}) {
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  PlanResult result;
  auto& diag = result.diagnostics;

  const MeanFieldProblem problem(nb);
  BeliefSet beliefs = problem.init();
  if (options.trace_free_energy) diag.free_energy_trace.push_back(problem.free_energy(beliefs));
  const std::size_t terms = problem.pair_terms_per_sweep();
  while (diag.sweeps_used < options.max_sweeps) {
    BeliefSet next = problem.sweep(beliefs, options.order);
    ++diag.sweeps_used;
    diag.pair_terms += terms;
    const double kl = kl_divergence(beliefs, next);
    diag.kl_trace.push_back(kl);
    beliefs = std::move(next);
    if (options.trace_free_energy) diag.free_energy_trace.push_back(problem.free_energy(beliefs));
    if (kl < options.tol) {
      diag.converged = true;
      break;
    }
  }

  result.root_candidate = argmax(beliefs.q.front());
  result.trajectory = nb.search_space(0)[result.root_candidate];
  result.beliefs = std::move(beliefs);
  diag.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_INFERENCE_HPP
