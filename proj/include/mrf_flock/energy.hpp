#ifndef MRF_FLOCK_ENERGY_HPP
#define MRF_FLOCK_ENERGY_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mrf_flock/common.hpp"
#include "mrf_flock/dynamics.hpp"

namespace mrf_flock {

/// Morse-type pair potential: -a exp(-d/k_a) + b exp(-d/k_r).
struct MorseParams {
  double a = 5.0;    // attraction amplitude
  double b = 15.0;   // repulsion amplitude
  double k_a = 1.5;  // attraction length scale [m]
  double k_r = 0.5;  // repulsion length scale [m]

  void validate() const {
    if (!(a > 0.0)) throw InvalidArgument("morse.a", "must be positive");
    if (!(b > 0.0)) throw InvalidArgument("morse.b", "must be positive");
    if (!(k_a > 0.0)) throw InvalidArgument("morse.k_a", "must be positive");
    if (!(k_r > 0.0)) throw InvalidArgument("morse.k_r", "must be positive");
    if (!(k_a > k_r)) throw InvalidArgument("morse.k_a", "must exceed k_r");
    // the boundary b*k_r == a*k_a is admitted: the reference parameter set sits on it
    if (b * k_r > a * k_a * (1.0 + 1e-12))
      throw InvalidArgument("morse", "requires b*k_r / (a*k_a) <= 1");
    if (!(b * k_a > a * k_r))
      throw InvalidArgument("morse", "requires b*k_a > a*k_r for a minimum at positive distance");
  }

  friend bool operator==(const MorseParams&, const MorseParams&) = default;
};

enum class RoostMode {
  verbatim,    // exp(-r/k_R): maximal at the center
  attractive,  // 1 - exp(-r/k_R): minimal at the center
};

struct RoostParams {
  Vec3 center = Vec3::Zero();
  double k_R = 10.0;
  RoostMode mode = RoostMode::attractive;

  void validate() const {
    if (!(k_R > 0.0)) throw InvalidArgument("roost.k_R", "must be positive");
    if (!all_finite(center)) throw InvalidArgument("roost.center", "must be finite");
  }

  friend bool operator==(const RoostParams&, const RoostParams&) = default;
};

inline double morse_energy(double distance, const MorseParams& p) {
  return -p.a * std::exp(-distance / p.k_a) + p.b * std::exp(-distance / p.k_r);
}

/// d/dd of morse_energy.
inline double morse_energy_derivative(double distance, const MorseParams& p) {
  return p.a / p.k_a * std::exp(-distance / p.k_a) - p.b / p.k_r * std::exp(-distance / p.k_r);
}

inline double interaction_energy(const FlatState& xi, const FlatState& xj, const MorseParams& p) {
  return morse_energy((xi.position - xj.position).norm(), p);
}

/// Distance at which the pair potential is minimal.
inline double morse_equilibrium(const MorseParams& p) {
  p.validate();
  return std::log(p.b * p.k_a / (p.a * p.k_r)) / (1.0 / p.k_r - 1.0 / p.k_a);
}

inline double roost_energy(const FlatState& x, const RoostParams& r) {
  const double falloff = std::exp(-(x.position - r.center).norm() / r.k_R);
  return r.mode == RoostMode::verbatim ? falloff : 1.0 - falloff;
}

inline double velocity_compatibility(const FlatState& xi, const FlatState& xj) {
  return (xi.velocity - xj.velocity).norm();
}

/// How the velocity compatibility enters the pairwise term of the mean-field
/// update. The plain product rewards velocity mismatch wherever the pair
/// potential is negative; the penalized form never does.
enum class PairCoupling {
  multiplicative,  // psi_p * mu
  penalized,       // psi_p + weight * |psi_p| * mu
};

struct CouplingParams {
  PairCoupling mode = PairCoupling::penalized;
  double weight = 0.05;  // used by the penalized mode only

  void validate() const {
    if (!(weight >= 0.0) || !std::isfinite(weight))
      throw InvalidArgument("coupling.weight", "must be a finite non-negative number");
  }

  friend bool operator==(const CouplingParams&, const CouplingParams&) = default;
};

inline double coupled_pair_energy(double pair_energy, double compatibility, const CouplingParams& c) {
  switch (c.mode) {
    case PairCoupling::multiplicative:
      return pair_energy * compatibility;
    case PairCoupling::penalized:
      return pair_energy + c.weight * std::abs(pair_energy) * compatibility;
  }
  return pair_energy;
}

/// A unary term is any function of a single robot's state.
using UnaryTerm = std::function<double(const FlatState&)>;

/// Everything needed to score a neighborhood: the pair potential, an optional
/// roost, extra unary terms, and the velocity coupling used during inference.
struct EnergyModel {
  MorseParams morse;
  bool pairwise_enabled = true;
  bool roost_enabled = true;
  RoostParams roost;
  CouplingParams coupling;
  std::vector<UnaryTerm> extra_unary;

  void validate() const {
    if (pairwise_enabled) morse.validate();
    if (roost_enabled) roost.validate();
    coupling.validate();
  }

  double unary(const FlatState& x) const {
    double e = roost_enabled ? roost_energy(x, roost) : 0.0;
    for (const auto& term : extra_unary) e += term(x);
    return e;
  }

  double pairwise(const FlatState& xi, const FlatState& xj) const {
    return pairwise_enabled ? interaction_energy(xi, xj, morse) : 0.0;
  }

  /// Pairwise term as used by the mean-field update and the free energy.
  /// Zero whenever the pairwise potential is disabled.
  double coupled_pairwise(const FlatState& xi, const FlatState& xj) const {
    if (!pairwise_enabled) return 0.0;
    return coupled_pair_energy(interaction_energy(xi, xj, morse), velocity_compatibility(xi, xj),
                               coupling);
  }
};

inline const char* to_string(RoostMode m) { return m == RoostMode::verbatim ? "verbatim" : "attractive"; }
inline const char* to_string(PairCoupling c) {
  return c == PairCoupling::multiplicative ? "multiplicative" : "penalized";
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_ENERGY_HPP
