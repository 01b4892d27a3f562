#ifndef MRF_FLOCK_VICSEK_HPP
#define MRF_FLOCK_VICSEK_HPP

// Vicsek self-propelled particles with topological (k nearest) neighborhoods.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "mrf_flock/common.hpp"
#include "mrf_flock/dynamics.hpp"
#include "mrf_flock/mrf.hpp"

namespace mrf_flock {

struct VicsekParams {
  double v0 = 1.0;   // particle speed [m/s]
  double eta = 0.0;  // noise amplitude: angle window in 2D, cone aperture in 3D [rad]
  std::size_t k = 3;
  double dt = 0.2;
  int dims = 2;

  void validate() const {
    if (!(v0 > 0.0)) throw InvalidArgument("vicsek.v0", "must be positive");
    if (!(eta >= 0.0)) throw InvalidArgument("vicsek.eta", "must be non-negative");
    if (!(dt > 0.0)) throw InvalidArgument("vicsek.dt", "must be positive");
    if (dims != 2 && dims != 3) throw InvalidArgument("vicsek.dims", "must be 2 or 3");
  }

  friend bool operator==(const VicsekParams&, const VicsekParams&) = default;
};

/// ||sum v_i|| / sum ||v_i||; 0 when every velocity is zero.
inline double order_parameter(std::span<const FlatState> states) {
  if (states.empty()) throw InvalidArgument("states", "must not be empty");
  Vec3 total = Vec3::Zero();
  double speeds = 0.0;
  for (const auto& s : states) {
    total += s.velocity;
    speeds += s.velocity.norm();
  }
  return speeds > 0.0 ? total.norm() / speeds : 0.0;
}

namespace detail {

inline Vec3 random_unit(Rng& rng, int dims) {
  if (dims == 2) {
    const double angle = rng.uniform(-M_PI, M_PI);
    return Vec3(std::cos(angle), std::sin(angle), 0.0);
  }
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(-M_PI, M_PI);
  const double r = std::sqrt(1.0 - z * z);
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

/// Rotates unit vector `dir` by a random amount bounded by eta / 2.
inline Vec3 perturb_heading(const Vec3& dir, double eta, int dims, Rng& rng) {
  if (dims == 2) {
    const double angle = rng.uniform(-0.5 * eta, 0.5 * eta);
    const double c = std::cos(angle), s = std::sin(angle);
    return Vec3(c * dir.x() - s * dir.y(), s * dir.x() + c * dir.y(), 0.0);
  }
  // uniform on the spherical cap of half-angle eta / 2 around dir
  const double cos_max = std::cos(std::min(0.5 * eta, M_PI));
  const double cos_t = rng.uniform(cos_max, 1.0);
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = rng.uniform(-M_PI, M_PI);
  const Vec3 helper = std::abs(dir.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = dir.cross(helper).normalized();
  const Vec3 e2 = dir.cross(e1);
  return (cos_t * dir + sin_t * (std::cos(phi) * e1 + std::sin(phi) * e2)).normalized();
}

}  // namespace detail

/// Gives every particle speed v0. Nonzero velocities keep their direction,
/// zero ones get a random heading.
inline std::vector<FlatState> vicsek_init(std::span<const FlatState> states, const VicsekParams& p, Rng& rng) {
  p.validate();
  std::vector<FlatState> out(states.begin(), states.end());
  for (auto& s : out) {
    const double speed = s.velocity.norm();
    const Vec3 dir = speed > 0.0 ? Vec3(s.velocity / speed) : detail::random_unit(rng, p.dims);
    s.velocity = p.v0 * dir;
  }
  return out;
}

/// One synchronous update: heading <- direction of the mean velocity over self
/// and the k nearest neighbors, plus bounded noise; then advance at v0.
inline std::vector<FlatState> vicsek_step(std::span<const FlatState> states, const VicsekParams& p, Rng& rng) {
  p.validate();
  std::vector<FlatState> out(states.begin(), states.end());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Vec3 mean = states[i].velocity;
    double speeds = states[i].velocity.norm();
    for (std::size_t j : nearest_neighbors(states, i, p.k)) {
      mean += states[j].velocity;
      speeds += states[j].velocity.norm();
    }
    // headings that cancel up to rounding count as a zero mean
    const double norm = mean.norm();
    Vec3 dir = norm > 1e-12 * speeds ? Vec3(mean / norm) : Vec3(states[i].velocity.normalized());
    if (p.eta > 0.0) dir = detail::perturb_heading(dir, p.eta, p.dims, rng);
    if (p.dims == 2) dir.z() = 0.0;
    out[i].velocity = p.v0 * dir;
    out[i].position = states[i].position + p.dt * out[i].velocity;
    out[i].time = states[i].time + p.dt;
  }
  return out;
}

}  // namespace mrf_flock

#endif  // MRF_FLOCK_VICSEK_HPP
