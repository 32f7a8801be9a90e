// geometry.hpp - spatial arrangement of target and environmental DQDs.
//
// Two target double quantum dots (DQDs) A and B each carry their own
// environment cluster of n_env/2 DQDs whose centers are drawn uniformly
// on a sphere of radius R around the target center and whose axes are
// isotropic.  The two clusters are taken as far separated: they share no
// coordinate frame, and cross-cluster couplings are masked to exactly
// zero downstream.  Each cluster therefore uses its own frame with the
// target at the origin and the target axis along +z.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dqdsim/rng.hpp"
#include "dqdsim/vec3.hpp"

namespace dqdsim {

// One DQD: two dots at center -/+ (dot_separation/2) * axis.
// Occupation m = 0 selects the first dot, m = 1 the second.
struct DoubleDot {
  Vec3 center;
  Vec3 axis;               // unit vector
  double dot_separation;   // nm

  Vec3 dot(int m) const {
    const double half = 0.5 * dot_separation;
    return m == 0 ? center - half * axis : center + half * axis;
  }
};

// Site ordering convention used everywhere downstream (coupling table,
// basis packing, serialization):
//   site 0 = target A, site 1 = target B,
//   sites 2 .. 2+n/2-1        = environment of A,
//   sites 2+n/2 .. 2+n-1      = environment of B    (n = n_env).
struct Geometry {
  DoubleDot target_a;
  DoubleDot target_b;
  std::vector<DoubleDot> env_a;
  std::vector<DoubleDot> env_b;
  double radius = 0.0;          // env sphere radius R [nm]
  std::uint64_t seed = 0;       // seed of the stream that produced the draw
  int resample_count = 0;       // DQDs redrawn due to the proximity guard

  int n_env() const { return static_cast<int>(env_a.size() + env_b.size()); }
  int n_sites() const { return 2 + n_env(); }

  const DoubleDot& site(int i) const {
    if (i == 0) return target_a;
    if (i == 1) return target_b;
    const int k = i - 2;
    const int half = static_cast<int>(env_a.size());
    if (k < half) return env_a[static_cast<std::size_t>(k)];
    return env_b[static_cast<std::size_t>(k - half)];
  }

  // Cluster id of a site: 0 for A and its environment, 1 for B and its.
  int cluster_of(int i) const {
    if (i == 0) return 0;
    if (i == 1) return 1;
    return (i - 2) < static_cast<int>(env_a.size()) ? 0 : 1;
  }
};

// Isotropic unit vector: z uniform in [-1, 1), azimuth uniform in [0, 2pi).
// Draw order (z first, then azimuth) is part of the reproducibility
// contract and must not change.
inline Vec3 sample_unit_vector(RandomStream& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double az = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(az), s * std::sin(az), z};
}

namespace detail {

// Minimum distance between any dot of `cand` and any dot of `other`.
inline double min_dot_distance(const DoubleDot& cand, const DoubleDot& other) {
  double best = distance(cand.dot(0), other.dot(0));
  best = std::min(best, distance(cand.dot(0), other.dot(1)));
  best = std::min(best, distance(cand.dot(1), other.dot(0)));
  best = std::min(best, distance(cand.dot(1), other.dot(1)));
  return best;
}

}  // namespace detail

// Draws the random geometry for one run.
//
// Per environmental DQD the draws are: center direction (unit vector),
// then axis (unit vector); the center is placed on the sphere of radius
// R around the cluster's target.  Cluster A is drawn first, then cluster
// B.  A candidate whose dots come within 0.1*a of any dot already placed
// in the same cluster (including the target) is discarded and redrawn;
// each rejection increments Geometry::resample_count.
//
// The caller owns the stream; Geometry::seed is left at 0 and should be
// filled in by whoever created the stream.
inline Geometry sample_geometry(double a, double radius, int n_env,
                                RandomStream& rng) {
  if (!(a > 0.0)) throw std::invalid_argument("sample_geometry: a must be > 0");
  if (n_env < 0 || n_env % 2 != 0)
    throw std::invalid_argument("sample_geometry: n_env must be even and >= 0");
  if (n_env > 0 && !(radius >= 2.0 * a))
    throw std::invalid_argument("sample_geometry: requires R >= 2a");

  Geometry g;
  g.radius = radius;
  g.target_a = {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, a};
  g.target_b = {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, a};

  const double min_dist = 0.1 * a;
  const int half = n_env / 2;

  for (int cluster = 0; cluster < 2; ++cluster) {
    const DoubleDot& target = cluster == 0 ? g.target_a : g.target_b;
    std::vector<DoubleDot>& env = cluster == 0 ? g.env_a : g.env_b;
    env.reserve(static_cast<std::size_t>(half));
    for (int k = 0; k < half; ++k) {
      for (int attempt = 0;; ++attempt) {
        if (attempt >= 10000)
          throw std::runtime_error(
              "sample_geometry: proximity guard failed to place a DQD");
        DoubleDot cand;
        cand.center = target.center + radius * sample_unit_vector(rng);
        cand.axis = sample_unit_vector(rng);
        cand.dot_separation = a;

        bool ok = detail::min_dot_distance(cand, target) >= min_dist;
        for (const DoubleDot& placed : env) {
          if (!ok) break;
          ok = detail::min_dot_distance(cand, placed) >= min_dist;
        }
        if (ok) {
          env.push_back(cand);
          break;
        }
        ++g.resample_count;
      }
    }
  }
  return g;
}

}  // namespace dqdsim
