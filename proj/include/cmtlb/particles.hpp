#pragma once

#include "cmtlb/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace cmtlb {

class ElementProcessorMap;

inline constexpr int kPayloadSize = 5;
using Payload = Eigen::Matrix<double, kPayloadSize, 1>;

struct Particle {
  std::int64_t id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Payload payload = Payload::Zero();
  GlobalElementIndex element{};  // owning element; 0 when unbound
};

// Particles owned by one rank (or the whole ensemble before distribution).
// The id -> element binding lives on each Particle.
struct ParticleSet {
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
  std::optional<GlobalElementIndex> binding(std::int64_t id) const;
};

// Uniform i.i.d. positions in region ∩ domain, zero velocity, bound to their
// containing elements. Throws std::invalid_argument if the region misses the
// domain or count < 0.
ParticleSet init_particles(const Mesh& mesh, const Vec3& region_lo, const Vec3& region_hi, std::int64_t count,
                           std::uint64_t seed);

// Kinematic surrogate for the dispersing slab: v_x = rate * (x - origin_x) to
// the right of origin_x, zero elsewhere.
struct ExpansionField {
  double origin_x = 0.0;
  double rate = 0.0;

  Vec3 velocity(const Vec3& x) const {
    return Vec3(x.x() > origin_x ? rate * (x.x() - origin_x) : 0.0, 0.0, 0.0);
  }
};

// Forward-Euler move, clamped to the domain box. Bindings are left stale.
void advect(ParticleSet& ps, const Mesh& mesh, const ExpansionField& field, double dt);

struct ParticleMove {
  std::int64_t id = 0;
  int from = 0;
  int to = 0;

  friend bool operator==(const ParticleMove&, const ParticleMove&) = default;
};

// Recompute bindings from positions and report particles whose owning rank
// changed under `map`.
std::vector<ParticleMove> rebin(ParticleSet& ps, const Mesh& mesh, const ElementProcessorMap& map);

}  // namespace cmtlb
