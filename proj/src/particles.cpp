#include "cmtlb/particles.hpp"

#include "cmtlb/element_map.hpp"
#include "cmtlb/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmtlb {

std::optional<GlobalElementIndex> ParticleSet::binding(std::int64_t id) const {
  const auto it = std::find_if(particles.begin(), particles.end(), [id](const Particle& p) { return p.id == id; });
  if (it == particles.end()) return std::nullopt;
  return it->element;
}

ParticleSet init_particles(const Mesh& mesh, const Vec3& region_lo, const Vec3& region_hi, std::int64_t count,
                           std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("init_particles: count must be >= 0");
  const Vec3 lo = region_lo.cwiseMax(mesh.lower());
  const Vec3 hi = region_hi.cwiseMin(mesh.upper());
  if (!(lo.array() <= hi.array()).all()) throw std::invalid_argument("init_particles: region does not intersect the domain");

  const CounterRng rng(seed, /*stream=*/0);
  const Vec3 width = hi - lo;
  ParticleSet ps;
  ps.particles.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    Particle& p = ps.particles[static_cast<std::size_t>(i)];
    p.id = i;
    for (int a = 0; a < 3; ++a) {
      p.position[a] = lo[a] + rng.uniform(static_cast<std::uint64_t>(3 * i + a)) * width[a];
    }
    p.element = locate_element(mesh, p.position);
  }
  return ps;
}

void advect(ParticleSet& ps, const Mesh& mesh, const ExpansionField& field, double dt) {
  for (Particle& p : ps.particles) {
    p.velocity = field.velocity(p.position);
    p.position = (p.position + dt * p.velocity).cwiseMax(mesh.lower()).cwiseMin(mesh.upper());
  }
}

std::vector<ParticleMove> rebin(ParticleSet& ps, const Mesh& mesh, const ElementProcessorMap& map) {
  std::vector<ParticleMove> manifest;
  for (Particle& p : ps.particles) {
    const GlobalElementIndex now = locate_element(mesh, p.position);
    if (now != p.element) {
      const int from = p.element.value >= 1 ? map.owner(p.element) : -1;
      const int to = map.owner(now);
      p.element = now;
      if (from != to) manifest.push_back({p.id, from, to});
    }
  }
  return manifest;
}

}  // namespace cmtlb
