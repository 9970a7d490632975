#include "cmtlb/load_model.hpp"

#include <algorithm>

namespace cmtlb {

ElementLoadArray compute_element_load(std::span<const GlobalElementIndex> owned, const ParticleSet& particles,
                                      FluidLoadConstant fluid_load) {
  if (!std::is_sorted(owned.begin(), owned.end())) throw std::invalid_argument("compute_element_load: ids must be ascending");
  ElementLoadArray out;
  out.ids.assign(owned.begin(), owned.end());
  out.loads = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(owned.size()), 0.0);
  for (const Particle& p : particles.particles) {
    const auto it = std::lower_bound(owned.begin(), owned.end(), p.element);
    if (it == owned.end() || *it != p.element) {
      throw std::invalid_argument("compute_element_load: particle " + std::to_string(p.id) + " bound outside owned elements");
    }
    out.loads[it - owned.begin()] += 1.0;
  }
  out.loads += fluid_load.value();
  return out;
}

ElementLoadArray compute_element_load(const RankState& rank, FluidLoadConstant fluid_load) {
  std::vector<GlobalElementIndex> owned;
  owned.reserve(static_cast<std::size_t>(std::max<std::int64_t>(rank.num_elements(), 0)));
  for (std::int64_t g = rank.first; g < rank.end; ++g) owned.push_back(GlobalElementIndex{g});
  return compute_element_load(owned, rank.particles, fluid_load);
}

FluidLoadConstant calibrate_fluid_load(double element_kernel_time, double particle_kernel_time) {
  if (!(element_kernel_time > 0.0) || !(particle_kernel_time > 0.0)) {
    throw std::invalid_argument("calibrate_fluid_load: kernel times must be > 0");
  }
  return FluidLoadConstant(element_kernel_time / particle_kernel_time);
}

}  // namespace cmtlb
