#pragma once

#include "cmtlb/mesh.hpp"
#include "cmtlb/particles.hpp"
#include "cmtlb/rank_state.hpp"

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <vector>

namespace cmtlb {

// Load units charged per element for the fluid solve, relative to one particle.
class FluidLoadConstant {
 public:
  explicit FluidLoadConstant(double value) : value_(value) {
    if (!(value > 0.0)) throw std::invalid_argument("fluid_load must be > 0");
  }
  double value() const { return value_; }

 private:
  double value_;
};

// loads[e] = particles bound to ids[e] + fluid_load, ids ascending.
struct ElementLoadArray {
  Eigen::ArrayXd loads;
  std::vector<GlobalElementIndex> ids;

  std::size_t size() const { return ids.size(); }
  double total() const { return loads.sum(); }
  std::span<const double> view() const { return {loads.data(), static_cast<std::size_t>(loads.size())}; }
};

ElementLoadArray compute_element_load(std::span<const GlobalElementIndex> owned, const ParticleSet& particles,
                                      FluidLoadConstant fluid_load);

ElementLoadArray compute_element_load(const RankState& rank, FluidLoadConstant fluid_load);

// fluid_load = element kernel time / particle kernel time.
FluidLoadConstant calibrate_fluid_load(double element_kernel_time, double particle_kernel_time);

}  // namespace cmtlb
