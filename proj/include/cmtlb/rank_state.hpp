#pragma once

#include "cmtlb/mesh.hpp"
#include "cmtlb/particles.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>

namespace cmtlb {

// Conserved variables carried per element: mass, energy, three momentum components.
inline constexpr int kConservedVars = 5;

struct ElementData {
  // kConservedVars contiguous blocks of n^3 reals
  Eigen::ArrayXd fields;
  // grid point coordinates, 3 blocks of n^3 reals; recomputed, never transferred
  Eigen::ArrayXd geometry;
  // layout generation the geometry was computed for
  std::uint64_t static_generation = 0;
};

struct RankTiming {
  double last_step_cost = 0.0;
  double total_step_cost = 0.0;
  std::int64_t steps = 0;
};

// One logical rank: its contiguous element range, the element data it owns,
// and the particles bound to those elements.
struct RankState {
  int rank = 0;
  std::int64_t first = 1;  // owned range [first, end)
  std::int64_t end = 1;
  std::map<std::int64_t, ElementData> elements;  // keyed by global element index
  ParticleSet particles;
  // bumped whenever ownership changes; static blocks must be recomputed to match
  std::uint64_t layout_generation = 0;
  RankTiming timing;

  std::int64_t num_elements() const { return end - first; }
  bool owns(GlobalElementIndex g) const { return g.value >= first && g.value < end; }
};

std::int64_t block_size(const Mesh& mesh);

// Deterministic initial conserved-variable block for element g.
Eigen::ArrayXd initial_fields(const Mesh& mesh, GlobalElementIndex g);

// Grid point coordinates of element g (equispaced, endpoints included).
Eigen::ArrayXd element_geometry(const Mesh& mesh, GlobalElementIndex g);

}  // namespace cmtlb
