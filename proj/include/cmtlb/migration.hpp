#pragma once

#include "cmtlb/comm.hpp"
#include "cmtlb/element_map.hpp"
#include "cmtlb/mesh.hpp"
#include "cmtlb/particles.hpp"
#include "cmtlb/rank_state.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cmtlb {

struct ElementMove {
  GlobalElementIndex element;
  int dest = 0;

  friend bool operator==(const ElementMove&, const ElementMove&) = default;
};

struct TransferPlan {
  std::int64_t nelgt = 0;
  PerRank<std::vector<ElementMove>> outbound;  // indexed by current owner

  std::size_t total_moves() const;
  bool empty() const { return total_moves() == 0; }
};

// Elements whose owner differs between the maps; particles travel with them.
TransferPlan plan_transfers(const ElementProcessorMap& old_map, const ElementProcessorMap& new_map);

// Packs each moving element's dynamic block together with its particles into
// one payload per (element, dest), routes them and unpacks at the destination.
// Ownership afterwards equals new_map and every rank's layout generation is
// bumped, so static data must be reinitialized before use.
void execute_migration(RankEnsemble& ensemble, PerRank<RankState>& states, const TransferPlan& plan,
                       const ElementProcessorMap& new_map);

void reinitialize_static(RankState& state, const Mesh& mesh);

class StaleStaticData : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Throws StaleStaticData if any owned element's static block predates the
// current layout generation.
void verify_static(const RankState& state);

// Ships particles bound to elements the rank no longer owns to the owners.
// Returns the number of particles moved.
std::int64_t exchange_particles(RankEnsemble& ensemble, PerRank<RankState>& states, const ElementProcessorMap& map);

// Initial layout: element data and particles split by `map`, static data ready.
PerRank<RankState> distribute(const Mesh& mesh, const ParticleSet& particles, const ElementProcessorMap& map);

}  // namespace cmtlb
