#pragma once

#include "cmtlb/comm.hpp"
#include "cmtlb/config.hpp"
#include "cmtlb/element_map.hpp"
#include "cmtlb/mesh.hpp"
#include "cmtlb/particles.hpp"
#include "cmtlb/rank_state.hpp"
#include "cmtlb/trace.hpp"
#include "cmtlb/trigger.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace cmtlb {

// Time-step loop over a simulated rank ensemble:
// advect -> rebin/exchange -> surrogate solve -> cost -> trigger -> repartition + migrate.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg);

  // The compulsory balance before step 1; no-op for trigger=never.
  void start();

  // Runs the next step and returns its trace row.
  StepTrace advance();

  // Repartition with the configured algorithm and migrate; returns the
  // overhead charged (configured value, or measured under wall timing).
  double rebalance();

  // Migrate to an arbitrary valid map (does not touch trigger state).
  void migrate_to(const ElementProcessorMap& map);

  const RunConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return mesh_; }
  const ElementProcessorMap& map() const { return map_; }
  const PerRank<RankState>& ranks() const { return states_; }
  std::int64_t step() const { return step_; }
  double initial_overhead() const { return initial_overhead_; }

 private:
  void solve(int rank);

  RunConfig cfg_;
  Mesh mesh_;
  ExpansionField field_;
  std::unique_ptr<RankEnsemble> ensemble_;
  ElementProcessorMap map_;
  PerRank<RankState> states_;
  AdaptiveState adaptive_;
  std::int64_t step_ = 0;
  double initial_overhead_ = 0.0;
  bool started_ = false;
};

struct RunResult {
  std::vector<StepTrace> traces;
  double initial_overhead = 0.0;

  // initial overhead + sum of makespans and balance overheads
  double total_time() const;
  double makespan_sum() const;
  std::int64_t lb_events() const;
};

RunResult run_simulation(const RunConfig& cfg);

}  // namespace cmtlb
