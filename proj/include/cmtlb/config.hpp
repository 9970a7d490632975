#pragma once

#include "cmtlb/comm.hpp"
#include "cmtlb/mesh.hpp"
#include "cmtlb/partition.hpp"
#include "cmtlb/trigger.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace cmtlb {

enum class TimingMode { model, wall };

struct CostModel {
  double c_elem = 3e-6;  // seconds-simulated per element per step
  double c_part = 1e-6;  // seconds-simulated per particle per step
};

// One rank's simulated time for a step.
double step_cost(std::int64_t rank_elements, std::int64_t rank_particles, const CostModel& cost);

struct RunConfig {
  Vec3 domain_lo{-2.208, 0.0, 0.0};
  Vec3 domain_hi{6.0, 0.0802, 0.0802};
  Cell3 elements{12, 1, 1};
  int n_per_axis = 5;

  std::int64_t particles = 36;
  // clipped to the domain, so infinite y/z bounds mean "full cross-section"
  Vec3 slab_lo{-1.0, -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Vec3 slab_hi{-0.5, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::uint64_t seed = 7;

  std::int64_t steps = 100;
  double dt = 1e-3;
  double rate = 30.0;  // default slab reaches the far wall within the default 100 steps
  std::int64_t advect_start = 1;  // first step at which particles move

  double fluid_load = 3.0;
  int np = 3;
  std::int64_t lelt = 0;  // 0: nelgt (no cap)
  Algorithm algorithm = Algorithm::hybrid;
  TriggerSpec trigger{};
  ExecMode exec_mode = ExecMode::sequential;
  TimingMode timing = TimingMode::model;

  double c_part = 1e-6;
  std::optional<double> c_elem;  // derived as fluid_load * c_part when unset
  double lb_overhead = 2e-3;     // seconds-simulated charged per balance in model timing

  std::string out;

  std::int64_t nelgt() const { return static_cast<std::int64_t>(elements.x()) * elements.y() * elements.z(); }
  std::int64_t effective_lelt() const { return lelt > 0 ? lelt : nelgt(); }
  CostModel cost() const { return CostModel{c_elem.value_or(fluid_load * c_part), c_part}; }
  PartitionConfig partition() const { return PartitionConfig{np, effective_lelt(), nelgt()}; }
};

// Throws std::invalid_argument, or InfeasiblePartition when np*lelt < nelgt.
void validate(const RunConfig& cfg);

// Applies one `key = value` setting; throws std::invalid_argument on unknown
// keys or malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat `key = value` lines, `#` starts a comment.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

}  // namespace cmtlb
