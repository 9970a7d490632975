#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cmtlb {

struct StepTrace {
  std::int64_t step = 0;
  double sim_time = 0.0;  // makespan: max over ranks
  double imbalance = 1.0;
  double max_load = 0.0;
  double mean_load = 0.0;
  bool lb_event = false;
  std::optional<double> lb_overhead;  // set iff lb_event
  double spread = 0.0;                // fraction of elements holding >= 1 particle
  std::vector<double> rank_loads;     // not written to CSV

  friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

// max/mean; 1 when the total is zero. Throws for empty or negative input.
double imbalance(std::span<const double> per_rank_loads);

inline constexpr const char* kTraceHeader = "step,sim_time,imbalance,max_load,mean_load,lb_event,lb_overhead,spread";

// Shortest round-trip decimal for every real; lb_overhead empty when absent.
std::string format_trace(std::span<const StepTrace> traces);
void write_trace(std::span<const StepTrace> traces, const std::string& path);
std::vector<StepTrace> parse_trace(const std::string& csv);

}  // namespace cmtlb
