#pragma once

#include "cmtlb/comm.hpp"
#include "cmtlb/element_map.hpp"
#include "cmtlb/load_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cmtlb {

enum class Algorithm { centralized, distributed, hybrid };

Algorithm parse_algorithm(const std::string& text);
const char* to_string(Algorithm algorithm);

// One cut of the centralized sweep, kept for inspection.
struct CentralizedCut {
  double threshold = 0.0;
  std::int64_t p = 0;      // first position whose prefix sum exceeds threshold
  double d1 = 0.0;         // threshold - prefix(p-1)
  double d2 = 0.0;         // prefix(p) - threshold
  std::int64_t last = 0;   // last element of the partition closed by this cut
  bool forced = false;     // moved by the lelt bound
};

struct CentralizedOutcome {
  ElementProcessorMap map;
  PrefixSum prefix;
  std::vector<CentralizedCut> cuts;
};

// Prefix-sum threshold cutting over the globally ordered loads.
//
// Cut i aims at i*total/np: with p the first position whose prefix exceeds the
// threshold, the partition ends at p-1 when threshold - prefix(p-1) is strictly
// smaller than prefix(p) - threshold, else at p. The cut is then clamped so the
// closing partition holds at most lelt elements and the ranks still to come can
// hold the remainder.
CentralizedOutcome partition_centralized_traced(std::span<const double> loads, const PartitionConfig& cfg);
ElementProcessorMap partition_centralized(std::span<const double> loads, const PartitionConfig& cfg);
ElementProcessorMap partition_centralized(const ElementLoadArray& loads, const PartitionConfig& cfg);

// Left-to-right lelt repair: a rank holding more than lelt elements gives its
// tail to the next rank. Throws InfeasiblePartition when the last rank still
// exceeds lelt.
std::vector<std::int64_t> enforce_lelt(std::vector<std::int64_t> first_element, const PartitionConfig& cfg);

struct DistributedOutcome {
  ElementProcessorMap map;
  double loadavg = 0.0;
  std::vector<int> assignment;                  // pre-repair processor per element, global order
  std::vector<std::int64_t> candidate_first;    // pre-repair first elements
};

// `local[k]` holds rank k's loads for exactly the range current.first(k)..end(k)-1.
DistributedOutcome partition_distributed_traced(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                                const ElementProcessorMap& current, const PartitionConfig& cfg);
ElementProcessorMap partition_distributed(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                          const ElementProcessorMap& current, const PartitionConfig& cfg);

// Distributed prefix and assignment stages, then rank 0 assembles, repairs and broadcasts.
DistributedOutcome partition_hybrid_traced(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                           const ElementProcessorMap& current, const PartitionConfig& cfg);
ElementProcessorMap partition_hybrid(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                     const ElementProcessorMap& current, const PartitionConfig& cfg);

// Centralized cutting as a collective: loads gathered to rank 0, map broadcast.
ElementProcessorMap balance_centralized(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                        const PartitionConfig& cfg);

ElementProcessorMap repartition(Algorithm algorithm, RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                const ElementProcessorMap& current, const PartitionConfig& cfg);

}  // namespace cmtlb
