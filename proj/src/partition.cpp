#include "cmtlb/partition.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cmtlb {

namespace {

void check_loads(std::span<const double> loads) {
  for (double v : loads) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("partition: loads must be finite and non-negative");
  }
}

std::string rank_overflow_message(int rank, std::int64_t size, std::int64_t lelt) {
  return "partition: rank " + std::to_string(rank) + " would hold " + std::to_string(size) + " elements, lelt is " +
         std::to_string(lelt);
}

struct FirstElementEntry {
  int rank = 0;
  std::int64_t element = 0;
};

void check_local_layout(const PerRank<ElementLoadArray>& local, const ElementProcessorMap& current,
                        const PartitionConfig& cfg) {
  if (static_cast<int>(local.size()) != cfg.np || current.num_ranks() != cfg.np) {
    throw CollectiveMismatch("partition: expected one load array per rank");
  }
  if (current.num_elements() != cfg.nelgt) throw std::invalid_argument("partition: current map nelgt mismatch");
  for (int k = 0; k < cfg.np; ++k) {
    const ElementLoadArray& l = local[static_cast<std::size_t>(k)];
    if (static_cast<std::int64_t>(l.size()) != current.count(k)) {
      throw std::invalid_argument("partition: rank " + std::to_string(k) + " load array does not match its element range");
    }
    for (std::size_t e = 0; e < l.size(); ++e) {
      if (l.ids[e].value != current.first(k) + static_cast<std::int64_t>(e)) {
        throw std::invalid_argument("partition: rank " + std::to_string(k) + " loads are not its contiguous range");
      }
    }
    check_loads(l.view());
  }
}

ElementProcessorMap assemble_and_repair(const std::vector<FirstElementEntry>& entries, const PartitionConfig& cfg,
                                        std::vector<std::int64_t>* candidate) {
  std::vector<std::int64_t> first(static_cast<std::size_t>(cfg.np), cfg.nelgt + 1);
  for (const auto& entry : entries) first[static_cast<std::size_t>(entry.rank)] = entry.element;
  if (candidate) *candidate = first;
  return ElementProcessorMap(enforce_lelt(std::move(first), cfg), cfg.nelgt);
}

// Stages shared by the distributed and hybrid schemes: global prefix through an
// exclusive scan, per-element processor assignment, the boundary exchange with
// the rank holding the next element, and the per-rank first-element entries.
struct LocalAssignment {
  PerRank<std::vector<int>> assignment;
  PerRank<std::vector<FirstElementEntry>> entries;
  double loadavg = 0.0;
};

LocalAssignment assign_locally(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                               const ElementProcessorMap& current, const PartitionConfig& cfg) {
  check_local_layout(local, current, cfg);
  const auto np = static_cast<std::size_t>(cfg.np);

  PerRank<Eigen::ArrayXd> prefix(np);
  PerRank<double> rank_total(np, 0.0);
  ensemble.for_each_rank([&](int k) {
    const auto& loads = local[static_cast<std::size_t>(k)].loads;
    Eigen::ArrayXd sums(loads.size());
    double running = 0.0;
    for (Eigen::Index e = 0; e < loads.size(); ++e) {
      running += loads[e];
      sums[e] = running;
    }
    rank_total[static_cast<std::size_t>(k)] = running;
    prefix[static_cast<std::size_t>(k)] = std::move(sums);
  });

  const PerRank<double> offset = ensemble.exscan_sum(rank_total);
  const PerRank<double> total = ensemble.allreduce_sum(rank_total);
  if (!(total[0] > 0.0)) throw std::invalid_argument("partition: total load must be positive");

  LocalAssignment out;
  out.assignment.resize(np);
  out.entries.resize(np);
  out.loadavg = total[0] / cfg.np;

  PerRank<std::vector<Outbound<int>>> boundary(np);
  ensemble.for_each_rank([&](int k) {
    const auto ku = static_cast<std::size_t>(k);
    const double loadavg = total[ku] / cfg.np;
    Eigen::ArrayXd& sums = prefix[ku];
    sums += offset[ku];
    auto& assign = out.assignment[ku];
    assign.resize(static_cast<std::size_t>(sums.size()));
    for (Eigen::Index e = 0; e < sums.size(); ++e) {
      const double slot = std::floor((sums[e] - 1.0) / loadavg);
      assign[static_cast<std::size_t>(e)] = static_cast<int>(std::clamp(slot, 0.0, static_cast<double>(cfg.np - 1)));
    }
    // hand the last assignment to whoever holds the following element
    if (!assign.empty() && current.end(k) <= cfg.nelgt) {
      boundary[ku].push_back({current.owner(GlobalElementIndex{current.end(k)}), assign.back()});
    }
  });

  const auto received = ensemble.route(std::move(boundary));

  ensemble.for_each_rank([&](int k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& assign = out.assignment[ku];
    if (assign.empty()) return;
    int prev = -1;  // the rank holding element 1 has no predecessor
    if (!received[ku].empty()) prev = received[ku].front().payload;
    for (std::size_t e = 0; e < assign.size(); ++e) {
      for (int r = prev + 1; r <= assign[e]; ++r) {
        out.entries[ku].push_back({r, current.first(k) + static_cast<std::int64_t>(e)});
      }
      prev = std::max(prev, assign[e]);
    }
  });
  return out;
}

std::vector<int> flatten(const PerRank<std::vector<int>>& parts) {
  std::vector<int> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

}  // namespace

Algorithm parse_algorithm(const std::string& text) {
  if (text == "centralized") return Algorithm::centralized;
  if (text == "distributed") return Algorithm::distributed;
  if (text == "hybrid") return Algorithm::hybrid;
  throw std::invalid_argument("unknown algorithm '" + text + "' (expected centralized|distributed|hybrid)");
}

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::centralized: return "centralized";
    case Algorithm::distributed: return "distributed";
    case Algorithm::hybrid: return "hybrid";
  }
  return "?";
}

CentralizedOutcome partition_centralized_traced(std::span<const double> loads, const PartitionConfig& cfg) {
  require_feasible(cfg);
  if (static_cast<std::int64_t>(loads.size()) != cfg.nelgt) throw std::invalid_argument("partition: loads size != nelgt");
  check_loads(loads);

  PrefixSum prefix(loads);
  const double total = prefix.total();
  if (!(total > 0.0)) throw std::invalid_argument("partition: total load must be positive");

  const std::int64_t nelgt = cfg.nelgt;
  const auto& sums = prefix.sums();
  std::vector<std::int64_t> first(static_cast<std::size_t>(cfg.np), 1);
  std::vector<CentralizedCut> cuts;
  std::int64_t lp = 0;  // last element already assigned

  for (int i = 1; i < cfg.np; ++i) {
    CentralizedCut cut;
    cut.threshold = i * total / cfg.np;
    const auto it = std::upper_bound(sums.data(), sums.data() + sums.size(), cut.threshold);
    cut.p = std::min<std::int64_t>(it - sums.data() + 1, nelgt);
    cut.d1 = cut.threshold - prefix.at(cut.p - 1);
    cut.d2 = prefix.at(cut.p) - cut.threshold;
    std::int64_t last = cut.d1 < cut.d2 ? cut.p - 1 : cut.p;

    const std::int64_t ranks_left = cfg.np - i;
    const std::int64_t lowest = std::max(lp, nelgt - ranks_left * cfg.lelt);
    const std::int64_t highest = lp + cfg.lelt;
    const std::int64_t bounded = std::clamp(last, lowest, highest);
    cut.forced = bounded != std::max(last, lp);
    cut.last = bounded;

    first[static_cast<std::size_t>(i)] = bounded + 1;
    lp = bounded;
    cuts.push_back(cut);
  }
  if (nelgt - lp > cfg.lelt) throw InfeasiblePartition(rank_overflow_message(cfg.np - 1, nelgt - lp, cfg.lelt), cfg.np - 1);

  return CentralizedOutcome{ElementProcessorMap(std::move(first), nelgt), std::move(prefix), std::move(cuts)};
}

ElementProcessorMap partition_centralized(std::span<const double> loads, const PartitionConfig& cfg) {
  return partition_centralized_traced(loads, cfg).map;
}

ElementProcessorMap partition_centralized(const ElementLoadArray& loads, const PartitionConfig& cfg) {
  for (std::size_t e = 0; e < loads.size(); ++e) {
    if (loads.ids[e].value != static_cast<std::int64_t>(e) + 1) {
      throw std::invalid_argument("partition: centralized loads must be sorted by global element index");
    }
  }
  return partition_centralized(loads.view(), cfg);
}

std::vector<std::int64_t> enforce_lelt(std::vector<std::int64_t> first, const PartitionConfig& cfg) {
  require_feasible(cfg);
  if (static_cast<int>(first.size()) != cfg.np) throw std::invalid_argument("enforce_lelt: need one first element per rank");
  if (first.front() != 1) throw std::invalid_argument("enforce_lelt: rank 0 must start at element 1");
  for (std::size_t k = 1; k < first.size(); ++k) {
    if (first[k] < first[k - 1] || first[k] > cfg.nelgt + 1) {
      throw std::invalid_argument("enforce_lelt: first elements must be non-decreasing within [1, nelgt+1]");
    }
  }
  for (std::size_t k = 0; k + 1 < first.size(); ++k) {
    if (first[k + 1] - first[k] > cfg.lelt) first[k + 1] = first[k] + cfg.lelt;
  }
  const std::int64_t last_size = cfg.nelgt + 1 - first.back();
  if (last_size > cfg.lelt) throw InfeasiblePartition(rank_overflow_message(cfg.np - 1, last_size, cfg.lelt), cfg.np - 1);
  return first;
}

DistributedOutcome partition_distributed_traced(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                                const ElementProcessorMap& current, const PartitionConfig& cfg) {
  require_feasible(cfg);
  LocalAssignment stage = assign_locally(ensemble, local, current, cfg);
  const auto gathered = ensemble.allgatherv(stage.entries);

  // every rank assembles and repairs the same list
  const auto np = static_cast<std::size_t>(cfg.np);
  PerRank<std::vector<std::int64_t>> candidates(np);
  PerRank<std::vector<std::int64_t>> repaired(np);
  ensemble.for_each_rank([&](int k) {
    const auto ku = static_cast<std::size_t>(k);
    const ElementProcessorMap m = assemble_and_repair(gathered[ku], cfg, &candidates[ku]);
    repaired[ku].assign(m.first_elements().begin(), m.first_elements().end());
  });
  for (std::size_t k = 1; k < np; ++k) {
    if (repaired[k] != repaired[0]) throw std::logic_error("partition: ranks assembled different maps");
  }
  return DistributedOutcome{ElementProcessorMap(repaired[0], cfg.nelgt), stage.loadavg, flatten(stage.assignment),
                            candidates[0]};
}

ElementProcessorMap partition_distributed(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                          const ElementProcessorMap& current, const PartitionConfig& cfg) {
  return partition_distributed_traced(ensemble, local, current, cfg).map;
}

DistributedOutcome partition_hybrid_traced(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                           const ElementProcessorMap& current, const PartitionConfig& cfg) {
  require_feasible(cfg);
  LocalAssignment stage = assign_locally(ensemble, local, current, cfg);
  const auto at_root = ensemble.gatherv(0, stage.entries);
  std::vector<std::int64_t> candidate;
  const ElementProcessorMap map = assemble_and_repair(at_root[0], cfg, &candidate);
  const auto delivered = ensemble.broadcast(0, map);
  return DistributedOutcome{delivered.back(), stage.loadavg, flatten(stage.assignment), std::move(candidate)};
}

ElementProcessorMap partition_hybrid(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                     const ElementProcessorMap& current, const PartitionConfig& cfg) {
  return partition_hybrid_traced(ensemble, local, current, cfg).map;
}

ElementProcessorMap balance_centralized(RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                        const PartitionConfig& cfg) {
  require_feasible(cfg);
  if (static_cast<int>(local.size()) != cfg.np) throw CollectiveMismatch("partition: expected one load array per rank");
  PerRank<std::vector<std::pair<std::int64_t, double>>> contributions(local.size());
  ensemble.for_each_rank([&](int k) {
    const auto& l = local[static_cast<std::size_t>(k)];
    auto& out = contributions[static_cast<std::size_t>(k)];
    for (std::size_t e = 0; e < l.size(); ++e) out.emplace_back(l.ids[e].value, l.loads[static_cast<Eigen::Index>(e)]);
  });
  auto gathered = ensemble.gatherv(0, contributions);
  auto& all = gathered[0];
  std::sort(all.begin(), all.end());
  if (static_cast<std::int64_t>(all.size()) != cfg.nelgt) throw std::invalid_argument("partition: gathered loads do not cover nelgt");
  std::vector<double> ordered(all.size());
  for (std::size_t e = 0; e < all.size(); ++e) {
    if (all[e].first != static_cast<std::int64_t>(e) + 1) throw std::invalid_argument("partition: gathered loads have gaps or duplicates");
    ordered[e] = all[e].second;
  }
  const ElementProcessorMap map = partition_centralized(ordered, cfg);
  return ensemble.broadcast(0, map).back();
}

ElementProcessorMap repartition(Algorithm algorithm, RankEnsemble& ensemble, const PerRank<ElementLoadArray>& local,
                                const ElementProcessorMap& current, const PartitionConfig& cfg) {
  switch (algorithm) {
    case Algorithm::centralized: return balance_centralized(ensemble, local, cfg);
    case Algorithm::distributed: return partition_distributed(ensemble, local, current, cfg);
    case Algorithm::hybrid: return partition_hybrid(ensemble, local, current, cfg);
  }
  throw std::invalid_argument("partition: unknown algorithm");
}

}  // namespace cmtlb
