#include "cmtlb/element_map.hpp"

#include <algorithm>

namespace cmtlb {

void require_feasible(const PartitionConfig& cfg) {
  if (cfg.np < 1) throw std::invalid_argument("partition: np must be >= 1");
  if (cfg.lelt < 1) throw std::invalid_argument("partition: lelt must be >= 1");
  if (cfg.nelgt < 1) throw std::invalid_argument("partition: nelgt must be >= 1");
  if (!cfg.feasible()) {
    throw InfeasiblePartition("partition: np*lelt = " + std::to_string(static_cast<std::int64_t>(cfg.np) * cfg.lelt) +
                                  " cannot hold nelgt = " + std::to_string(cfg.nelgt) + " elements",
                              -1);
  }
}

ElementProcessorMap::ElementProcessorMap(std::vector<std::int64_t> first_element, std::int64_t nelgt)
    : first_(std::move(first_element)), nelgt_(nelgt) {
  if (first_.empty()) throw std::invalid_argument("element map: needs at least one rank");
  if (first_.front() != 1) throw std::invalid_argument("element map: rank 0 must start at element 1");
  for (std::size_t k = 1; k < first_.size(); ++k) {
    if (first_[k] < first_[k - 1] || first_[k] > nelgt_ + 1) {
      throw std::invalid_argument("element map: first elements must be non-decreasing within [1, nelgt+1]");
    }
  }
}

ElementProcessorMap ElementProcessorMap::uniform(int np, std::int64_t nelgt) {
  if (np < 1) throw std::invalid_argument("element map: np must be >= 1");
  std::vector<std::int64_t> first(static_cast<std::size_t>(np));
  const std::int64_t base = nelgt / np;
  const std::int64_t extra = nelgt % np;
  std::int64_t next = 1;
  for (int k = 0; k < np; ++k) {
    first[static_cast<std::size_t>(k)] = next;
    next += base + (k < extra ? 1 : 0);
  }
  return ElementProcessorMap(std::move(first), nelgt);
}

int ElementProcessorMap::owner(GlobalElementIndex g) const {
  if (g.value < 1 || g.value > nelgt_) throw std::out_of_range("element map: element " + std::to_string(g.value) + " out of range");
  // last rank whose first element is <= g; skips empty ranks sharing a boundary
  const auto it = std::upper_bound(first_.begin(), first_.end(), g.value);
  return static_cast<int>(it - first_.begin()) - 1;
}

std::optional<std::string> check_map(const ElementProcessorMap& map, const PartitionConfig& cfg) {
  if (map.num_ranks() != cfg.np) return "rank count " + std::to_string(map.num_ranks()) + " != np " + std::to_string(cfg.np);
  if (map.num_elements() != cfg.nelgt) return "nelgt mismatch";
  if (map.first(0) != 1) return "rank 0 does not start at element 1";
  std::int64_t covered = 0;
  for (int k = 0; k < map.num_ranks(); ++k) {
    if (map.first(k) != covered + 1) return "rank " + std::to_string(k) + " is not contiguous with rank " + std::to_string(k - 1);
    if (map.count(k) < 0) return "rank " + std::to_string(k) + " has negative size";
    if (map.count(k) > cfg.lelt) {
      return "rank " + std::to_string(k) + " holds " + std::to_string(map.count(k)) + " > lelt " + std::to_string(cfg.lelt);
    }
    covered += map.count(k);
  }
  if (covered != cfg.nelgt) return "ranges cover " + std::to_string(covered) + " of " + std::to_string(cfg.nelgt) + " elements";
  return std::nullopt;
}

PrefixSum::PrefixSum(std::span<const double> loads) : sums_(static_cast<Eigen::Index>(loads.size())) {
  double running = 0.0;
  for (std::size_t e = 0; e < loads.size(); ++e) {
    running += loads[e];
    sums_[static_cast<Eigen::Index>(e)] = running;
  }
}

}  // namespace cmtlb
