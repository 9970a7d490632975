#pragma once

#include "cmtlb/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmtlb {

struct PartitionConfig {
  int np = 1;
  std::int64_t lelt = 1;   // max elements per rank
  std::int64_t nelgt = 1;  // total elements

  bool feasible() const { return np >= 1 && lelt >= 1 && static_cast<std::int64_t>(np) * lelt >= nelgt; }
};

// Raised when no map can respect lelt: np*lelt < nelgt, or the boundary
// cascade leaves a rank (always the last one) holding more than lelt.
class InfeasiblePartition : public std::runtime_error {
 public:
  InfeasiblePartition(const std::string& what, int rank) : std::runtime_error(what), rank_(rank) {}
  // offending rank, or -1 when the configuration itself is infeasible
  int rank() const { return rank_; }

 private:
  int rank_;
};

// Throws InfeasiblePartition (rank -1) or std::invalid_argument.
void require_feasible(const PartitionConfig& cfg);

// Contiguous assignment of the ordered elements to ranks. Rank k owns
// [first(k), first(k+1) - 1]; the last rank owns through nelgt. Empty ranks
// are representable (first(k) == first(k+1)).
class ElementProcessorMap {
 public:
  ElementProcessorMap(std::vector<std::int64_t> first_element, std::int64_t nelgt);

  // nelgt/np each, the first nelgt % np ranks take one extra.
  static ElementProcessorMap uniform(int np, std::int64_t nelgt);

  int num_ranks() const { return static_cast<int>(first_.size()); }
  std::int64_t num_elements() const { return nelgt_; }

  std::int64_t first(int rank) const { return first_[static_cast<std::size_t>(rank)]; }
  std::int64_t end(int rank) const {  // one past the last owned element
    return rank + 1 < num_ranks() ? first(rank + 1) : nelgt_ + 1;
  }
  std::int64_t count(int rank) const { return end(rank) - first(rank); }
  int owner(GlobalElementIndex g) const;

  std::span<const std::int64_t> first_elements() const { return first_; }

  friend bool operator==(const ElementProcessorMap&, const ElementProcessorMap&) = default;

 private:
  std::vector<std::int64_t> first_;
  std::int64_t nelgt_;
};

// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> check_map(const ElementProcessorMap& map, const PartitionConfig& cfg);

// Cumulative load over the global element order. at(0) == 0, at(nelgt) == total.
class PrefixSum {
 public:
  PrefixSum() = default;
  explicit PrefixSum(std::span<const double> loads);

  std::int64_t length() const { return sums_.size(); }
  double at(std::int64_t position) const { return position == 0 ? 0.0 : sums_[position - 1]; }
  double total() const { return length() == 0 ? 0.0 : sums_[length() - 1]; }
  const Eigen::ArrayXd& sums() const { return sums_; }

 private:
  Eigen::ArrayXd sums_;
};

}  // namespace cmtlb
