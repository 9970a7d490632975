#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmtlb {

enum class ExecMode { sequential, threaded };

ExecMode parse_exec_mode(const std::string& text);
const char* to_string(ExecMode mode);

// One value per logical rank, indexed by rank id.
template <class T>
using PerRank = std::vector<T>;

// Thrown when a collective is not entered by exactly np ranks.
class CollectiveMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <class T>
struct Outbound {
  int dest = 0;
  T payload{};
};

template <class T>
struct Inbound {
  int src = 0;
  T payload{};
};

// In-process ensemble of logical ranks executing bulk-synchronous supersteps.
//
// Rank-local work runs through for_each_rank(), which returns only after every
// rank finished (the barrier). Collectives take one contribution per rank and
// are pure functions of those contributions, so results do not depend on how
// the ranks were interleaved. In threaded mode each rank is served by its own
// worker thread; in sequential mode ranks run round-robin on the caller.
class RankEnsemble {
 public:
  RankEnsemble(int np, ExecMode mode);
  ~RankEnsemble();
  RankEnsemble(const RankEnsemble&) = delete;
  RankEnsemble& operator=(const RankEnsemble&) = delete;

  int size() const { return np_; }
  ExecMode mode() const { return mode_; }
  std::uint64_t epoch() const { return epoch_; }

  // Runs body(rank) for every rank. If any rank throws, the exception of the
  // lowest such rank is rethrown after all ranks finished.
  void for_each_rank(const std::function<void(int)>& body);

  // rank i receives sum(values[0..i-1]); rank 0 receives T{}.
  template <class T>
  PerRank<T> exscan_sum(const PerRank<T>& values) {
    enter(values.size(), "exscan_sum");
    PerRank<T> out(values.size());
    T running{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = running;
      running = running + values[i];
    }
    return out;
  }

  template <class T>
  PerRank<T> allreduce_sum(const PerRank<T>& values) {
    enter(values.size(), "allreduce_sum");
    T total{};
    for (const T& v : values) total = total + v;
    return PerRank<T>(values.size(), total);
  }

  // Every rank receives the rank-ordered concatenation.
  template <class T>
  PerRank<std::vector<T>> allgatherv(const PerRank<std::vector<T>>& items) {
    enter(items.size(), "allgatherv");
    return PerRank<std::vector<T>>(items.size(), concat(items));
  }

  // Only `root` receives the concatenation; the other entries are empty.
  template <class T>
  PerRank<std::vector<T>> gatherv(int root, const PerRank<std::vector<T>>& items) {
    enter(items.size(), "gatherv");
    check_rank(root, "gatherv root");
    PerRank<std::vector<T>> out(items.size());
    out[static_cast<std::size_t>(root)] = concat(items);
    return out;
  }

  template <class T>
  PerRank<T> broadcast(int root, const T& data) {
    enter(static_cast<std::size_t>(np_), "broadcast");
    check_rank(root, "broadcast root");
    return PerRank<T>(static_cast<std::size_t>(np_), data);
  }

  // Keyed exactly-once delivery. Inbound lists are ordered by (src, send order).
  template <class T>
  PerRank<std::vector<Inbound<T>>> route(PerRank<std::vector<Outbound<T>>> outbound) {
    enter(outbound.size(), "route");
    for (const auto& list : outbound) {
      for (const auto& msg : list) check_rank(msg.dest, "route destination");
    }
    PerRank<std::vector<Inbound<T>>> inbound(outbound.size());
    for (std::size_t src = 0; src < outbound.size(); ++src) {
      for (auto& msg : outbound[src]) {
        inbound[static_cast<std::size_t>(msg.dest)].push_back(Inbound<T>{static_cast<int>(src), std::move(msg.payload)});
      }
    }
    return inbound;
  }

 private:
  struct Pool;

  void enter(std::size_t contributions, const char* what);
  void check_rank(int rank, const char* what) const;

  template <class T>
  static std::vector<T> concat(const PerRank<std::vector<T>>& items) {
    std::vector<T> all;
    for (const auto& part : items) all.insert(all.end(), part.begin(), part.end());
    return all;
  }

  int np_;
  ExecMode mode_;
  std::uint64_t epoch_ = 0;
  std::unique_ptr<Pool> pool_;
};

}  // namespace cmtlb
