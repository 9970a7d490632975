#include "cmtlb/comm.hpp"

#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>

namespace cmtlb {

ExecMode parse_exec_mode(const std::string& text) {
  if (text == "sequential") return ExecMode::sequential;
  if (text == "threaded") return ExecMode::threaded;
  throw std::invalid_argument("unknown exec_mode '" + text + "' (expected sequential|threaded)");
}

const char* to_string(ExecMode mode) { return mode == ExecMode::threaded ? "threaded" : "sequential"; }

// One persistent worker per rank. A superstep publishes the body, bumps the
// generation and waits until every worker reported back.
struct RankEnsemble::Pool {
  explicit Pool(int np) : errors(static_cast<std::size_t>(np)) {
    workers.reserve(static_cast<std::size_t>(np));
    for (int r = 0; r < np; ++r) {
      workers.emplace_back([this, r](std::stop_token stop) { serve(r, stop); });
    }
  }

  ~Pool() {
    for (auto& w : workers) w.request_stop();
    {
      std::lock_guard lock(mutex);
      ++generation;
    }
    wake.notify_all();
  }

  void serve(int rank, std::stop_token stop) {
    std::uint64_t seen = 0;
    while (true) {
      const std::function<void(int)>* job = nullptr;
      {
        std::unique_lock lock(mutex);
        wake.wait(lock, [&] { return generation != seen; });
        seen = generation;
        if (stop.stop_requested()) return;
        job = body;
      }
      try {
        (*job)(rank);
      } catch (...) {
        errors[static_cast<std::size_t>(rank)] = std::current_exception();
      }
      {
        std::lock_guard lock(mutex);
        ++finished;
      }
      done.notify_one();
    }
  }

  void run(const std::function<void(int)>& fn) {
    {
      std::lock_guard lock(mutex);
      body = &fn;
      finished = 0;
      ++generation;
    }
    wake.notify_all();
    std::unique_lock lock(mutex);
    done.wait(lock, [&] { return finished == workers.size(); });
  }

  std::mutex mutex;
  std::condition_variable wake;
  std::condition_variable done;
  const std::function<void(int)>* body = nullptr;
  std::uint64_t generation = 0;
  std::size_t finished = 0;
  std::vector<std::exception_ptr> errors;
  std::vector<std::jthread> workers;  // last member: joined before the rest is destroyed
};

RankEnsemble::RankEnsemble(int np, ExecMode mode) : np_(np), mode_(mode) {
  if (np < 1) throw std::invalid_argument("rank ensemble: np must be >= 1");
  if (mode_ == ExecMode::threaded) pool_ = std::make_unique<Pool>(np);
}

RankEnsemble::~RankEnsemble() = default;

void RankEnsemble::for_each_rank(const std::function<void(int)>& body) {
  if (mode_ == ExecMode::sequential) {
    std::exception_ptr first;
    for (int r = 0; r < np_; ++r) {
      try {
        body(r);
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
    return;
  }
  pool_->run(body);
  for (auto& err : pool_->errors) {
    if (err) {
      std::exception_ptr e = err;
      for (auto& clear : pool_->errors) clear = nullptr;
      std::rethrow_exception(e);
    }
  }
}

void RankEnsemble::enter(std::size_t contributions, const char* what) {
  if (contributions != static_cast<std::size_t>(np_)) {
    throw CollectiveMismatch(std::string(what) + ": " + std::to_string(contributions) + " contributions for " +
                             std::to_string(np_) + " ranks");
  }
  ++epoch_;
}

void RankEnsemble::check_rank(int rank, const char* what) const {
  if (rank < 0 || rank >= np_) throw std::out_of_range(std::string(what) + " " + std::to_string(rank) + " is not a rank");
}

}  // namespace cmtlb
