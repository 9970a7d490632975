#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>

namespace cmtlb {

// true iff step > 0 and step is a multiple of k; throws for k < 1.
bool fixed_trigger(std::int64_t step, std::int64_t k);

// The balance performed after particle placement, before step 1.
constexpr bool compulsory_initial_balance() { return true; }

struct AdaptiveParams {
  double threshold = 0.05;           // relative slowdown that triggers the first adaptive balance
  std::int64_t eval_interval = 100;  // steps in each evaluation phase
};

// Controller state for adaptive triggering.
//
// An evaluation phase P covers the eval_interval steps starting one step after
// each balance (the compulsory one counts, at step 0). During P the baseline
// t1 (mean step time over P) is measured and nothing fires. t2 is the median of
// the last three step times.
//
// Before the first adaptive balance the controller fires once (t2-t1)/t1
// exceeds threshold. One step after every adaptive balance it predicts the
// next interval rebal = sqrt(2 reinit_itv lb_time / (t2 - t1)), evaluated
// before the new phase resets t1. Past P it accumulates degradation += t2 - t1
// and fires when cts - r_step >= rebal or degradation > lb_time.
struct AdaptiveState {
  AdaptiveParams params;
  double t1 = 0.0;
  double t1_sum = 0.0;
  std::int64_t t1_samples = 0;
  std::int64_t c1 = 0;
  double t2 = 0.0;
  std::array<double, 3> window{};
  bool window_primed = false;
  double lb_time = 0.0;
  std::int64_t r_step = 0;
  std::int64_t reinit_itv = 0;
  double rebal = std::numeric_limits<double>::infinity();
  double degradation = 0.0;
  bool lb_once = false;
};

AdaptiveState make_adaptive_state(AdaptiveParams params = {});

struct AdaptiveDecision {
  AdaptiveState state;
  bool rebalance = false;
};

// Feed one completed step (steps are 1-based and strictly increasing).
AdaptiveDecision adaptive_observe(AdaptiveState state, std::int64_t step, double step_time);

// Cost of the balance that the last positive decision triggered.
void record_lb_time(AdaptiveState& state, double lb_time);

// +infinity when excess <= 0: no slowdown to amortize against.
double rebalance_interval(double reinit_itv, double lb_time, double excess);

bool in_evaluation_phase(const AdaptiveState& state, std::int64_t step);

struct TriggerSpec {
  enum class Kind { never, fixed, adaptive };
  Kind kind = Kind::adaptive;
  std::int64_t k = 0;  // fixed interval
  AdaptiveParams adaptive;
};

// "never" | "adaptive" | "fixed:<k>"
TriggerSpec parse_trigger(const std::string& text);
std::string to_string(const TriggerSpec& spec);

}  // namespace cmtlb
