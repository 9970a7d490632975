#include "cmtlb/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmtlb {

namespace {

double median3(std::array<double, 3> w) {
  std::sort(w.begin(), w.end());
  return w[1];
}

void start_phase(AdaptiveState& s, double step_time) {
  s.t1_sum = step_time;
  s.t1_samples = 1;
  s.t1 = step_time;
  s.c1 = s.r_step + (s.params.eval_interval + 1) / 2;
}

void fire(AdaptiveState& s, std::int64_t cts, std::int64_t reinit_itv) {
  s.reinit_itv = reinit_itv;
  s.r_step = cts;
  s.degradation = 0.0;
}

}  // namespace

bool fixed_trigger(std::int64_t step, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("fixed trigger interval must be >= 1");
  return step > 0 && step % k == 0;
}

AdaptiveState make_adaptive_state(AdaptiveParams params) {
  if (!(params.threshold > 0.0 && params.threshold < 1.0)) throw std::invalid_argument("adaptive threshold must be in (0, 1)");
  if (params.eval_interval < 3) throw std::invalid_argument("adaptive eval_interval must be >= 3");
  AdaptiveState s;
  s.params = params;
  s.c1 = (params.eval_interval + 1) / 2;
  return s;
}

double rebalance_interval(double reinit_itv, double lb_time, double excess) {
  if (!(excess > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * reinit_itv * lb_time / excess);
}

bool in_evaluation_phase(const AdaptiveState& s, std::int64_t step) {
  return step > s.r_step && step <= s.r_step + s.params.eval_interval;
}

AdaptiveDecision adaptive_observe(AdaptiveState s, std::int64_t cts, double step_time) {
  if (cts <= s.r_step) throw std::invalid_argument("adaptive_observe: step must follow the last balance step");

  if (!s.window_primed) {
    s.window.fill(step_time);
    s.window_primed = true;
  } else {
    s.window = {s.window[1], s.window[2], step_time};
  }
  s.t2 = median3(s.window);

  if (s.lb_once && cts - s.r_step == 1) s.rebal = rebalance_interval(static_cast<double>(s.reinit_itv), s.lb_time, s.t2 - s.t1);

  if (in_evaluation_phase(s, cts)) {
    if (cts == s.r_step + 1) {
      start_phase(s, step_time);
    } else {
      s.t1_sum += step_time;
      ++s.t1_samples;
      s.t1 = s.t1_sum / static_cast<double>(s.t1_samples);
    }
    return {s, false};
  }

  if (!s.lb_once) {
    if (s.t1 > 0.0 && (s.t2 - s.t1) / s.t1 > s.params.threshold) {
      fire(s, cts, cts - s.c1);
      s.lb_once = true;
      return {s, true};
    }
    return {s, false};
  }

  s.degradation += s.t2 - s.t1;
  if (static_cast<double>(cts - s.r_step) >= s.rebal || s.degradation > s.lb_time) {
    fire(s, cts, cts - s.r_step);
    return {s, true};
  }
  return {s, false};
}

void record_lb_time(AdaptiveState& s, double lb_time) {
  if (!(lb_time >= 0.0)) throw std::invalid_argument("lb_time must be >= 0");
  s.lb_time = lb_time;
}

TriggerSpec parse_trigger(const std::string& text) {
  TriggerSpec spec;
  if (text == "never") {
    spec.kind = TriggerSpec::Kind::never;
  } else if (text == "adaptive") {
    spec.kind = TriggerSpec::Kind::adaptive;
  } else if (text.rfind("fixed:", 0) == 0) {
    spec.kind = TriggerSpec::Kind::fixed;
    std::size_t used = 0;
    const std::string digits = text.substr(6);
    try {
      spec.k = std::stoll(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || spec.k < 1) throw std::invalid_argument("trigger '" + text + "': k must be a positive integer");
  } else {
    throw std::invalid_argument("unknown trigger '" + text + "' (expected fixed:<k>|adaptive|never)");
  }
  return spec;
}

std::string to_string(const TriggerSpec& spec) {
  switch (spec.kind) {
    case TriggerSpec::Kind::never: return "never";
    case TriggerSpec::Kind::adaptive: return "adaptive";
    case TriggerSpec::Kind::fixed: return "fixed:" + std::to_string(spec.k);
  }
  return "?";
}

}  // namespace cmtlb
