#include "cmtlb/simulation.hpp"

#include "cmtlb/load_model.hpp"
#include "cmtlb/migration.hpp"
#include "cmtlb/partition.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace cmtlb {

namespace {

Mesh make_mesh(const RunConfig& cfg) {
  validate(cfg);
  return order_elements(build_mesh(cfg.domain_lo, cfg.domain_hi, cfg.elements, cfg.n_per_axis));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Simulation::Simulation(RunConfig cfg)
    : cfg_(std::move(cfg)),
      mesh_(make_mesh(cfg_)),
      field_{std::clamp(cfg_.slab_lo.x(), mesh_.lower().x(), mesh_.upper().x()), cfg_.rate},
      ensemble_(std::make_unique<RankEnsemble>(cfg_.np, cfg_.exec_mode)),
      map_(ElementProcessorMap::uniform(cfg_.np, cfg_.nelgt())),
      states_(distribute(mesh_, init_particles(mesh_, cfg_.slab_lo, cfg_.slab_hi, cfg_.particles, cfg_.seed), map_)) {
  if (cfg_.trigger.kind == TriggerSpec::Kind::adaptive) adaptive_ = make_adaptive_state(cfg_.trigger.adaptive);
}

void Simulation::start() {
  if (started_) return;
  started_ = true;
  if (cfg_.trigger.kind != TriggerSpec::Kind::never && compulsory_initial_balance()) {
    initial_overhead_ = rebalance();
    adaptive_.lb_time = initial_overhead_;
  }
}

void Simulation::solve(int k) {
  RankState& s = states_[static_cast<std::size_t>(k)];
  verify_static(s);
  const double dt = cfg_.dt;
  std::vector<std::int64_t> count(static_cast<std::size_t>(s.num_elements()), 0);
  for (const Particle& p : s.particles.particles) ++count[static_cast<std::size_t>(p.element.value - s.first)];

  const Eigen::Index block = block_size(mesh_);
  std::vector<Payload> mean(count.size());
  std::size_t e = 0;
  for (auto& [g, data] : s.elements) {
    const double n = static_cast<double>(count[e]);
    data.fields = data.fields * (1.0 - 0.05 * dt) + dt * (1e-3 * n + 0.05);
    for (int q = 0; q < kConservedVars; ++q) mean[e][q] = data.fields.segment(q * block, block).mean();
    ++e;
  }
  for (Particle& p : s.particles.particles) {
    const Payload& m = mean[static_cast<std::size_t>(p.element.value - s.first)];
    p.payload += 0.5 * dt * (m - p.payload);
  }
}

StepTrace Simulation::advance() {
  start();
  ++step_;
  const auto t0 = std::chrono::steady_clock::now();
  const bool moving = step_ >= cfg_.advect_start;

  ensemble_->for_each_rank([&](int k) {
    ParticleSet& ps = states_[static_cast<std::size_t>(k)].particles;
    if (moving) advect(ps, mesh_, field_, cfg_.dt);
    rebin(ps, mesh_, map_);
  });
  exchange_particles(*ensemble_, states_, map_);
  ensemble_->for_each_rank([&](int k) { solve(k); });
  const double wall = seconds_since(t0);

  const auto np = static_cast<std::size_t>(cfg_.np);
  const CostModel cost = cfg_.cost();
  StepTrace row;
  row.step = step_;
  row.rank_loads.resize(np);
  std::vector<std::int64_t> occupied(np, 0);
  ensemble_->for_each_rank([&](int k) {
    const RankState& s = states_[static_cast<std::size_t>(k)];
    std::vector<char> hit(static_cast<std::size_t>(s.num_elements()), 0);
    for (const Particle& p : s.particles.particles) hit[static_cast<std::size_t>(p.element.value - s.first)] = 1;
    occupied[static_cast<std::size_t>(k)] = std::count(hit.begin(), hit.end(), 1);
  });
  double makespan = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    const RankState& s = states_[k];
    const auto parts = static_cast<std::int64_t>(s.particles.size());
    makespan = std::max(makespan, step_cost(s.num_elements(), parts, cost));
    row.rank_loads[k] = static_cast<double>(parts) + cfg_.fluid_load * static_cast<double>(s.num_elements());
  }
  row.sim_time = cfg_.timing == TimingMode::model ? makespan : wall;
  row.imbalance = imbalance(row.rank_loads);
  row.max_load = *std::max_element(row.rank_loads.begin(), row.rank_loads.end());
  row.mean_load = std::accumulate(row.rank_loads.begin(), row.rank_loads.end(), 0.0) / static_cast<double>(np);
  row.spread = static_cast<double>(std::accumulate(occupied.begin(), occupied.end(), std::int64_t{0})) /
               static_cast<double>(cfg_.nelgt());

  for (std::size_t k = 0; k < np; ++k) {
    states_[k].timing.last_step_cost = step_cost(states_[k].num_elements(), static_cast<std::int64_t>(states_[k].particles.size()), cost);
    states_[k].timing.total_step_cost += states_[k].timing.last_step_cost;
    ++states_[k].timing.steps;
  }

  bool fire = false;
  switch (cfg_.trigger.kind) {
    case TriggerSpec::Kind::never: break;
    case TriggerSpec::Kind::fixed: fire = fixed_trigger(step_, cfg_.trigger.k); break;
    case TriggerSpec::Kind::adaptive: {
      auto decision = adaptive_observe(adaptive_, step_, row.sim_time);
      adaptive_ = decision.state;
      fire = decision.rebalance;
      break;
    }
  }
  if (fire) {
    const double overhead = rebalance();
    if (cfg_.trigger.kind == TriggerSpec::Kind::adaptive) record_lb_time(adaptive_, overhead);
    row.lb_event = true;
    row.lb_overhead = overhead;
  }
  return row;
}

double Simulation::rebalance() {
  const auto t0 = std::chrono::steady_clock::now();
  PerRank<ElementLoadArray> local(static_cast<std::size_t>(cfg_.np));
  const FluidLoadConstant fluid(cfg_.fluid_load);
  ensemble_->for_each_rank([&](int k) { local[static_cast<std::size_t>(k)] = compute_element_load(states_[static_cast<std::size_t>(k)], fluid); });
  const ElementProcessorMap next = repartition(cfg_.algorithm, *ensemble_, local, map_, cfg_.partition());
  migrate_to(next);
  const double measured = seconds_since(t0);
  return cfg_.timing == TimingMode::model ? cfg_.lb_overhead : measured;
}

void Simulation::migrate_to(const ElementProcessorMap& next) {
  if (auto problem = check_map(next, cfg_.partition())) throw std::invalid_argument("migrate_to: " + *problem);
  const TransferPlan plan = plan_transfers(map_, next);
  execute_migration(*ensemble_, states_, plan, next);
  ensemble_->for_each_rank([&](int k) { reinitialize_static(states_[static_cast<std::size_t>(k)], mesh_); });
  map_ = next;
}

double RunResult::makespan_sum() const {
  return std::accumulate(traces.begin(), traces.end(), 0.0, [](double acc, const StepTrace& t) { return acc + t.sim_time; });
}

double RunResult::total_time() const {
  double total = initial_overhead;
  for (const StepTrace& t : traces) total += t.sim_time + t.lb_overhead.value_or(0.0);
  return total;
}

std::int64_t RunResult::lb_events() const {
  return std::count_if(traces.begin(), traces.end(), [](const StepTrace& t) { return t.lb_event; });
}

RunResult run_simulation(const RunConfig& cfg) {
  Simulation sim(cfg);
  sim.start();
  RunResult result;
  result.traces.reserve(static_cast<std::size_t>(cfg.steps));
  for (std::int64_t s = 0; s < cfg.steps; ++s) result.traces.push_back(sim.advance());
  result.initial_overhead = sim.initial_overhead();
  if (!cfg.out.empty()) write_trace(result.traces, cfg.out);
  return result;
}

}  // namespace cmtlb
