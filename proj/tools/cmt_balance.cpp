// cmt-balance: run the load-balancing simulation or partition a load file once.
//
// Exit codes: 0 success, 2 infeasible partition, 1 any other error.

#include "cmtlb/comm.hpp"
#include "cmtlb/config.hpp"
#include "cmtlb/element_map.hpp"
#include "cmtlb/partition.hpp"
#include "cmtlb/simulation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> read_loads(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open loads file '" + path + "'");
  std::vector<double> loads;
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream fields(line);
    std::string token;
    std::vector<double> row;
    bool numeric = true;
    while (fields >> token) {
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first_line) {  // header
        first_line = false;
        continue;
      }
      throw std::runtime_error("loads file: non-numeric entry '" + token + "'");
    }
    first_line = false;
    loads.insert(loads.end(), row.begin(), row.end());
  }
  if (loads.empty()) throw std::runtime_error("loads file '" + path + "' holds no values");
  return loads;
}

std::string join(std::span<const std::int64_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

cmtlb::ElementProcessorMap partition_once(const std::vector<double>& loads, int np, std::int64_t lelt,
                                          cmtlb::Algorithm algorithm) {
  using namespace cmtlb;
  const PartitionConfig cfg{np, lelt, static_cast<std::int64_t>(loads.size())};
  if (algorithm == Algorithm::centralized) return partition_centralized(loads, cfg);

  require_feasible(cfg);
  // ranks start from the uniform layout, as before the first balance
  const ElementProcessorMap current = ElementProcessorMap::uniform(np, cfg.nelgt);
  PerRank<ElementLoadArray> local(static_cast<std::size_t>(np));
  for (int k = 0; k < np; ++k) {
    auto& l = local[static_cast<std::size_t>(k)];
    l.loads.resize(current.count(k));
    for (std::int64_t g = current.first(k); g < current.end(k); ++g) {
      l.ids.push_back(GlobalElementIndex{g});
      l.loads[g - current.first(k)] = loads[static_cast<std::size_t>(g - 1)];
    }
  }
  RankEnsemble ensemble(np, ExecMode::sequential);
  return algorithm == Algorithm::hybrid ? partition_hybrid(ensemble, local, current, cfg)
                                        : partition_distributed(ensemble, local, current, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic load balancing for particle-laden spectral-element meshes"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the simulated time-step loop and write a per-step trace");
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  run->add_option("--config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
  auto override_opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
    run->add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };
  override_opt("--ranks", "np", "number of logical ranks");
  override_opt("--elements", "elements", "elements per axis, X,Y,Z");
  override_opt("--particles", "particles", "particle count");
  override_opt("--algorithm", "algorithm", "centralized|distributed|hybrid");
  override_opt("--trigger", "trigger", "fixed:K|adaptive|never");
  override_opt("--lelt", "lelt", "maximum elements per rank");
  override_opt("--fluid-load", "fluid_load", "load units per element for the fluid solve");
  override_opt("--steps", "steps", "time steps");
  override_opt("--seed", "seed", "particle placement seed");
  override_opt("--exec-mode", "exec_mode", "sequential|threaded");
  override_opt("--out", "out", "trace CSV path");

  auto* part = app.add_subcommand("partition", "Partition one load array and print the first element of every rank");
  std::string loads_path;
  int np = 1;
  std::int64_t lelt = 1;
  std::string algorithm_name;
  part->add_option("--loads", loads_path, "CSV of per-element loads in global element order")->required()->check(CLI::ExistingFile);
  part->add_option("--np", np, "number of ranks")->required();
  part->add_option("--lelt", lelt, "maximum elements per rank")->required();
  part->add_option("--algorithm", algorithm_name, "centralized|distributed|hybrid")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) {
      cmtlb::RunConfig cfg = cmtlb::load_config(config_path);
      for (const auto& [key, value] : overrides) cmtlb::apply_setting(cfg, key, value);
      cmtlb::validate(cfg);
      const cmtlb::RunResult result = cmtlb::run_simulation(cfg);
      std::cout << "steps " << result.traces.size() << "\n"
                << "lb_events " << result.lb_events() << "\n"
                << "makespan_sum " << result.makespan_sum() << "\n"
                << "total_time " << result.total_time() << "\n"
                << "final_imbalance " << result.traces.back().imbalance << "\n";
      if (!cfg.out.empty()) std::cout << "trace " << cfg.out << "\n";
    } else if (*part) {
      const auto loads = read_loads(loads_path);
      const auto map = partition_once(loads, np, lelt, cmtlb::parse_algorithm(algorithm_name));
      std::cout << join(map.first_elements()) << "\n";
    }
  } catch (const cmtlb::InfeasiblePartition& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
