#include "cmtlb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmtlb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw std::invalid_argument("config: " + key + " expects a number, got '" + text + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw std::invalid_argument("config: " + key + " expects an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split3(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3) throw std::invalid_argument("config: " + key + " expects three comma-separated values");
  return parts;
}

Vec3 to_vec3(const std::string& key, const std::string& text) {
  const auto p = split3(key, text);
  return Vec3(to_double(key, p[0]), to_double(key, p[1]), to_double(key, p[2]));
}

Cell3 to_cell3(const std::string& key, const std::string& text) {
  const auto p = split3(key, text);
  return Cell3(static_cast<int>(to_int(key, p[0])), static_cast<int>(to_int(key, p[1])), static_cast<int>(to_int(key, p[2])));
}

}  // namespace

double step_cost(std::int64_t rank_elements, std::int64_t rank_particles, const CostModel& cost) {
  if (rank_elements < 0 || rank_particles < 0) throw std::invalid_argument("step_cost: counts must be >= 0");
  return cost.c_elem * static_cast<double>(rank_elements) + cost.c_part * static_cast<double>(rank_particles);
}

void validate(const RunConfig& cfg) {
  if ((cfg.elements < 1).any()) throw std::invalid_argument("config: elements must be >= 1 on every axis");
  if (cfg.n_per_axis < 2) throw std::invalid_argument("config: n_per_axis must be >= 2");
  if (cfg.particles < 0) throw std::invalid_argument("config: particles must be >= 0");
  if (cfg.steps < 1) throw std::invalid_argument("config: steps must be >= 1");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
  if (!(cfg.rate >= 0.0)) throw std::invalid_argument("config: rate must be >= 0");
  if (!(cfg.fluid_load > 0.0)) throw std::invalid_argument("config: fluid_load must be > 0");
  if (cfg.np < 1) throw std::invalid_argument("config: np must be >= 1");
  if (cfg.lelt < 0) throw std::invalid_argument("config: lelt must be >= 0");
  if (!(cfg.c_part > 0.0)) throw std::invalid_argument("config: c_part must be > 0");
  if (cfg.c_elem) {
    if (!(*cfg.c_elem > 0.0)) throw std::invalid_argument("config: c_elem must be > 0");
    const double ratio = *cfg.c_elem / cfg.c_part;
    if (std::abs(ratio - cfg.fluid_load) > 1e-9 * cfg.fluid_load) {
      throw std::invalid_argument("config: c_elem / c_part must equal fluid_load");
    }
  }
  if (!(cfg.lb_overhead >= 0.0)) throw std::invalid_argument("config: lb_overhead must be >= 0");
  if (cfg.trigger.kind == TriggerSpec::Kind::adaptive) make_adaptive_state(cfg.trigger.adaptive);
  require_feasible(cfg.partition());
}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "domain_lo") cfg.domain_lo = to_vec3(key, value);
  else if (key == "domain_hi") cfg.domain_hi = to_vec3(key, value);
  else if (key == "elements") cfg.elements = to_cell3(key, value);
  else if (key == "n_per_axis") cfg.n_per_axis = static_cast<int>(to_int(key, value));
  else if (key == "particles") cfg.particles = to_int(key, value);
  else if (key == "slab_lo") cfg.slab_lo = to_vec3(key, value);
  else if (key == "slab_hi") cfg.slab_hi = to_vec3(key, value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "steps") cfg.steps = to_int(key, value);
  else if (key == "dt") cfg.dt = to_double(key, value);
  else if (key == "rate") cfg.rate = to_double(key, value);
  else if (key == "advect_start") cfg.advect_start = to_int(key, value);
  else if (key == "fluid_load") cfg.fluid_load = to_double(key, value);
  else if (key == "np") cfg.np = static_cast<int>(to_int(key, value));
  else if (key == "lelt") cfg.lelt = to_int(key, value);
  else if (key == "algorithm") cfg.algorithm = parse_algorithm(value);
  else if (key == "trigger") {
    const AdaptiveParams keep = cfg.trigger.adaptive;
    cfg.trigger = parse_trigger(value);
    cfg.trigger.adaptive = keep;
  }
  else if (key == "adaptive.threshold") cfg.trigger.adaptive.threshold = to_double(key, value);
  else if (key == "adaptive.eval_interval") cfg.trigger.adaptive.eval_interval = to_int(key, value);
  else if (key == "exec_mode") cfg.exec_mode = parse_exec_mode(value);
  else if (key == "timing") {
    if (value == "model") cfg.timing = TimingMode::model;
    else if (value == "wall") cfg.timing = TimingMode::wall;
    else throw std::invalid_argument("config: timing must be model|wall");
  }
  else if (key == "c_part") cfg.c_part = to_double(key, value);
  else if (key == "c_elem") cfg.c_elem = to_double(key, value);
  else if (key == "lb_overhead") cfg.lb_overhead = to_double(key, value);
  else if (key == "out") cfg.out = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

}  // namespace cmtlb
