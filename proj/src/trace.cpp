#include "cmtlb/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cmtlb {

namespace {

void put(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

double get_double(const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) throw std::invalid_argument("trace: bad number '" + field + "'");
  return v;
}

std::int64_t get_int(const std::string& field) {
  std::int64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) throw std::invalid_argument("trace: bad integer '" + field + "'");
  return v;
}

}  // namespace

double imbalance(std::span<const double> loads) {
  if (loads.empty()) throw std::invalid_argument("imbalance: no ranks");
  if (std::any_of(loads.begin(), loads.end(), [](double v) { return !(v >= 0.0); })) {
    throw std::invalid_argument("imbalance: loads must be non-negative");
  }
  const double total = std::accumulate(loads.begin(), loads.end(), 0.0);
  if (total == 0.0) return 1.0;
  const double mean = total / static_cast<double>(loads.size());
  return *std::max_element(loads.begin(), loads.end()) / mean;
}

std::string format_trace(std::span<const StepTrace> traces) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const StepTrace& t : traces) {
    out += std::to_string(t.step);
    out += ',';
    put(out, t.sim_time);
    out += ',';
    put(out, t.imbalance);
    out += ',';
    put(out, t.max_load);
    out += ',';
    put(out, t.mean_load);
    out += ',';
    out += t.lb_event ? '1' : '0';
    out += ',';
    if (t.lb_overhead) put(out, *t.lb_overhead);
    out += ',';
    put(out, t.spread);
    out += '\n';
  }
  return out;
}

void write_trace(std::span<const StepTrace> traces, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open trace file '" + path + "' for writing");
  const std::string text = format_trace(traces);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing trace file '" + path + "'");
}

std::vector<StepTrace> parse_trace(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw std::invalid_argument("trace: missing or unexpected header");
  std::vector<StepTrace> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8) throw std::invalid_argument("trace: expected 8 fields, got " + std::to_string(f.size()));
    StepTrace t;
    t.step = get_int(f[0]);
    t.sim_time = get_double(f[1]);
    t.imbalance = get_double(f[2]);
    t.max_load = get_double(f[3]);
    t.mean_load = get_double(f[4]);
    t.lb_event = f[5] == "1";
    if (!f[6].empty()) t.lb_overhead = get_double(f[6]);
    t.spread = get_double(f[7]);
    rows.push_back(std::move(t));
  }
  return rows;
}

}  // namespace cmtlb
