// Oracles and fixtures shared by the unit tests and the acceptance binary.
// Everything here is written from the algorithm statements directly and does
// not call into the partitioner implementation.
#pragma once

#include "cmtlb/comm.hpp"
#include "cmtlb/element_map.hpp"
#include "cmtlb/load_model.hpp"
#include "cmtlb/rank_state.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cmtlb::ElementLoadArray;
using cmtlb::ElementProcessorMap;
using cmtlb::GlobalElementIndex;
using cmtlb::PartitionConfig;
using cmtlb::PerRank;

// the worked example: particle counts (1,1,1,3,5,6,6,7,3,1,1,1) plus fluid load 3
inline const std::vector<double> kWorkedLoads{4, 4, 4, 6, 8, 9, 9, 10, 6, 4, 4, 4};

inline std::vector<double> prefix_of(const std::vector<double>& loads) {
  std::vector<double> p(loads.size() + 1, 0.0);  // p[0] = 0
  for (std::size_t e = 0; e < loads.size(); ++e) p[e + 1] = p[e] + loads[e];
  return p;
}

// Slice a global load vector into the rank-local arrays of `current`.
inline PerRank<ElementLoadArray> slice(const std::vector<double>& loads, const ElementProcessorMap& current) {
  PerRank<ElementLoadArray> out(static_cast<std::size_t>(current.num_ranks()));
  for (int k = 0; k < current.num_ranks(); ++k) {
    auto& l = out[static_cast<std::size_t>(k)];
    l.loads.resize(current.count(k));
    for (std::int64_t g = current.first(k); g < current.end(k); ++g) {
      l.loads[g - current.first(k)] = loads[static_cast<std::size_t>(g - 1)];
      l.ids.push_back(GlobalElementIndex{g});
    }
  }
  return out;
}

// Threshold cutting, written as a plain linear scan, each cut clamped to the
// element-count window [max(lp, nelgt - remaining*lelt), lp + lelt].
inline std::vector<std::int64_t> centralized(const std::vector<double>& loads, int np, std::int64_t lelt) {
  const auto n = static_cast<std::int64_t>(loads.size());
  const auto p = prefix_of(loads);
  const double total = p.back();
  std::vector<std::int64_t> first{1};
  std::int64_t lp = 0;
  for (int i = 1; i < np; ++i) {
    const double thr = i * total / np;
    std::int64_t pos = 1;
    while (pos <= n && p[static_cast<std::size_t>(pos)] <= thr) ++pos;
    if (pos > n) pos = n;
    const double d1 = thr - p[static_cast<std::size_t>(pos - 1)];
    const double d2 = p[static_cast<std::size_t>(pos)] - thr;
    std::int64_t last = d1 < d2 ? pos - 1 : pos;
    last = std::max(last, std::max(lp, n - static_cast<std::int64_t>(np - i) * lelt));
    last = std::min(last, lp + lelt);
    first.push_back(last + 1);
    lp = last;
  }
  return first;
}

// floor((prefix(e) - 1) / loadavg), clamped to [0, np-1]; serial prefix.
inline std::vector<int> serial_assignment(const std::vector<double>& loads, int np) {
  const auto p = prefix_of(loads);
  const double loadavg = p.back() / np;
  std::vector<int> a;
  for (std::size_t e = 1; e < p.size(); ++e) {
    const double v = std::floor((p[e] - 1.0) / loadavg);
    a.push_back(static_cast<int>(std::min<double>(std::max(v, 0.0), np - 1)));
  }
  return a;
}

// Rank r starts at the first element assigned to r or beyond; nelgt+1 if none.
inline std::vector<std::int64_t> first_from_assignment(const std::vector<int>& a, int np) {
  std::vector<std::int64_t> first(static_cast<std::size_t>(np), static_cast<std::int64_t>(a.size()) + 1);
  for (int r = np - 1; r >= 0; --r) {
    for (std::size_t e = 0; e < a.size(); ++e) {
      if (a[e] >= r) {
        first[static_cast<std::size_t>(r)] = static_cast<std::int64_t>(e) + 1;
        break;
      }
    }
  }
  first[0] = 1;
  return first;
}

// Closed form of the left-to-right lelt cascade: f'_k = min_{j<=k} f_j + (k-j)*lelt.
// nullopt when the last rank still exceeds lelt.
inline std::optional<std::vector<std::int64_t>> cascade(const std::vector<std::int64_t>& f, std::int64_t nelgt, std::int64_t lelt) {
  std::vector<std::int64_t> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::int64_t best = f[k];
    for (std::size_t j = 0; j < k; ++j) best = std::min(best, f[j] + static_cast<std::int64_t>(k - j) * lelt);
    out[k] = best;
  }
  if (nelgt + 1 - out.back() > lelt) return std::nullopt;
  return out;
}

inline std::vector<std::int64_t> distributed(const std::vector<double>& loads, int np, std::int64_t lelt, bool* infeasible = nullptr) {
  const auto n = static_cast<std::int64_t>(loads.size());
  auto fixed = cascade(first_from_assignment(serial_assignment(loads, np), np), n, lelt);
  if (infeasible) *infeasible = !fixed.has_value();
  return fixed.value_or(std::vector<std::int64_t>{});
}

// Independent map validity check: contiguous, covering, disjoint, <= lelt.
inline std::optional<std::string> violation(const std::vector<std::int64_t>& first, std::int64_t nelgt, std::int64_t lelt, int np) {
  if (static_cast<int>(first.size()) != np) return "wrong rank count";
  std::vector<int> owner(static_cast<std::size_t>(nelgt) + 1, -1);
  for (int k = 0; k < np; ++k) {
    const std::int64_t a = first[static_cast<std::size_t>(k)];
    const std::int64_t b = k + 1 < np ? first[static_cast<std::size_t>(k) + 1] : nelgt + 1;
    if (b < a) return "rank " + std::to_string(k) + " range inverted";
    if (b - a > lelt) return "rank " + std::to_string(k) + " exceeds lelt";
    for (std::int64_t g = a; g < b; ++g) {
      if (g < 1 || g > nelgt) return "element out of range";
      if (owner[static_cast<std::size_t>(g)] != -1) return "element owned twice";
      owner[static_cast<std::size_t>(g)] = k;
    }
  }
  for (std::int64_t g = 1; g <= nelgt; ++g) {
    if (owner[static_cast<std::size_t>(g)] == -1) return "element " + std::to_string(g) + " unowned";
  }
  return std::nullopt;
}

// Smallest achievable bottleneck for contiguous chunks without an element cap.
inline double optimal_bottleneck(const std::vector<double>& loads, int np) {
  auto fits = [&](double cap) {
    int parts = 1;
    double run = 0.0;
    for (double v : loads) {
      if (v > cap) return false;
      if (run + v > cap) {
        ++parts;
        run = 0.0;
      }
      run += v;
    }
    return parts <= np;
  };
  double lo = *std::max_element(loads.begin(), loads.end());
  double hi = prefix_of(loads).back();
  for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline double bottleneck(const std::vector<double>& loads, const std::vector<std::int64_t>& first) {
  const auto p = prefix_of(loads);
  double worst = 0.0;
  const auto n = static_cast<std::int64_t>(loads.size());
  for (std::size_t k = 0; k < first.size(); ++k) {
    const std::int64_t b = k + 1 < first.size() ? first[k + 1] : n + 1;
    worst = std::max(worst, p[static_cast<std::size_t>(b - 1)] - p[static_cast<std::size_t>(first[k] - 1)]);
  }
  return worst;
}

struct Instance {
  std::vector<double> loads;
  PartitionConfig cfg;
  ElementProcessorMap current = ElementProcessorMap::uniform(1, 1);
};

// Integer loads (fluid load + particle count), feasible lelt, and a random
// valid current map that may include empty ranks.
inline Instance random_instance(std::mt19937_64& gen, std::int64_t max_nelgt = 60, int max_np = 8) {
  Instance in;
  const auto n = std::uniform_int_distribution<std::int64_t>(1, max_nelgt)(gen);
  const int np = std::uniform_int_distribution<int>(1, max_np)(gen);
  const double fluid = std::uniform_int_distribution<int>(1, 5)(gen);
  const int style = std::uniform_int_distribution<int>(0, 2)(gen);
  for (std::int64_t e = 0; e < n; ++e) {
    int particles = 0;
    if (style == 0) particles = std::uniform_int_distribution<int>(0, 10)(gen);
    if (style == 1) particles = std::uniform_int_distribution<int>(0, 9)(gen) == 0 ? std::uniform_int_distribution<int>(50, 400)(gen) : 0;
    if (style == 2) particles = std::uniform_int_distribution<int>(0, 3)(gen) == 0 ? 0 : static_cast<int>(e);
    in.loads.push_back(fluid + particles);
  }
  const std::int64_t min_lelt = (n + np - 1) / np;
  const std::int64_t lelt = std::uniform_int_distribution<std::int64_t>(min_lelt, n)(gen);
  in.cfg = PartitionConfig{np, lelt, n};

  // random cut points, sorted, so ranks may be empty
  std::vector<std::int64_t> first{1};
  for (int k = 1; k < np; ++k) first.push_back(std::uniform_int_distribution<std::int64_t>(1, n + 1)(gen));
  std::sort(first.begin() + 1, first.end());
  in.current = ElementProcessorMap(first, n);
  return in;
}

// Bitwise image of the ensemble: element -> field bits, and per particle id
// the bits of everything it carries.
struct Snapshot {
  std::map<std::int64_t, std::vector<std::uint64_t>> fields;
  std::map<std::int64_t, std::vector<std::uint64_t>> particles;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

inline Snapshot snapshot(const PerRank<cmtlb::RankState>& states) {
  Snapshot snap;
  for (const auto& s : states) {
    for (const auto& [g, data] : s.elements) {
      auto& bits = snap.fields[g];
      for (Eigen::Index i = 0; i < data.fields.size(); ++i) bits.push_back(std::bit_cast<std::uint64_t>(data.fields[i]));
    }
    for (const auto& p : s.particles.particles) {
      std::vector<std::uint64_t> bits{static_cast<std::uint64_t>(p.element.value)};
      for (int a = 0; a < 3; ++a) bits.push_back(std::bit_cast<std::uint64_t>(p.position[a]));
      for (int a = 0; a < 3; ++a) bits.push_back(std::bit_cast<std::uint64_t>(p.velocity[a]));
      for (int a = 0; a < cmtlb::kPayloadSize; ++a) bits.push_back(std::bit_cast<std::uint64_t>(p.payload[a]));
      // a duplicated id would collide here; count it as a distinct key
      auto key = p.id;
      while (snap.particles.count(key)) key += std::int64_t{1} << 40;
      snap.particles[key] = std::move(bits);
    }
  }
  return snap;
}

// Ownership and binding consistency of every rank against `map`.
inline std::optional<std::string> state_violation(const PerRank<cmtlb::RankState>& states, const ElementProcessorMap& map) {
  for (int k = 0; k < map.num_ranks(); ++k) {
    const auto& s = states[static_cast<std::size_t>(k)];
    if (s.first != map.first(k) || s.end != map.end(k)) return "rank " + std::to_string(k) + " range differs from the map";
    if (static_cast<std::int64_t>(s.elements.size()) != map.count(k)) return "rank " + std::to_string(k) + " element count";
    for (const auto& [g, data] : s.elements) {
      if (!s.owns(GlobalElementIndex{g})) return "rank " + std::to_string(k) + " holds foreign element";
    }
    for (const auto& p : s.particles.particles) {
      if (!s.owns(p.element)) return "rank " + std::to_string(k) + " holds particle of foreign element";
    }
  }
  return std::nullopt;
}

}  // namespace oracle
