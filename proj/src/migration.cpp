#include "cmtlb/migration.hpp"

#include "cmtlb/wire.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace cmtlb {

std::int64_t block_size(const Mesh& mesh) {
  const std::int64_t n = mesh.points_per_axis();
  return n * n * n;
}

Eigen::ArrayXd initial_fields(const Mesh& mesh, GlobalElementIndex g) {
  const Eigen::Index block = block_size(mesh);
  const Vec3 c = mesh.center(g);
  Eigen::ArrayXd f(kConservedVars * block);
  for (int q = 0; q < kConservedVars; ++q) {
    f.segment(q * block, block) =
        (q + 1.0) + 0.01 * c.x() + 1e-4 * Eigen::ArrayXd::LinSpaced(block, 0.0, static_cast<double>(block - 1));
  }
  return f;
}

Eigen::ArrayXd element_geometry(const Mesh& mesh, GlobalElementIndex g) {
  const int n = mesh.points_per_axis();
  const Eigen::Index block = block_size(mesh);
  const auto box = mesh.bounds(g);
  Eigen::ArrayXd xyz(3 * block);
  Eigen::Index idx = 0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i, ++idx) {
        const Eigen::Array3d t(i, j, k);
        const Eigen::Array3d p = box.min().array() + (box.max() - box.min()).array() * t / (n - 1);
        xyz[idx] = p.x();
        xyz[block + idx] = p.y();
        xyz[2 * block + idx] = p.z();
      }
    }
  }
  return xyz;
}

std::size_t TransferPlan::total_moves() const {
  return std::accumulate(outbound.begin(), outbound.end(), std::size_t{0},
                         [](std::size_t acc, const auto& list) { return acc + list.size(); });
}

TransferPlan plan_transfers(const ElementProcessorMap& old_map, const ElementProcessorMap& new_map) {
  if (old_map.num_elements() != new_map.num_elements()) throw std::invalid_argument("plan_transfers: nelgt mismatch");
  if (old_map.num_ranks() != new_map.num_ranks()) throw std::invalid_argument("plan_transfers: rank count mismatch");
  TransferPlan plan;
  plan.nelgt = old_map.num_elements();
  plan.outbound.resize(static_cast<std::size_t>(old_map.num_ranks()));
  for (int from = 0; from < old_map.num_ranks(); ++from) {
    for (std::int64_t g = old_map.first(from); g < old_map.end(from); ++g) {
      const int to = new_map.owner(GlobalElementIndex{g});
      if (to != from) plan.outbound[static_cast<std::size_t>(from)].push_back({GlobalElementIndex{g}, to});
    }
  }
  return plan;
}

void execute_migration(RankEnsemble& ensemble, PerRank<RankState>& states, const TransferPlan& plan,
                       const ElementProcessorMap& new_map) {
  const auto np = static_cast<std::size_t>(ensemble.size());
  if (states.size() != np || plan.outbound.size() != np || new_map.num_ranks() != ensemble.size()) {
    throw CollectiveMismatch("execute_migration: states, plan and map must cover every rank");
  }

  PerRank<std::vector<Outbound<std::vector<std::byte>>>> outbound(np);
  ensemble.for_each_rank([&](int k) {
    RankState& s = states[static_cast<std::size_t>(k)];
    for (const ElementMove& move : plan.outbound[static_cast<std::size_t>(k)]) {
      auto node = s.elements.extract(move.element.value);
      if (node.empty()) {
        throw std::logic_error("execute_migration: rank " + std::to_string(k) + " does not hold element " +
                               std::to_string(move.element.value));
      }
      ElementPacket packet;
      packet.element = move.element.value;
      packet.vars = kConservedVars;
      packet.fields = std::move(node.mapped().fields);
      auto& ps = s.particles.particles;
      const auto split = std::stable_partition(ps.begin(), ps.end(),
                                               [&](const Particle& p) { return p.element != move.element; });
      packet.particles.assign(std::make_move_iterator(split), std::make_move_iterator(ps.end()));
      ps.erase(split, ps.end());
      outbound[static_cast<std::size_t>(k)].push_back({move.dest, encode(packet)});
    }
  });

  const auto inbound = ensemble.route(std::move(outbound));

  ensemble.for_each_rank([&](int k) {
    RankState& s = states[static_cast<std::size_t>(k)];
    for (const auto& msg : inbound[static_cast<std::size_t>(k)]) {
      ElementPacket packet = decode(msg.payload);
      ElementData data;
      data.fields = std::move(packet.fields);
      s.elements.emplace(packet.element, std::move(data));
      for (Particle& p : packet.particles) s.particles.particles.push_back(std::move(p));
    }
    s.first = new_map.first(k);
    s.end = new_map.end(k);
    ++s.layout_generation;
    if (static_cast<std::int64_t>(s.elements.size()) != s.num_elements() ||
        (!s.elements.empty() && (s.elements.begin()->first != s.first || s.elements.rbegin()->first != s.end - 1))) {
      throw std::logic_error("execute_migration: rank " + std::to_string(k) + " element set does not match the new map");
    }
  });
}

void reinitialize_static(RankState& state, const Mesh& mesh) {
  for (auto& [g, data] : state.elements) {
    data.geometry = element_geometry(mesh, GlobalElementIndex{g});
    data.static_generation = state.layout_generation;
  }
}

void verify_static(const RankState& state) {
  for (const auto& [g, data] : state.elements) {
    if (data.static_generation != state.layout_generation || data.geometry.size() == 0) {
      throw StaleStaticData("rank " + std::to_string(state.rank) + ": static data of element " + std::to_string(g) +
                            " was not reinitialized after the layout changed");
    }
  }
}

std::int64_t exchange_particles(RankEnsemble& ensemble, PerRank<RankState>& states, const ElementProcessorMap& map) {
  const auto np = static_cast<std::size_t>(ensemble.size());
  if (states.size() != np) throw CollectiveMismatch("exchange_particles: expected one state per rank");

  PerRank<std::vector<Outbound<std::vector<std::byte>>>> outbound(np);
  PerRank<std::int64_t> moved(np, 0);
  ensemble.for_each_rank([&](int k) {
    auto& ps = states[static_cast<std::size_t>(k)].particles.particles;
    const auto split = std::stable_partition(ps.begin(), ps.end(), [&](const Particle& p) { return map.owner(p.element) == k; });
    if (split == ps.end()) return;
    std::vector<ElementPacket> per_dest(np);
    for (auto it = split; it != ps.end(); ++it) per_dest[static_cast<std::size_t>(map.owner(it->element))].particles.push_back(std::move(*it));
    moved[static_cast<std::size_t>(k)] = ps.end() - split;
    ps.erase(split, ps.end());
    for (std::size_t dest = 0; dest < np; ++dest) {
      if (!per_dest[dest].particles.empty()) outbound[static_cast<std::size_t>(k)].push_back({static_cast<int>(dest), encode(per_dest[dest])});
    }
  });

  const auto inbound = ensemble.route(std::move(outbound));
  ensemble.for_each_rank([&](int k) {
    auto& ps = states[static_cast<std::size_t>(k)].particles.particles;
    for (const auto& msg : inbound[static_cast<std::size_t>(k)]) {
      ElementPacket packet = decode(msg.payload);
      for (Particle& p : packet.particles) ps.push_back(std::move(p));
    }
  });
  return std::accumulate(moved.begin(), moved.end(), std::int64_t{0});
}

PerRank<RankState> distribute(const Mesh& mesh, const ParticleSet& particles, const ElementProcessorMap& map) {
  PerRank<RankState> states(static_cast<std::size_t>(map.num_ranks()));
  for (int k = 0; k < map.num_ranks(); ++k) {
    RankState& s = states[static_cast<std::size_t>(k)];
    s.rank = k;
    s.first = map.first(k);
    s.end = map.end(k);
    for (std::int64_t g = s.first; g < s.end; ++g) {
      ElementData data;
      data.fields = initial_fields(mesh, GlobalElementIndex{g});
      s.elements.emplace(g, std::move(data));
    }
    reinitialize_static(s, mesh);
  }
  for (const Particle& p : particles.particles) {
    states[static_cast<std::size_t>(map.owner(p.element))].particles.particles.push_back(p);
  }
  return states;
}

}  // namespace cmtlb
