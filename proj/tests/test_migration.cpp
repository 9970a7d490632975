#include "cmtlb/migration.hpp"
#include "cmtlb/wire.hpp"

#include "support.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>

using namespace cmtlb;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Mesh strip(int n = 3) { return order_elements(build_mesh(Vec3(-2.208, 0, 0), Vec3(6.0, 0.0802, 0.0802), Cell3(12, 1, 1), n)); }

// every field value and payload distinct, so any mix-up shows
PerRank<RankState> scrambled(const Mesh& m, const ElementProcessorMap& map, std::int64_t particles, std::uint64_t seed) {
  auto ps = init_particles(m, m.lower(), m.upper(), particles, seed);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : ps.particles) {
    p.velocity = Vec3(u(gen), u(gen), u(gen));
    for (int a = 0; a < kPayloadSize; ++a) p.payload[a] = u(gen);
  }
  auto states = distribute(m, ps, map);
  for (auto& s : states) {
    for (auto& [g, data] : s.elements) {
      for (Eigen::Index i = 0; i < data.fields.size(); ++i) data.fields[i] = u(gen);
    }
  }
  return states;
}

void migrate(RankEnsemble& ens, PerRank<RankState>& states, const ElementProcessorMap& from, const ElementProcessorMap& to,
             const Mesh& m) {
  execute_migration(ens, states, plan_transfers(from, to), to);
  for (auto& s : states) reinitialize_static(s, m);
}

}  // namespace

TEST_CASE("plan_transfers examples") {
  const auto uniform = ElementProcessorMap::uniform(3, 12);
  const ElementProcessorMap centralized({1, 6, 8}, 12);
  const ElementProcessorMap distributed({1, 5, 8}, 12);

  const auto plan = plan_transfers(uniform, centralized);
  CHECK(plan.total_moves() == 2);
  CHECK(plan.outbound[0].empty());
  CHECK(plan.outbound[1] == std::vector<ElementMove>{{GlobalElementIndex{5}, 0}, {GlobalElementIndex{8}, 2}});
  CHECK(plan.outbound[2].empty());

  CHECK(plan_transfers(uniform, uniform).empty());

  const auto d = plan_transfers(uniform, distributed);
  CHECK(d.total_moves() == 1);
  CHECK(d.outbound[1] == std::vector<ElementMove>{{GlobalElementIndex{8}, 2}});

  CHECK_THROWS(plan_transfers(uniform, ElementProcessorMap::uniform(3, 13)));
}

TEST_CASE("plan_transfers moves exactly the elements whose owner changed") {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_instance(gen);
    std::vector<std::int64_t> first{1};
    for (int k = 1; k < a.cfg.np; ++k) first.push_back(std::uniform_int_distribution<std::int64_t>(1, a.cfg.nelgt + 1)(gen));
    std::sort(first.begin(), first.end());
    const ElementProcessorMap next(first, a.cfg.nelgt);
    const auto plan = plan_transfers(a.current, next);
    std::int64_t changed = 0;
    for (std::int64_t g = 1; g <= a.cfg.nelgt; ++g) changed += a.current.owner(GlobalElementIndex{g}) != next.owner(GlobalElementIndex{g});
    CHECK(static_cast<std::int64_t>(plan.total_moves()) == changed);
    for (int k = 0; k < a.cfg.np; ++k) {
      for (const auto& mv : plan.outbound[static_cast<std::size_t>(k)]) {
        CHECK(a.current.owner(mv.element) == k);
        CHECK(next.owner(mv.element) == mv.dest);
        CHECK(mv.dest != k);
      }
    }
  }
}

TEST_CASE("wire round trip is bit exact") {
  ElementPacket p;
  p.element = 7;
  p.vars = 5;
  p.fields = Eigen::ArrayXd::LinSpaced(5 * 27, -1.0, 1.0);
  p.fields[3] = -0.0;
  p.fields[4] = std::numeric_limits<double>::denorm_min();
  Particle a;
  a.id = (std::int64_t{1} << 40) + 3;
  a.position = Vec3(0.1, 0.2, 0.3);
  a.velocity = Vec3(-1e300, 0.0, 1e-300);
  a.payload << 1, 2, 3, 4, 5;
  a.element = GlobalElementIndex{7};
  p.particles = {a, a};
  p.particles[1].id = 9;

  const auto bytes = encode(p);
  CHECK(bytes[0] == std::byte{kWireFormat});
  CHECK(bytes.size() == 1 + 4 + 28 + 8 * 5 * 27 + 2 * (8 + 8 * 3 + 8 * 3 + 8 * 5 + 8));
  // element id sits little-endian right after the header length
  CHECK(bytes[5] == std::byte{7});
  CHECK(bytes[6] == std::byte{0});

  const auto back = decode(bytes);
  CHECK(back.element == 7);
  CHECK(back.vars == 5);
  REQUIRE(back.fields.size() == p.fields.size());
  for (Eigen::Index i = 0; i < p.fields.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(back.fields[i]) == std::bit_cast<std::uint64_t>(p.fields[i]));
  REQUIRE(back.particles.size() == 2);
  CHECK(back.particles[0].id == a.id);
  CHECK(back.particles[0].position == a.position);
  CHECK(back.particles[0].velocity == a.velocity);
  CHECK(back.particles[0].payload == a.payload);
  CHECK(back.particles[0].element == a.element);
  CHECK(back.particles[1].id == 9);
}

TEST_CASE("wire rejects damaged input") {
  ElementPacket p;
  p.element = 1;
  p.vars = 1;
  p.fields = Eigen::ArrayXd::Ones(4);
  auto bytes = encode(p);
  CHECK_THROWS_AS(decode(std::span<const std::byte>(bytes).first(bytes.size() - 1)), WireError);
  auto extra = bytes;
  extra.push_back(std::byte{0});
  CHECK_THROWS_AS(decode(extra), WireError);
  auto tag = bytes;
  tag[0] = std::byte{2};
  CHECK_THROWS_AS(decode(tag), WireError);
  CHECK_THROWS_AS(decode(std::span<const std::byte>{}), WireError);
}

TEST_CASE("empty plan leaves states unchanged") {
  const Mesh m = strip();
  const auto map = ElementProcessorMap::uniform(3, 12);
  auto states = scrambled(m, map, 60, 3);
  const auto before = oracle::snapshot(states);
  RankEnsemble ens(3, ExecMode::sequential);
  execute_migration(ens, states, plan_transfers(map, map), map);
  CHECK(oracle::snapshot(states) == before);
}

TEST_CASE("moved element arrives bitwise equal") {
  const Mesh m = strip();
  const auto uniform = ElementProcessorMap::uniform(3, 12);
  auto states = scrambled(m, uniform, 60, 4);
  const Eigen::ArrayXd block = states[1].elements.at(8).fields;
  std::size_t carried = 0;
  for (const auto& p : states[1].particles.particles) carried += p.element.value == 8;
  RankEnsemble ens(3, ExecMode::sequential);
  const ElementProcessorMap next({1, 5, 8}, 12);
  migrate(ens, states, uniform, next, m);
  REQUIRE(states[2].elements.count(8) == 1);
  CHECK(states[1].elements.count(8) == 0);
  const auto& arrived = states[2].elements.at(8).fields;
  CHECK(std::memcmp(arrived.data(), block.data(), sizeof(double) * static_cast<std::size_t>(block.size())) == 0);
  std::size_t now = 0;
  for (const auto& p : states[2].particles.particles) now += p.element.value == 8;
  CHECK(now == carried);
}

TEST_CASE("worked-example migration conserves the global state") {
  const Mesh m = strip();
  const auto uniform = ElementProcessorMap::uniform(3, 12);
  auto states = scrambled(m, uniform, 120, 5);
  const auto before = oracle::snapshot(states);
  RankEnsemble ens(3, ExecMode::threaded);
  const ElementProcessorMap next({1, 6, 8}, 12);
  migrate(ens, states, uniform, next, m);
  CHECK(oracle::snapshot(states) == before);
  CHECK_FALSE(oracle::state_violation(states, next).has_value());
}

TEST_CASE("random migrations conserve the global state") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int nx = std::uniform_int_distribution<int>(1, 8)(gen);
    const Mesh m = order_elements(build_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), Cell3(nx, 2, 2), 2));
    const int np = std::uniform_int_distribution<int>(1, 6)(gen);
    auto random_map = [&] {
      std::vector<std::int64_t> first{1};
      for (int k = 1; k < np; ++k) first.push_back(std::uniform_int_distribution<std::int64_t>(1, m.num_elements() + 1)(gen));
      std::sort(first.begin(), first.end());
      return ElementProcessorMap(first, m.num_elements());
    };
    const auto from = random_map();
    const auto to = random_map();
    auto states = scrambled(m, from, std::uniform_int_distribution<std::int64_t>(0, 200)(gen), gen());
    const auto before = oracle::snapshot(states);
    RankEnsemble ens(np, trial % 2 ? ExecMode::threaded : ExecMode::sequential);
    migrate(ens, states, from, to, m);
    CHECK(oracle::snapshot(states) == before);
    CHECK_FALSE(oracle::state_violation(states, to).has_value());
  }
}

TEST_CASE("static data must be reinitialized after migration") {
  const Mesh m = strip();
  const auto uniform = ElementProcessorMap::uniform(3, 12);
  auto states = scrambled(m, uniform, 30, 6);
  for (const auto& s : states) CHECK_NOTHROW(verify_static(s));
  RankEnsemble ens(3, ExecMode::sequential);
  const ElementProcessorMap next({1, 6, 8}, 12);
  execute_migration(ens, states, plan_transfers(uniform, next), next);
  CHECK_THROWS_AS(verify_static(states[0]), StaleStaticData);
  reinitialize_static(states[0], m);
  CHECK_NOTHROW(verify_static(states[0]));
  CHECK_THROWS_AS(verify_static(states[2]), StaleStaticData);
}

TEST_CASE("reinitialize_static is idempotent and rank independent") {
  const Mesh m = strip(4);
  const auto uniform = ElementProcessorMap::uniform(3, 12);
  auto states = scrambled(m, uniform, 30, 8);
  const auto fresh = distribute(m, ParticleSet{}, uniform);
  RankEnsemble ens(3, ExecMode::sequential);
  const ElementProcessorMap next({1, 6, 8}, 12);
  migrate(ens, states, uniform, next, m);
  const Eigen::ArrayXd once = states[0].elements.at(5).geometry;
  reinitialize_static(states[0], m);
  CHECK((states[0].elements.at(5).geometry == once).all());
  // element 5 moved from rank 1 to rank 0; compare with rank 1's untouched copy
  CHECK((once == fresh[1].elements.at(5).geometry).all());
  CHECK(once.size() == 3 * 64);
}

TEST_CASE("exchange_particles ships strays to their owners") {
  const Mesh m = strip();
  const auto map = ElementProcessorMap::uniform(3, 12);
  auto ps = init_particles(m, Vec3(-1.0, -kInf, -kInf), Vec3(-0.5, kInf, kInf), 50, 2);
  auto states = distribute(m, ps, map);
  REQUIRE(states[0].particles.size() == 50);
  RankEnsemble ens(3, ExecMode::sequential);
  for (auto& p : states[0].particles.particles) {
    p.position.x() = 5.9;
    p.element = locate_element(m, p.position);
  }
  CHECK(exchange_particles(ens, states, map) == 50);
  CHECK(states[0].particles.empty());
  CHECK(states[2].particles.size() == 50);
  CHECK(exchange_particles(ens, states, map) == 0);
}
