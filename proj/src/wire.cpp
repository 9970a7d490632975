#include "cmtlb/wire.hpp"

#include <bit>
#include <string>

namespace cmtlb {

namespace {

constexpr std::uint32_t kHeaderBytes = 8 + 4 + 4 + 4 + 8;

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

  void u8(std::uint8_t v) { out_.push_back(static_cast<std::byte>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

  std::vector<std::byte> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out_.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xffU));
  }

  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  double f64() { return std::bit_cast<double>(get(8)); }

  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::uint64_t get(int bytes) {
    if (remaining() < static_cast<std::size_t>(bytes)) throw WireError("wire: truncated packet");
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(b)]) << (8 * b);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }

  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> encode(const ElementPacket& packet) {
  const auto vars = static_cast<std::uint32_t>(packet.vars);
  if (vars == 0 ? packet.fields.size() != 0 : packet.fields.size() % vars != 0) {
    throw WireError("wire: field data is not a whole number of blocks");
  }
  const auto block = vars == 0 ? 0U : static_cast<std::uint32_t>(packet.fields.size() / vars);
  const std::size_t particle_bytes = 8 * (1 + 3 + 3 + kPayloadSize + 1);
  Writer w(1 + 4 + kHeaderBytes + 8 * static_cast<std::size_t>(packet.fields.size()) +
           particle_bytes * packet.particles.size());

  w.u8(kWireFormat);
  w.u32(kHeaderBytes);
  w.i64(packet.element);
  w.u32(vars);
  w.u32(block);
  w.u32(kPayloadSize);
  w.u64(packet.particles.size());
  for (Eigen::Index i = 0; i < packet.fields.size(); ++i) w.f64(packet.fields[i]);
  for (const Particle& p : packet.particles) {
    w.i64(p.id);
    for (int a = 0; a < 3; ++a) w.f64(p.position[a]);
    for (int a = 0; a < 3; ++a) w.f64(p.velocity[a]);
    for (int q = 0; q < kPayloadSize; ++q) w.f64(p.payload[q]);
    w.i64(p.element.value);
  }
  return w.take();
}

ElementPacket decode(std::span<const std::byte> bytes) {
  Reader r(bytes);
  const std::uint8_t tag = r.u8();
  if (tag != kWireFormat) throw WireError("wire: unknown format tag " + std::to_string(tag));
  if (r.u32() != kHeaderBytes) throw WireError("wire: unexpected header length");

  ElementPacket packet;
  packet.element = r.i64();
  const std::uint32_t vars = r.u32();
  const std::uint32_t block = r.u32();
  const std::uint32_t payload = r.u32();
  const std::uint64_t count = r.u64();
  if (payload != kPayloadSize) throw WireError("wire: particle payload length " + std::to_string(payload) + " unsupported");

  const std::uint64_t values = static_cast<std::uint64_t>(vars) * block;
  const std::uint64_t particle_bytes = 8 * (1 + 3 + 3 + payload + 1);
  if (r.remaining() != 8 * values + particle_bytes * count) throw WireError("wire: body length does not match header");

  packet.vars = static_cast<int>(vars);
  packet.fields.resize(static_cast<Eigen::Index>(values));
  for (Eigen::Index i = 0; i < packet.fields.size(); ++i) packet.fields[i] = r.f64();
  packet.particles.resize(count);
  for (Particle& p : packet.particles) {
    p.id = r.i64();
    for (int a = 0; a < 3; ++a) p.position[a] = r.f64();
    for (int a = 0; a < 3; ++a) p.velocity[a] = r.f64();
    for (int q = 0; q < kPayloadSize; ++q) p.payload[q] = r.f64();
    p.element = GlobalElementIndex{r.i64()};
  }
  return packet;
}

}  // namespace cmtlb
