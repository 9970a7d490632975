#pragma once

#include "cmtlb/particles.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmtlb {

// Payload layout, all little-endian:
//   u8  format tag (kWireFormat)
//   u32 header bytes that follow (28)
//   i64 element id (0 for a particle-only packet)
//   u32 conserved variable count, u32 block length, u32 particle payload length
//   u64 particle count
//   f64[vars * block]                          dynamic field data
//   per particle: i64 id, f64[3] position, f64[3] velocity, f64[payload], i64 element
inline constexpr std::uint8_t kWireFormat = 1;

struct ElementPacket {
  std::int64_t element = 0;
  int vars = 0;
  Eigen::ArrayXd fields;
  std::vector<Particle> particles;
};

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::byte> encode(const ElementPacket& packet);
ElementPacket decode(std::span<const std::byte> bytes);

}  // namespace cmtlb
