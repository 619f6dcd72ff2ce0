/// @file cube.hpp
/// @brief Multi-channel cubic training sample.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "h2kit/error.hpp"

namespace h2kit {

enum class SplitTag : std::uint32_t { train = 0, val = 1 };

/// Channel order is fixed: inputs c_tilde, phi_tilde, delta ratio, then the
/// target omega_bar. Each channel is edge^3 values, x-fastest.
enum Channel : std::size_t { kChanC = 0, kChanPhi = 1, kChanDelta = 2, kChanOmega = 3 };
inline constexpr std::size_t kCubeChannels = 4;

struct CubeMeta {
  float phi_g = 0.0f;
  float sigma = 0.0f;
  float dsf = 0.0f;
  float delta_ratio = 0.0f;
  /// Source snapshot id, see encode_source_id.
  std::uint32_t case_id = 0;
  SplitTag split = SplitTag::train;
  friend bool operator==(const CubeMeta&, const CubeMeta&) = default;
};

struct CubeSample {
  std::size_t edge = 0;
  CubeMeta meta;
  std::array<std::vector<float>, kCubeChannels> channels;

  std::size_t voxels() const { return edge * edge * edge; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + edge * (j + edge * k);
  }

  void check_shape() const {
    for (const auto& ch : channels)
      if (ch.size() != voxels()) throw ShapeError("CubeSample: channel size differs from edge^3");
  }

  friend bool operator==(const CubeSample&, const CubeSample&) = default;
};

/// Source ids pack the case ordinal and the snapshot time index so a cube
/// file alone identifies which snapshot every cube came from.
inline constexpr std::uint32_t kTimeIndexRadix = 1000;

inline std::uint32_t encode_source_id(std::uint32_t case_ordinal, std::int32_t time_index) {
  if (time_index < 0 || static_cast<std::uint32_t>(time_index) >= kTimeIndexRadix)
    throw DomainError("source id: time index must lie in [0, 1000)");
  return case_ordinal * kTimeIndexRadix + static_cast<std::uint32_t>(time_index);
}
inline std::uint32_t source_case_ordinal(std::uint32_t id) { return id / kTimeIndexRadix; }
inline std::int32_t source_time_index(std::uint32_t id) {
  return static_cast<std::int32_t>(id % kTimeIndexRadix);
}

} // namespace h2kit
