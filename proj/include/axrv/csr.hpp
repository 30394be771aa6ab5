#pragma once

#include <cstdint>

namespace axrv {

// Custom configuration CSRs, one per execution unit.
inline constexpr uint32_t kAluCsr = 0x800;
inline constexpr uint32_t kMulCsr = 0x801;
inline constexpr uint32_t kDivCsr = 0x802;

// Read-only performance counters.
inline constexpr uint32_t kCycleCsr = 0xC00;
inline constexpr uint32_t kInstretCsr = 0xC02;

/// Decoded view of one approximation-control CSR.
///
/// Bit layout (all three unit CSRs share it):
///   [0]      approx_enable
///   [2:1]    circuit_select   (registry slot, 0 = accurate)
///   [7:3]    custom1          (reserved for user circuits, inert here)
///   [11:8]   custom2          (reserved for user circuits, inert here)
///   [15:12]  truncation       (result low bits forced to zero)
///   [31:16]  error_field      (circuit-defined error configuration)
struct ApproxConfig {
  bool approx_enable = false;
  uint8_t circuit_select = 0;
  uint8_t custom1 = 0;
  uint8_t custom2 = 0;
  uint8_t truncation = 0;
  uint16_t error_field = 0;

  static constexpr ApproxConfig decode(uint32_t raw) {
    ApproxConfig c;
    c.approx_enable = (raw & 1u) != 0;
    c.circuit_select = static_cast<uint8_t>((raw >> 1) & 0x3u);
    c.custom1 = static_cast<uint8_t>((raw >> 3) & 0x1Fu);
    c.custom2 = static_cast<uint8_t>((raw >> 8) & 0xFu);
    c.truncation = static_cast<uint8_t>((raw >> 12) & 0xFu);
    c.error_field = static_cast<uint16_t>(raw >> 16);
    return c;
  }

  constexpr uint32_t encode() const {
    return (approx_enable ? 1u : 0u) | (uint32_t(circuit_select & 0x3u) << 1) |
           (uint32_t(custom1 & 0x1Fu) << 3) | (uint32_t(custom2 & 0xFu) << 8) |
           (uint32_t(truncation & 0xFu) << 12) | (uint32_t(error_field) << 16);
  }

  constexpr bool operator==(const ApproxConfig&) const = default;
};

}  // namespace axrv
