#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "axrv/circuits.hpp"
#include "axrv/csr.hpp"

namespace axrv {

struct SampleMode {
  enum class Kind { Exhaustive, Random };
  Kind kind = Kind::Exhaustive;
  uint64_t samples = 0;
  uint64_t seed = 1;

  static SampleMode exhaustive() { return {}; }
  static SampleMode random(uint64_t n, uint64_t seed) {
    return {Kind::Random, n, seed};
  }
};

struct CircuitConfigId {
  UnitKind unit = UnitKind::Multiplier;
  unsigned slot = 0;
  uint16_t error_field = 0;
  uint8_t truncation = 0;
};

struct ErrorReport {
  double er = 0;
  double mred = 0;
  double nmed = 0;
  CircuitConfigId config{};
  SampleMode mode{};
  uint64_t pairs = 0;
  uint64_t mismatches = 0;
  double mean_ed = 0;
};

/// The thermometer encodings of the demo multiplier, level 0 (deepest
/// approximation) through level 6.
inline constexpr std::array<uint16_t, 7> kMulLevelEncodings{
    0x00, 0x40, 0x60, 0x70, 0x78, 0x7C, 0x7E};

/// Measure ER / MRED / NMED of the selected circuit over the unsigned
/// `width`-bit operand space, against native host arithmetic as the exact
/// oracle. Operations evaluated: add for adders, widening unsigned multiply
/// for multipliers, unsigned quotient for dividers. Exhaustive mode walks all
/// 2^(2*width) pairs and requires width <= 16; random mode draws `samples`
/// seeded pairs. Pairs whose exact result is zero contribute relative error 0
/// when the circuit also returns zero and 1 otherwise.
ErrorReport evaluate_metrics(const CircuitRegistry& reg, CircuitConfigId cfg,
                             unsigned width, SampleMode mode);

/// One ErrorReport per raw error-field encoding, in list order.
std::vector<ErrorReport> sweep_levels(const CircuitRegistry& reg, UnitKind unit,
                                      unsigned slot,
                                      const std::vector<uint16_t>& raw_levels,
                                      unsigned width, SampleMode mode);

}  // namespace axrv
