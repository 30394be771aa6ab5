#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "axrv/csr.hpp"
#include "axrv/error.hpp"

namespace axrv {

enum class UnitKind { Adder, Multiplier, Divider };

const char* unit_name(UnitKind unit);

/// Operand signedness for the widening 32x32 multiply.
enum class MulMode { UnsignedUnsigned, SignedSigned, SignedUnsigned };

struct DivResult {
  uint32_t quotient = 0;
  uint32_t remainder = 0;
  constexpr bool operator==(const DivResult&) const = default;
};

// ---------------------------------------------------------------------------
// Demo circuit error-field views.
// ---------------------------------------------------------------------------

/// Lower-part-OR carry-select adder control. The low eight bits of the CSR
/// error field form a per-block mask over the eight 4-bit blocks of a 32-bit
/// add; a cleared bit marks the block approximate. Only the low
/// `approximable_blocks` mask bits are significant, the rest are ignored.
struct AdderErrorMask {
  uint8_t mask = 0x0F;
  unsigned approximable_blocks = 4;

  static constexpr unsigned kBlocks = 8;

  constexpr bool block_approx(unsigned block) const {
    return block < approximable_blocks && ((mask >> block) & 1u) == 0;
  }
  /// Count of blocks actually running approximate.
  constexpr unsigned level() const {
    unsigned n = 0;
    for (unsigned b = 0; b < kBlocks; ++b) n += block_approx(b) ? 1u : 0u;
    return n;
  }
};

/// Thermometer-coded error level of the demo multiplier. Bits [6:1] of the
/// low error-field byte each add one level; level L means the low 8-L
/// partial-product columns of every 8x8 tile are OR-folded without carries.
struct MulErrorLevel {
  uint8_t raw = 0;

  constexpr unsigned level() const {
    return static_cast<unsigned>(std::popcount(uint8_t((raw >> 1) & 0x3Fu)));
  }
  static constexpr uint8_t encode(unsigned level) {
    return level == 0 ? 0u : uint8_t((0x7Eu << (6 - level)) & 0x7Eu);
  }
};

/// Iteration-skipping control of the demo divider. The low error-field byte
/// is the number of low quotient bits skipped, clamped to 24.
struct DivErrorLevel {
  uint8_t raw = 0;

  static constexpr unsigned kMaxSkip = 24;
  constexpr unsigned skipped_bits() const {
    return raw > kMaxSkip ? kMaxSkip : raw;
  }
};

// ---------------------------------------------------------------------------
// Demo circuit primitives (bit-level behavioural models).
// ---------------------------------------------------------------------------

/// 32-bit carry-select adder built from eight 4-bit blocks. Approximate
/// blocks compute the bitwise OR of their operand nibbles, consume no carry
/// and emit the AND of the operand MSBs as carry out. Subtraction feeds
/// a + ~b + 1 into the same block structure; the +1 carry-in is lost when
/// block 0 is approximate.
uint32_t approx_add32(uint32_t a, uint32_t b, bool subtract, AdderErrorMask mask);

/// 8x8 unsigned multiply with OR-folded low partial-product columns.
uint16_t approx_mul8(uint8_t a, uint8_t b, MulErrorLevel level);

/// Widening 32x32 multiply recomposed from 8x8 tiles through exact shift-add.
/// Every tile uses the same error level; signs are stripped before the
/// magnitude multiply and reapplied to the 64-bit product.
uint64_t mul32(uint32_t a, uint32_t b, MulMode mode, MulErrorLevel level);

/// Same recomposition over an arbitrary unsigned 8x8 primitive. mul32 with a
/// level-0 primitive must match the native widening product.
uint64_t mul32_compose(uint32_t a, uint32_t b, MulMode mode,
                       const std::function<uint16_t(uint8_t, uint8_t)>& mul8);

/// Non-restoring 32-bit divider with skipped low iterations. Skipped quotient
/// bits read as ones; the remainder is the final partial remainder. Signed
/// division rounds toward zero and gives the remainder the dividend's sign.
/// Divide-by-zero and signed overflow return the ISA-defined results at every
/// error level.
DivResult nonrestoring_div(uint32_t dividend, uint32_t divisor, bool is_signed,
                           DivErrorLevel level);

/// Force the low `bits` result bits to zero (bits is the CSR truncation
/// field, 0..15).
constexpr uint32_t apply_truncation(uint32_t v, unsigned bits) {
  return bits == 0 ? v : v & ~((uint32_t(1) << bits) - 1);
}
constexpr uint64_t apply_truncation64(uint64_t v, unsigned bits) {
  return bits == 0 ? v : v & ~((uint64_t(1) << bits) - 1);
}

// ---------------------------------------------------------------------------
// Circuit registry.
// ---------------------------------------------------------------------------

/// One pluggable execution circuit. A model fills in the operation matching
/// its unit and leaves the others empty. Handlers receive the raw 16-bit
/// error field and the truncation field; the built-in models apply truncation
/// themselves so the dispatcher's pass is idempotent.
struct CircuitModel {
  using AddFn = std::function<uint32_t(uint32_t, uint32_t, bool, uint16_t, uint8_t)>;
  using MulFn = std::function<uint64_t(uint32_t, uint32_t, MulMode, uint16_t, uint8_t)>;
  using DivFn = std::function<DivResult(uint32_t, uint32_t, bool, uint16_t, uint8_t)>;

  std::string name;
  AddFn add;
  MulFn mul;
  DivFn div;
  /// Extra pipeline occupancy in cycles for one operation (>= 1).
  std::function<unsigned(uint16_t)> latency = [](uint16_t) { return 1u; };
  /// Scalar error level for traces and energy lookup.
  std::function<unsigned(uint16_t)> effective_level = [](uint16_t) { return 0u; };
};

CircuitModel accurate_adder();
CircuitModel accurate_multiplier();
CircuitModel accurate_divider();
CircuitModel demo_adder(unsigned approximable_blocks = 4);
CircuitModel demo_multiplier();
CircuitModel demo_divider();

/// Four circuit slots per execution unit, selected at runtime by the
/// circuit_select CSR field. Slot 0 holds the accurate model.
class CircuitRegistry {
 public:
  static constexpr unsigned kSlots = 4;

  /// Slot 0 accurate and slot 1 demo approximate for every unit.
  static CircuitRegistry with_defaults();

  /// Slot 0 accurate only.
  static CircuitRegistry accurate_only();

  void register_circuit(UnitKind unit, unsigned slot, CircuitModel model,
                        bool replace = false);
  bool occupied(UnitKind unit, unsigned slot) const;
  /// Throws ConfigError for a slot out of range or never populated.
  const CircuitModel& at(UnitKind unit, unsigned slot) const;

 private:
  std::array<std::array<std::optional<CircuitModel>, kSlots>, 3> slots_;
};

// ---------------------------------------------------------------------------
// Dispatch: CSR value -> selected circuit -> truncated result.
// ---------------------------------------------------------------------------

struct UnitOutcome32 {
  uint32_t value = 0;
  unsigned slot = 0;
  unsigned level = 0;
  unsigned latency = 1;
};

struct UnitOutcome64 {
  uint64_t value = 0;
  unsigned slot = 0;
  unsigned level = 0;
  unsigned latency = 1;
};

struct DivOutcome {
  uint32_t quotient = 0;
  uint32_t remainder = 0;
  unsigned slot = 0;
  unsigned level = 0;
  unsigned latency = 1;
};

/// With approx_enable clear the accurate slot runs and truncation is not
/// applied. Selecting an empty slot throws ConfigError ("unpopulated circuit
/// slot ..."); the machine converts that into a SimFault at the faulting pc.
UnitOutcome32 dispatch_add(const CircuitRegistry& reg, ApproxConfig cfg,
                           uint32_t a, uint32_t b, bool subtract);
UnitOutcome64 dispatch_mul(const CircuitRegistry& reg, ApproxConfig cfg,
                           uint32_t a, uint32_t b, MulMode mode);
DivOutcome dispatch_div(const CircuitRegistry& reg, ApproxConfig cfg,
                        uint32_t dividend, uint32_t divisor, bool is_signed);

}  // namespace axrv
