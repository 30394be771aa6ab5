#include "axrv/circuits.hpp"

#include <utility>

namespace axrv {

const char* unit_name(UnitKind unit) {
  switch (unit) {
    case UnitKind::Adder: return "adder";
    case UnitKind::Multiplier: return "multiplier";
    case UnitKind::Divider: return "divider";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Primitives.
// ---------------------------------------------------------------------------

uint32_t approx_add32(uint32_t a, uint32_t b, bool subtract, AdderErrorMask mask) {
  uint32_t bb = subtract ? ~b : b;
  uint32_t carry = subtract ? 1u : 0u;
  uint32_t out = 0;
  for (unsigned blk = 0; blk < AdderErrorMask::kBlocks; ++blk) {
    uint32_t an = (a >> (blk * 4)) & 0xFu;
    uint32_t bn = (bb >> (blk * 4)) & 0xFu;
    if (mask.block_approx(blk)) {
      out |= (an | bn) << (blk * 4);
      carry = (an >> 3) & (bn >> 3);  // speculative carry from block MSBs
    } else {
      uint32_t s = an + bn + carry;
      out |= (s & 0xFu) << (blk * 4);
      carry = s >> 4;
    }
  }
  return out;
}

uint16_t approx_mul8(uint8_t a, uint8_t b, MulErrorLevel level) {
  if (a == 0 || b == 0) return 0;  // empty partial-product matrix
  unsigned first_exact_col = 8u - level.level();
  uint32_t exact = uint32_t(a) * uint32_t(b);
  uint32_t removed = 0;
  uint32_t folded = 0;
  for (unsigned c = 0; c < first_exact_col; ++c) {
    unsigned colsum = 0;
    for (unsigned i = 0; i <= c; ++i) {
      colsum += ((a >> i) & 1u) & ((b >> (c - i)) & 1u);
    }
    removed += colsum << c;
    folded |= (colsum != 0 ? 1u : 0u) << c;
  }
  return uint16_t(exact - removed + folded);
}

uint64_t mul32_compose(uint32_t a, uint32_t b, MulMode mode,
                       const std::function<uint16_t(uint8_t, uint8_t)>& mul8) {
  bool a_neg = false;
  bool b_neg = false;
  if (mode == MulMode::SignedSigned) {
    a_neg = int32_t(a) < 0;
    b_neg = int32_t(b) < 0;
  } else if (mode == MulMode::SignedUnsigned) {
    a_neg = int32_t(a) < 0;
  }
  uint32_t ua = a_neg ? 0u - a : a;
  uint32_t ub = b_neg ? 0u - b : b;

  auto mul16 = [&](uint32_t x, uint32_t y) -> uint32_t {
    uint32_t ll = mul8(uint8_t(x), uint8_t(y));
    uint32_t lh = mul8(uint8_t(x), uint8_t(y >> 8));
    uint32_t hl = mul8(uint8_t(x >> 8), uint8_t(y));
    uint32_t hh = mul8(uint8_t(x >> 8), uint8_t(y >> 8));
    return ll + ((lh + hl) << 8) + (hh << 16);
  };

  uint64_t ll = mul16(ua & 0xFFFFu, ub & 0xFFFFu);
  uint64_t lh = mul16(ua & 0xFFFFu, ub >> 16);
  uint64_t hl = mul16(ua >> 16, ub & 0xFFFFu);
  uint64_t hh = mul16(ua >> 16, ub >> 16);
  uint64_t mag = ll + ((lh + hl) << 16) + (hh << 32);
  return (a_neg != b_neg) ? 0u - mag : mag;
}

uint64_t mul32(uint32_t a, uint32_t b, MulMode mode, MulErrorLevel level) {
  return mul32_compose(a, b, mode, [level](uint8_t x, uint8_t y) {
    return approx_mul8(x, y, level);
  });
}

namespace {

uint64_t native_mul(uint32_t a, uint32_t b, MulMode mode) {
  switch (mode) {
    case MulMode::UnsignedUnsigned:
      return uint64_t(a) * uint64_t(b);
    case MulMode::SignedSigned:
      return uint64_t(int64_t(int32_t(a)) * int64_t(int32_t(b)));
    case MulMode::SignedUnsigned:
      return uint64_t(int64_t(int32_t(a)) * int64_t(b));
  }
  return 0;
}

DivResult native_div(uint32_t dividend, uint32_t divisor, bool is_signed) {
  if (divisor == 0) return {0xFFFFFFFFu, dividend};
  if (is_signed) {
    if (dividend == 0x80000000u && divisor == 0xFFFFFFFFu)
      return {0x80000000u, 0};
    int32_t q = int32_t(dividend) / int32_t(divisor);
    int32_t r = int32_t(dividend) % int32_t(divisor);
    return {uint32_t(q), uint32_t(r)};
  }
  return {dividend / divisor, dividend % divisor};
}

}  // namespace

DivResult nonrestoring_div(uint32_t dividend, uint32_t divisor, bool is_signed,
                           DivErrorLevel level) {
  if (divisor == 0) return {0xFFFFFFFFu, dividend};
  if (is_signed && dividend == 0x80000000u && divisor == 0xFFFFFFFFu)
    return {0x80000000u, 0};

  bool d_neg = is_signed && int32_t(dividend) < 0;
  bool v_neg = is_signed && int32_t(divisor) < 0;
  uint32_t ud = d_neg ? 0u - dividend : dividend;
  uint32_t uv = v_neg ? 0u - divisor : divisor;

  unsigned skip = level.skipped_bits();
  int64_t rem = 0;
  uint32_t q = 0;
  for (int i = 31; i >= int(skip); --i) {
    rem = (rem << 1) | ((ud >> i) & 1u);
    if (rem >= 0) rem -= uv; else rem += uv;
    if (rem >= 0) q |= 1u << i;
  }
  if (rem < 0) rem += uv;  // restore once at the end
  if (skip > 0) q |= (uint32_t(1) << skip) - 1;

  uint32_t ur = uint32_t(rem);
  uint32_t quotient = (d_neg != v_neg) ? 0u - q : q;
  uint32_t remainder = d_neg ? 0u - ur : ur;
  return {quotient, remainder};
}

// ---------------------------------------------------------------------------
// Built-in circuit models.
// ---------------------------------------------------------------------------

CircuitModel accurate_adder() {
  CircuitModel m;
  m.name = "accurate-adder";
  m.add = [](uint32_t a, uint32_t b, bool sub, uint16_t, uint8_t tr) {
    return apply_truncation(sub ? a - b : a + b, tr);
  };
  return m;
}

CircuitModel accurate_multiplier() {
  CircuitModel m;
  m.name = "accurate-multiplier";
  m.mul = [](uint32_t a, uint32_t b, MulMode mode, uint16_t, uint8_t tr) {
    return apply_truncation64(native_mul(a, b, mode), tr);
  };
  m.latency = [](uint16_t) { return 4u; };
  return m;
}

CircuitModel accurate_divider() {
  CircuitModel m;
  m.name = "accurate-divider";
  m.div = [](uint32_t a, uint32_t b, bool is_signed, uint16_t, uint8_t tr) {
    DivResult r = native_div(a, b, is_signed);
    r.quotient = apply_truncation(r.quotient, tr);
    return r;
  };
  m.latency = [](uint16_t) { return 18u; };
  return m;
}

CircuitModel demo_adder(unsigned approximable_blocks) {
  CircuitModel m;
  m.name = "loa-csa-adder";
  m.add = [approximable_blocks](uint32_t a, uint32_t b, bool sub, uint16_t err,
                                uint8_t tr) {
    AdderErrorMask mask{uint8_t(err), approximable_blocks};
    return apply_truncation(approx_add32(a, b, sub, mask), tr);
  };
  m.effective_level = [approximable_blocks](uint16_t err) {
    return AdderErrorMask{uint8_t(err), approximable_blocks}.level();
  };
  return m;
}

CircuitModel demo_multiplier() {
  CircuitModel m;
  m.name = "or-column-multiplier";
  m.mul = [](uint32_t a, uint32_t b, MulMode mode, uint16_t err, uint8_t tr) {
    return apply_truncation64(mul32(a, b, mode, MulErrorLevel{uint8_t(err)}), tr);
  };
  m.latency = [](uint16_t) { return 4u; };
  m.effective_level = [](uint16_t err) {
    return MulErrorLevel{uint8_t(err)}.level();
  };
  return m;
}

CircuitModel demo_divider() {
  CircuitModel m;
  m.name = "skip-nonrestoring-divider";
  m.div = [](uint32_t a, uint32_t b, bool is_signed, uint16_t err, uint8_t tr) {
    DivResult r = nonrestoring_div(a, b, is_signed, DivErrorLevel{uint8_t(err)});
    r.quotient = apply_truncation(r.quotient, tr);
    return r;
  };
  m.latency = [](uint16_t err) {
    unsigned skip = DivErrorLevel{uint8_t(err)}.skipped_bits();
    return 2u + (32u - skip + 1u) / 2u;
  };
  m.effective_level = [](uint16_t err) {
    return DivErrorLevel{uint8_t(err)}.skipped_bits();
  };
  return m;
}

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

CircuitRegistry CircuitRegistry::with_defaults() {
  CircuitRegistry reg;
  reg.register_circuit(UnitKind::Adder, 0, accurate_adder());
  reg.register_circuit(UnitKind::Multiplier, 0, accurate_multiplier());
  reg.register_circuit(UnitKind::Divider, 0, accurate_divider());
  reg.register_circuit(UnitKind::Adder, 1, demo_adder());
  reg.register_circuit(UnitKind::Multiplier, 1, demo_multiplier());
  reg.register_circuit(UnitKind::Divider, 1, demo_divider());
  return reg;
}

CircuitRegistry CircuitRegistry::accurate_only() {
  CircuitRegistry reg;
  reg.register_circuit(UnitKind::Adder, 0, accurate_adder());
  reg.register_circuit(UnitKind::Multiplier, 0, accurate_multiplier());
  reg.register_circuit(UnitKind::Divider, 0, accurate_divider());
  return reg;
}

void CircuitRegistry::register_circuit(UnitKind unit, unsigned slot,
                                       CircuitModel model, bool replace) {
  if (slot >= kSlots)
    throw ConfigError("circuit slot out of range: " + std::to_string(slot));
  auto& entry = slots_[size_t(unit)][slot];
  if (entry.has_value() && !replace)
    throw ConfigError(std::string("circuit slot already occupied: ") +
                      unit_name(unit) + " slot " + std::to_string(slot));
  entry = std::move(model);
}

bool CircuitRegistry::occupied(UnitKind unit, unsigned slot) const {
  return slot < kSlots && slots_[size_t(unit)][slot].has_value();
}

const CircuitModel& CircuitRegistry::at(UnitKind unit, unsigned slot) const {
  if (slot >= kSlots)
    throw ConfigError("circuit slot out of range: " + std::to_string(slot));
  const auto& entry = slots_[size_t(unit)][slot];
  if (!entry.has_value())
    throw ConfigError(std::string("unpopulated circuit slot: ") +
                      unit_name(unit) + " slot " + std::to_string(slot));
  return *entry;
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

namespace {

struct Selection {
  unsigned slot;
  uint16_t error;
  uint8_t trunc;
};

Selection select(ApproxConfig cfg) {
  if (!cfg.approx_enable) return {0, 0, 0};
  return {cfg.circuit_select, cfg.error_field, cfg.truncation};
}

}  // namespace

UnitOutcome32 dispatch_add(const CircuitRegistry& reg, ApproxConfig cfg,
                           uint32_t a, uint32_t b, bool subtract) {
  Selection s = select(cfg);
  const CircuitModel& m = reg.at(UnitKind::Adder, s.slot);
  if (!m.add)
    throw ConfigError("circuit '" + m.name + "' has no add operation");
  uint32_t v = apply_truncation(m.add(a, b, subtract, s.error, s.trunc), s.trunc);
  return {v, s.slot, m.effective_level(s.error), m.latency(s.error)};
}

UnitOutcome64 dispatch_mul(const CircuitRegistry& reg, ApproxConfig cfg,
                           uint32_t a, uint32_t b, MulMode mode) {
  Selection s = select(cfg);
  const CircuitModel& m = reg.at(UnitKind::Multiplier, s.slot);
  if (!m.mul)
    throw ConfigError("circuit '" + m.name + "' has no mul operation");
  uint64_t v = apply_truncation64(m.mul(a, b, mode, s.error, s.trunc), s.trunc);
  return {v, s.slot, m.effective_level(s.error), m.latency(s.error)};
}

DivOutcome dispatch_div(const CircuitRegistry& reg, ApproxConfig cfg,
                        uint32_t dividend, uint32_t divisor, bool is_signed) {
  Selection s = select(cfg);
  const CircuitModel& m = reg.at(UnitKind::Divider, s.slot);
  if (!m.div)
    throw ConfigError("circuit '" + m.name + "' has no div operation");
  DivResult r = m.div(dividend, divisor, is_signed, s.error, s.trunc);
  r.quotient = apply_truncation(r.quotient, s.trunc);
  return {r.quotient, r.remainder, s.slot, m.effective_level(s.error),
          m.latency(s.error)};
}

}  // namespace axrv
