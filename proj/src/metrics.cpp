#include "axrv/metrics.hpp"

#include <random>

namespace axrv {

namespace {

struct Accum {
  uint64_t pairs = 0;
  uint64_t mismatches = 0;
  unsigned __int128 ed_sum = 0;
  long double red_sum = 0;
};

void accumulate(Accum& acc, uint64_t exact, uint64_t approx) {
  uint64_t ed = exact > approx ? exact - approx : approx - exact;
  acc.pairs += 1;
  if (ed != 0) acc.mismatches += 1;
  acc.ed_sum += ed;
  if (exact == 0) {
    acc.red_sum += approx == 0 ? 0.0L : 1.0L;
  } else {
    acc.red_sum += (long double)(ed) / (long double)(exact);
  }
}

}  // namespace

ErrorReport evaluate_metrics(const CircuitRegistry& reg, CircuitConfigId cfg,
                             unsigned width, SampleMode mode) {
  if (width < 1 || width > 32)
    throw ConfigError("operand width must be in [1,32], got " +
                      std::to_string(width));
  if (mode.kind == SampleMode::Kind::Exhaustive && width > 16)
    throw ConfigError(
        "exhaustive evaluation is limited to width <= 16 (2^(2*width) pairs); "
        "use sampled mode for wider operands");

  ApproxConfig ac;
  ac.approx_enable = true;
  ac.circuit_select = uint8_t(cfg.slot);
  ac.truncation = cfg.truncation;
  ac.error_field = cfg.error_field;
  // force the slot lookup now so an empty slot fails before the sweep
  (void)reg.at(cfg.unit, cfg.slot);

  const uint64_t mask = width == 32 ? ~uint64_t(0) >> 32
                                    : (uint64_t(1) << width) - 1;

  auto eval_pair = [&](Accum& acc, uint32_t a, uint32_t b) {
    switch (cfg.unit) {
      case UnitKind::Adder: {
        uint64_t exact = width == 32 ? uint64_t(uint32_t(a + b))
                                     : uint64_t(a) + uint64_t(b);
        uint64_t approx = dispatch_add(reg, ac, a, b, false).value;
        accumulate(acc, exact, approx);
        break;
      }
      case UnitKind::Multiplier: {
        uint64_t exact = uint64_t(a) * uint64_t(b);
        uint64_t approx =
            dispatch_mul(reg, ac, a, b, MulMode::UnsignedUnsigned).value;
        accumulate(acc, exact, approx);
        break;
      }
      case UnitKind::Divider: {
        uint64_t exact = b == 0 ? 0xFFFFFFFFull : uint64_t(a / b);
        uint64_t approx = dispatch_div(reg, ac, a, b, false).quotient;
        accumulate(acc, exact, approx);
        break;
      }
    }
  };

  Accum acc;
  if (mode.kind == SampleMode::Kind::Exhaustive) {
    const uint64_t n = uint64_t(1) << width;
    for (uint64_t a = 0; a < n; ++a)
      for (uint64_t b = 0; b < n; ++b)
        eval_pair(acc, uint32_t(a), uint32_t(b));
  } else {
    std::mt19937_64 rng(mode.seed);
    for (uint64_t i = 0; i < mode.samples; ++i) {
      uint32_t a = uint32_t(rng() & mask);
      uint32_t b = uint32_t(rng() & mask);
      eval_pair(acc, a, b);
    }
  }

  long double normalizer = 1;
  switch (cfg.unit) {
    case UnitKind::Multiplier: {
      long double m = (long double)(mask);
      normalizer = m * m;
      break;
    }
    case UnitKind::Adder:
      normalizer = 2.0L * (long double)(mask);
      break;
    case UnitKind::Divider:
      normalizer = (long double)(mask);
      break;
  }

  ErrorReport rep;
  rep.config = cfg;
  rep.mode = mode;
  rep.pairs = acc.pairs;
  rep.mismatches = acc.mismatches;
  if (acc.pairs > 0) {
    long double n = (long double)(acc.pairs);
    rep.er = double((long double)(acc.mismatches) / n);
    rep.mred = double(acc.red_sum / n);
    long double mean_ed = (long double)(acc.ed_sum) / n;
    rep.mean_ed = double(mean_ed);
    rep.nmed = double(mean_ed / normalizer);
  }
  return rep;
}

std::vector<ErrorReport> sweep_levels(const CircuitRegistry& reg, UnitKind unit,
                                      unsigned slot,
                                      const std::vector<uint16_t>& raw_levels,
                                      unsigned width, SampleMode mode) {
  std::vector<ErrorReport> out;
  out.reserve(raw_levels.size());
  for (uint16_t raw : raw_levels) {
    CircuitConfigId cfg{unit, slot, raw, 0};
    out.push_back(evaluate_metrics(reg, cfg, width, mode));
  }
  return out;
}

}  // namespace axrv
