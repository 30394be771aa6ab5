#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "axrv/circuits.hpp"
#include "axrv/machine.hpp"

namespace axrv {

/// Per-operation energy costs in picojoules, keyed by (unit, slot, level);
/// a level of -1 stands for the "*" wildcard matching any level of that
/// (unit, slot). Lookup order: exact level, then wildcard, then fallback_pj.
class CostTable {
 public:
  double base_energy_per_instr_pj = 7.0;
  double voltage_v = 1.1;
  double frequency_mhz = 620.0;
  std::optional<double> fallback_pj;

  void set(UnitKind unit, unsigned slot, int level, double pj);
  /// Throws ConfigError naming the missing key when nothing matches.
  double lookup(UnitKind unit, unsigned slot, unsigned level) const;

  /// Built-in defaults: power-times-delay circuit costs for slots 0 and 1 of
  /// every unit plus the base per-instruction constant.
  static CostTable defaults();

  bool operator==(const CostTable&) const = default;

 private:
  std::map<std::tuple<unsigned, unsigned, int>, double> entries_;
};

CostTable load_cost_table(const std::string& path);

struct EnergyBreakdownRow {
  UnitKind unit = UnitKind::Adder;
  unsigned slot = 0;
  unsigned level = 0;
  uint64_t count = 0;
  double energy_pj = 0;
};

struct EnergyReport {
  double total_pj = 0;
  double pj_per_op = 0;
  double base_pj = 0;
  double unit_pj = 0;
  uint64_t instret = 0;
  uint64_t unit_ops = 0;
  std::vector<EnergyBreakdownRow> rows;
};

/// total = base_energy * instret + sum of per-event circuit costs; one trace
/// event is one retired instruction.
EnergyReport estimate(const std::vector<TraceEvent>& trace,
                      const CostTable& table);

}  // namespace axrv
