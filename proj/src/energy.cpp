#include "axrv/energy.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace axrv {

namespace {

using nlohmann::json;

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

UnitKind unit_from_name(const std::string& name) {
  if (name == "adder") return UnitKind::Adder;
  if (name == "multiplier") return UnitKind::Multiplier;
  if (name == "divider") return UnitKind::Divider;
  throw ConfigError("unknown unit name '" + name + "'");
}

}  // namespace

void CostTable::set(UnitKind unit, unsigned slot, int level, double pj) {
  if (pj < 0) throw ConfigError("negative energy entry");
  entries_[{unsigned(unit), slot, level}] = pj;
}

double CostTable::lookup(UnitKind unit, unsigned slot, unsigned level) const {
  auto it = entries_.find({unsigned(unit), slot, int(level)});
  if (it != entries_.end()) return it->second;
  it = entries_.find({unsigned(unit), slot, -1});
  if (it != entries_.end()) return it->second;
  if (fallback_pj) return *fallback_pj;
  throw ConfigError(std::string("missing cost entry: ") + unit_name(unit) +
                    " slot " + std::to_string(slot) + " level " +
                    std::to_string(level));
}

CostTable CostTable::defaults() {
  CostTable t;
  t.base_energy_per_instr_pj = 7.0;  // calibration constant, not a measurement
  t.voltage_v = 1.1;
  t.frequency_mhz = 620.0;

  // accurate circuits: power * delay
  t.set(UnitKind::Adder, 0, -1, round4(183.62 * 2.02 * 1e-3));        // 0.3709
  t.set(UnitKind::Multiplier, 0, -1, round4(224.31 * 1.32 * 1e-3));   // 0.2961
  t.set(UnitKind::Divider, 0, -1, 0.45);  // calibration constant

  // demo adder: power interpolated linearly over cleared-block count 0..4
  for (int k = 0; k <= 4; ++k) {
    double uw = 152.0 - (152.0 - 136.1) / 4.0 * k;
    t.set(UnitKind::Adder, 1, k, round4(uw * 1.33 * 1e-3));
  }
  // demo multiplier: power interpolated linearly over level 0..6
  for (int l = 0; l <= 6; ++l) {
    double uw = 67.43 + (81.05 - 67.43) / 6.0 * l;
    t.set(UnitKind::Multiplier, 1, l, round4(uw * 0.64 * 1e-3));
  }
  // demo divider: iteration count scales with (32 - skipped) / 32
  for (int s = 0; s <= 24; ++s) {
    t.set(UnitKind::Divider, 1, s, round4(0.45 * (32.0 - s) / 32.0));
  }
  return t;
}

CostTable load_cost_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cost table: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cost table parse error in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("cost table must be a JSON object");

  CostTable t;
  t.base_energy_per_instr_pj = doc.value("base_energy_per_instr_pj", 0.0);
  if (t.base_energy_per_instr_pj < 0)
    throw ConfigError("negative base_energy_per_instr_pj");
  t.voltage_v = doc.value("voltage_v", 0.0);
  t.frequency_mhz = doc.value("frequency_mhz", 0.0);
  if (doc.contains("fallback_pj") && !doc["fallback_pj"].is_null()) {
    double f = doc["fallback_pj"];
    if (f < 0) throw ConfigError("negative fallback_pj");
    t.fallback_pj = f;
  }
  if (!doc.contains("entries") || !doc["entries"].is_array())
    throw ConfigError("cost table needs an 'entries' array");
  size_t idx = 0;
  for (const json& e : doc["entries"]) {
    ++idx;
    auto where = [&] { return " (entries[" + std::to_string(idx - 1) + "])"; };
    if (!e.is_object())
      throw ConfigError("cost table entry must be an object" + where());
    if (!e.contains("unit") || !e.contains("slot") || !e.contains("energy_pj"))
      throw ConfigError("cost table entry needs unit/slot/energy_pj" + where());
    UnitKind unit;
    try {
      unit = unit_from_name(e["unit"]);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string(err.what()) + where());
    }
    unsigned slot = e["slot"];
    if (slot >= CircuitRegistry::kSlots)
      throw ConfigError("slot out of range" + where());
    int level = -1;
    if (e.contains("level") && !e["level"].is_null()) {
      if (e["level"].is_string()) {
        if (e["level"] != "*")
          throw ConfigError("level must be an integer or \"*\"" + where());
      } else {
        level = e["level"];
        if (level < 0) throw ConfigError("negative level" + where());
      }
    }
    double pj = e["energy_pj"];
    if (pj < 0) throw ConfigError("negative energy entry" + where());
    t.set(unit, slot, level, pj);
  }
  return t;
}

EnergyReport estimate(const std::vector<TraceEvent>& trace,
                      const CostTable& table) {
  EnergyReport rep;
  rep.instret = trace.size();
  std::map<std::tuple<unsigned, unsigned, unsigned>, EnergyBreakdownRow> rows;
  for (const TraceEvent& ev : trace) {
    if (!ev.has_unit) continue;
    double pj = table.lookup(ev.unit, ev.slot, ev.level);
    rep.unit_pj += pj;
    rep.unit_ops += 1;
    auto& row = rows[{unsigned(ev.unit), ev.slot, ev.level}];
    row.unit = ev.unit;
    row.slot = ev.slot;
    row.level = ev.level;
    row.count += 1;
    row.energy_pj += pj;
  }
  rep.base_pj = table.base_energy_per_instr_pj * double(rep.instret);
  rep.total_pj = rep.base_pj + rep.unit_pj;
  rep.pj_per_op = rep.instret ? rep.total_pj / double(rep.instret) : 0.0;
  for (auto& [key, row] : rows) rep.rows.push_back(row);
  return rep;
}

}  // namespace axrv
