#include <doctest.h>

#include <fstream>
#include <string>

#include "axrv/energy.hpp"

using namespace axrv;

namespace {

const std::string kDefaultTable =
    std::string(AXRV32_SOURCE_DIR) + "/data/default_costs.json";

std::string temp_json(const std::string& body) {
  std::string path = "/tmp/axrv32_energytest.json";
  std::ofstream out(path);
  out << body;
  out.close();
  return path;
}

TraceEvent unit_event(UnitKind unit, unsigned slot, unsigned level) {
  TraceEvent ev;
  ev.cls = unit == UnitKind::Adder ? OpClass::Alu
           : unit == UnitKind::Multiplier ? OpClass::Mul
                                          : OpClass::Div;
  ev.has_unit = true;
  ev.unit = unit;
  ev.slot = slot;
  ev.level = level;
  return ev;
}

TraceEvent plain_event() {
  TraceEvent ev;
  ev.cls = OpClass::Jump;
  return ev;
}

}  // namespace

TEST_CASE("shipped cost table equals the built-in defaults") {
  CostTable shipped = load_cost_table(kDefaultTable);
  CHECK(shipped == CostTable::defaults());
}

TEST_CASE("lookup precedence: exact then wildcard then fallback") {
  CostTable t;
  t.set(UnitKind::Multiplier, 1, 3, 1.25);
  t.set(UnitKind::Multiplier, 1, -1, 2.5);

  CHECK(t.lookup(UnitKind::Multiplier, 1, 3) == 1.25);
  CHECK(t.lookup(UnitKind::Multiplier, 1, 6) == 2.5);   // wildcard
  CHECK_THROWS_WITH_AS(t.lookup(UnitKind::Adder, 0, 0),
                       doctest::Contains("missing cost entry: adder slot 0"),
                       ConfigError);

  t.fallback_pj = 0.5;
  CHECK(t.lookup(UnitKind::Adder, 0, 0) == 0.5);
  CHECK(t.lookup(UnitKind::Multiplier, 1, 6) == 2.5);   // wildcard still wins
}

TEST_CASE("cost entries must be non-negative") {
  CostTable t;
  CHECK_THROWS_WITH_AS(t.set(UnitKind::Adder, 0, 0, -0.1),
                       doctest::Contains("negative"), ConfigError);
}

TEST_CASE("default multiplier energy shrinks with approximation depth") {
  CostTable t = CostTable::defaults();
  // level 0 is the deepest approximation and must be the cheapest
  for (unsigned l = 1; l <= 6; ++l) {
    CAPTURE(l);
    CHECK(t.lookup(UnitKind::Multiplier, 1, l) >=
          t.lookup(UnitKind::Multiplier, 1, l - 1));
  }
  for (unsigned s = 1; s <= 24; ++s) {
    CAPTURE(s);
    CHECK(t.lookup(UnitKind::Divider, 1, s) <=
          t.lookup(UnitKind::Divider, 1, s - 1));
  }
  for (unsigned k = 1; k <= 4; ++k) {
    CAPTURE(k);
    CHECK(t.lookup(UnitKind::Adder, 1, k) <=
          t.lookup(UnitKind::Adder, 1, k - 1));
  }
  // every demo level is cheaper than the accurate circuit it replaces
  CHECK(t.lookup(UnitKind::Adder, 1, 0) < t.lookup(UnitKind::Adder, 0, 0));
  CHECK(t.lookup(UnitKind::Multiplier, 1, 6) <
        t.lookup(UnitKind::Multiplier, 0, 0));
  CHECK(t.lookup(UnitKind::Divider, 1, 1) < t.lookup(UnitKind::Divider, 0, 0));
}

TEST_CASE("estimate sums a hand-computed trace") {
  CostTable t;
  t.base_energy_per_instr_pj = 2.0;
  t.set(UnitKind::Adder, 0, -1, 0.25);
  t.set(UnitKind::Multiplier, 1, 4, 1.5);

  std::vector<TraceEvent> trace;
  trace.push_back(plain_event());
  trace.push_back(unit_event(UnitKind::Adder, 0, 0));
  trace.push_back(unit_event(UnitKind::Adder, 0, 0));
  trace.push_back(unit_event(UnitKind::Multiplier, 1, 4));
  trace.push_back(plain_event());

  EnergyReport rep = estimate(trace, t);
  CHECK(rep.instret == 5);
  CHECK(rep.unit_ops == 3);
  CHECK(rep.base_pj == doctest::Approx(10.0));            // 5 * 2.0
  CHECK(rep.unit_pj == doctest::Approx(0.25 * 2 + 1.5));  // 2.0
  CHECK(rep.total_pj == doctest::Approx(12.0));
  CHECK(rep.pj_per_op == doctest::Approx(12.0 / 5.0));

  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].unit == UnitKind::Adder);
  CHECK(rep.rows[0].count == 2);
  CHECK(rep.rows[0].energy_pj == doctest::Approx(0.5));
  CHECK(rep.rows[1].unit == UnitKind::Multiplier);
  CHECK(rep.rows[1].count == 1);
  CHECK(rep.rows[1].energy_pj == doctest::Approx(1.5));
}

TEST_CASE("estimate is linear in event counts") {
  CostTable t;
  t.base_energy_per_instr_pj = 1.0;
  t.set(UnitKind::Divider, 1, 8, 3.0);

  std::vector<TraceEvent> once{unit_event(UnitKind::Divider, 1, 8)};
  std::vector<TraceEvent> twice{unit_event(UnitKind::Divider, 1, 8),
                                unit_event(UnitKind::Divider, 1, 8)};
  EnergyReport r1 = estimate(once, t);
  EnergyReport r2 = estimate(twice, t);
  CHECK(r2.unit_pj == doctest::Approx(2.0 * r1.unit_pj));
  CHECK(r2.base_pj == doctest::Approx(2.0 * r1.base_pj));
}

TEST_CASE("empty trace yields zero energy") {
  EnergyReport rep = estimate({}, CostTable::defaults());
  CHECK(rep.instret == 0);
  CHECK(rep.total_pj == 0.0);
  CHECK(rep.pj_per_op == 0.0);
  CHECK(rep.rows.empty());
}

TEST_CASE("estimate reports the missing key") {
  CostTable t;  // empty, no fallback
  std::vector<TraceEvent> trace{unit_event(UnitKind::Multiplier, 1, 2)};
  CHECK_THROWS_WITH_AS(
      estimate(trace, t),
      doctest::Contains("missing cost entry: multiplier slot 1 level 2"),
      ConfigError);
}

TEST_CASE("cost table json diagnostics") {
  CHECK_THROWS_WITH_AS(load_cost_table("/tmp/axrv32_no_such_table.json"),
                       doctest::Contains("cannot open"), ConfigError);

  CHECK_THROWS_WITH_AS(load_cost_table(temp_json("{not json")),
                       doctest::Contains("parse error"), ConfigError);

  CHECK_THROWS_WITH_AS(load_cost_table(temp_json("[1,2,3]")),
                       doctest::Contains("JSON object"), ConfigError);

  CHECK_THROWS_WITH_AS(load_cost_table(temp_json("{\"entries\": 5}")),
                       doctest::Contains("'entries' array"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"entries": [{"unit": "adder", "slot": 0, "energy_pj": 1.0},
                          {"unit": "frobnicator", "slot": 0, "energy_pj": 1}]})")),
      doctest::Contains("unknown unit name 'frobnicator' (entries[1])"),
      ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"entries": [{"unit": "adder", "slot": 9, "energy_pj": 1.0}]})")),
      doctest::Contains("slot out of range (entries[0])"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"entries": [{"unit": "adder", "slot": 0}]})")),
      doctest::Contains("unit/slot/energy_pj (entries[0])"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"entries": [{"unit": "adder", "slot": 0, "level": "xx",
                           "energy_pj": 1.0}]})")),
      doctest::Contains("integer or \"*\" (entries[0])"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"entries": [{"unit": "adder", "slot": 0, "energy_pj": -1.0}]})")),
      doctest::Contains("negative energy entry (entries[0])"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_cost_table(temp_json(
          R"({"base_energy_per_instr_pj": -1, "entries": []})")),
      doctest::Contains("negative base_energy_per_instr_pj"), ConfigError);
}

TEST_CASE("cost table json accepts wildcard and integer levels") {
  CostTable t = load_cost_table(temp_json(R"({
    "base_energy_per_instr_pj": 3.5,
    "voltage_v": 1.1,
    "frequency_mhz": 620.0,
    "fallback_pj": 0.125,
    "entries": [
      {"unit": "adder", "slot": 0, "level": "*", "energy_pj": 0.5},
      {"unit": "multiplier", "slot": 1, "level": 2, "energy_pj": 0.75},
      {"unit": "divider", "slot": 1, "energy_pj": 0.25}
    ]
  })"));
  CHECK(t.base_energy_per_instr_pj == 3.5);
  CHECK(t.voltage_v == 1.1);
  CHECK(t.frequency_mhz == 620.0);
  REQUIRE(t.fallback_pj.has_value());
  CHECK(*t.fallback_pj == 0.125);
  CHECK(t.lookup(UnitKind::Adder, 0, 7) == 0.5);        // wildcard
  CHECK(t.lookup(UnitKind::Multiplier, 1, 2) == 0.75);  // exact
  CHECK(t.lookup(UnitKind::Divider, 1, 3) == 0.25);     // omitted = wildcard
  CHECK(t.lookup(UnitKind::Multiplier, 0, 0) == 0.125); // fallback
}
