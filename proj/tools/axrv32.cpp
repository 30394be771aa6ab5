#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "axrv/energy.hpp"
#include "axrv/imaging.hpp"
#include "axrv/loader.hpp"
#include "axrv/machine.hpp"
#include "axrv/metrics.hpp"

using nlohmann::json;
using namespace axrv;

namespace {

uint32_t parse_word(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(s, &pos, 0);
    if (pos != s.size() || v > 0xFFFFFFFFul)
      throw std::invalid_argument(s);
    return uint32_t(v);
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "cannot parse '" + s + "' as a 32-bit word");
  }
}

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string psnr_str(double v, int prec = 4) {
  return std::isinf(v) ? "inf" : fmt(v, prec);
}

json psnr_json(double v) {
  if (std::isinf(v)) return nullptr;  // "inf" marker: JSON has no infinity
  return v;
}

struct LevelSpec {
  bool exact = false;       // approx_enable = 0 row
  uint16_t raw = 0;
};

std::vector<LevelSpec> parse_levels(const std::string& arg, bool allow_exact) {
  std::vector<LevelSpec> out;
  std::string s = arg;
  if (s == "table4") {
    for (uint16_t raw : kMulLevelEncodings) out.push_back({false, raw});
    return out;
  }
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    std::string tok = s.substr(start, comma == std::string::npos
                                          ? std::string::npos
                                          : comma - start);
    if (!tok.empty()) {
      if (tok == "exact") {
        if (!allow_exact)
          throw CLI::ValidationError("--levels", "'exact' not valid here");
        out.push_back({true, 0});
      } else if (tok == "table4") {
        for (uint16_t raw : kMulLevelEncodings) out.push_back({false, raw});
      } else {
        out.push_back({false, uint16_t(parse_word(tok, "--levels") & 0xFFFFu)});
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--levels", "empty level list");
  return out;
}

UnitKind parse_unit(const std::string& s) {
  if (s == "adder" || s == "add" || s == "alu") return UnitKind::Adder;
  if (s == "multiplier" || s == "mul") return UnitKind::Multiplier;
  if (s == "divider" || s == "div") return UnitKind::Divider;
  throw CLI::ValidationError("--unit", "unknown unit '" + s + "'");
}

int cmd_run(const std::string& format, const std::string& program,
            const std::string& entry_s, const std::string& ext,
            bool no_m, uint64_t mem_size, const std::string& pipeline,
            const std::string& alucsr, const std::string& mulcsr,
            const std::string& divcsr, uint64_t max_steps,
            const std::string& trace_path) {
  CoreConfig cfg;
  cfg.extension = ext == "E" ? Extension::RV32E : Extension::RV32I;
  cfg.m_extension = !no_m;
  if (mem_size < 4096)
    throw CLI::ValidationError("--mem-size", "too small");
  cfg.memory_size = uint32_t(mem_size);
  cfg.pipeline = pipeline == "off" ? PipelineModel::Off
                                   : PipelineModel::ThreeStage;

  Machine m(cfg);
  load_program(m, program, parse_word(entry_s, "--entry"));
  m.csr_write(kAluCsr, parse_word(alucsr, "--alucsr"));
  m.csr_write(kMulCsr, parse_word(mulcsr, "--mulcsr"));
  m.csr_write(kDivCsr, parse_word(divcsr, "--divcsr"));
  m.set_console(&std::cout);

  std::vector<TraceEvent> trace;
  if (!trace_path.empty()) m.set_trace_sink(&trace);

  RunReport rep = m.run(max_steps);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) {
      std::cerr << "error: cannot write trace file " << trace_path << "\n";
      return 1;
    }
    write_trace_jsonl(out, trace);
  }

  const char* stop = rep.stop == StopReason::GuestExit ? "exit" : "max-steps";
  if (format == "json") {
    json j;
    j["exit_code"] = rep.exit_code;
    j["instret"] = rep.instret;
    j["cycle"] = rep.cycle;
    j["cpi"] = rep.cpi();
    j["stop"] = stop;
    j["hazard_stalls"] = rep.hazard_stalls;
    j["flush_cycles"] = rep.flush_cycles;
    std::cout << j.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "exit_code,instret,cycle,cpi,stop\n"
              << rep.exit_code << ',' << rep.instret << ',' << rep.cycle << ','
              << fmt(rep.cpi(), 6) << ',' << stop << "\n";
  } else {
    std::printf("stop      : %s\n", stop);
    std::printf("exit code : %d\n", rep.exit_code);
    std::printf("instret   : %" PRIu64 "\n", rep.instret);
    std::printf("cycle     : %" PRIu64 "\n", rep.cycle);
    std::printf("cpi       : %s\n", fmt(rep.cpi(), 4).c_str());
  }

  if (rep.stop == StopReason::MaxSteps) return 124;
  return rep.exit_code & 0xFF;
}

int cmd_metrics(const std::string& format, const std::string& unit_s,
                unsigned slot, const std::string& levels_s, unsigned width,
                bool exhaustive, uint64_t samples, uint64_t seed,
                const std::string& trunc_s) {
  UnitKind unit = parse_unit(unit_s);
  std::vector<LevelSpec> levels = parse_levels(levels_s, false);
  uint8_t trunc = uint8_t(parse_word(trunc_s, "--trunc") & 0xFu);

  SampleMode mode = exhaustive ? SampleMode::exhaustive()
                               : SampleMode::random(samples, seed);

  CircuitRegistry reg = CircuitRegistry::with_defaults();
  std::vector<uint16_t> raws;
  for (const LevelSpec& l : levels) raws.push_back(l.raw);

  std::vector<ErrorReport> reports;
  for (uint16_t raw : raws) {
    reports.push_back(
        evaluate_metrics(reg, {unit, slot, raw, trunc}, width, mode));
  }

  const CircuitModel& model = reg.at(unit, slot);
  auto eff = [&](uint16_t raw) { return model.effective_level(raw); };

  if (format == "json") {
    json arr = json::array();
    for (size_t i = 0; i < reports.size(); ++i) {
      const ErrorReport& r = reports[i];
      json j;
      j["level"] = eff(raws[i]);
      j["raw"] = raws[i];
      j["er"] = r.er;
      j["mred"] = r.mred;
      j["nmed"] = r.nmed;
      j["pairs"] = r.pairs;
      arr.push_back(j);
    }
    std::cout << arr.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "level,raw,er,mred,nmed\n";
    for (size_t i = 0; i < reports.size(); ++i) {
      const ErrorReport& r = reports[i];
      std::printf("%u,0x%02x,%s,%s,%s\n", eff(raws[i]), raws[i],
                  fmt(r.er, 8).c_str(), fmt(r.mred, 8).c_str(),
                  fmt(r.nmed, 8).c_str());
    }
  } else {
    std::printf("%-6s %-6s %10s %10s %10s\n", "level", "raw", "ER(%)",
                "MRED(%)", "NMED(%)");
    for (size_t i = 0; i < reports.size(); ++i) {
      const ErrorReport& r = reports[i];
      std::printf("%-6u 0x%02x %10.4f %10.4f %10.4f\n", eff(raws[i]), raws[i],
                  r.er * 100, r.mred * 100, r.nmed * 100);
    }
  }
  return 0;
}

int cmd_sharpen(const std::string& format, const std::string& image_path,
                const std::string& levels_s, const std::string& save_dir,
                bool with_energy, const std::string& table_path) {
  ImageBuffer input = load_pgm(image_path);
  std::vector<LevelSpec> levels = parse_levels(levels_s, true);
  CircuitRegistry reg = CircuitRegistry::with_defaults();
  CostTable table =
      table_path.empty() ? CostTable::defaults() : load_cost_table(table_path);

  ApproxConfig exact_cfg;  // approx_enable off: accurate slot
  ImageBuffer reference = sharpen(input, reg, exact_cfg);
  uint64_t products = uint64_t(input.width) * input.height * 25;

  struct Row {
    std::string level, raw;
    double psnr_db, mse_v, energy_pj;
  };
  std::vector<Row> rows;

  const CircuitModel& demo = reg.at(UnitKind::Multiplier, 1);
  for (const LevelSpec& l : levels) {
    ApproxConfig cfg;
    double cost;
    std::string level_name, raw_name;
    if (l.exact) {
      cfg = exact_cfg;
      cost = table.lookup(UnitKind::Multiplier, 0, 0);
      level_name = "accurate";
      raw_name = "-";
    } else {
      cfg.approx_enable = true;
      cfg.circuit_select = 1;
      cfg.error_field = l.raw;
      cost = table.lookup(UnitKind::Multiplier, 1, demo.effective_level(l.raw));
      level_name = std::to_string(demo.effective_level(l.raw));
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%02x", l.raw);
      raw_name = buf;
    }
    ImageBuffer out = sharpen(input, reg, cfg);
    double m = mse(reference, out);
    Row row{level_name, raw_name, psnr(m), m, cost * double(products)};
    rows.push_back(row);
    if (!save_dir.empty()) {
      std::string name = l.exact ? "accurate" : "level" + level_name;
      save_pgm(out, save_dir + "/sharpen_" + name + ".pgm");
    }
  }

  if (format == "json") {
    json arr = json::array();
    for (const Row& r : rows) {
      json j;
      j["level"] = r.level;
      j["raw"] = r.raw;
      j["psnr_db"] = psnr_json(r.psnr_db);
      j["mse"] = r.mse_v;
      if (with_energy) j["mul_energy_pj"] = r.energy_pj;
      arr.push_back(j);
    }
    std::cout << arr.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "level,raw,psnr_db,mse";
    if (with_energy) std::cout << ",mul_energy_pj";
    std::cout << "\n";
    for (const Row& r : rows) {
      std::cout << r.level << ',' << r.raw << ',' << psnr_str(r.psnr_db) << ','
                << fmt(r.mse_v, 6);
      if (with_energy) std::cout << ',' << fmt(r.energy_pj, 4);
      std::cout << "\n";
    }
  } else {
    std::printf("%-10s %-6s %12s %12s", "level", "raw", "PSNR(dB)", "MSE");
    if (with_energy) std::printf(" %16s", "mul energy(pJ)");
    std::printf("\n");
    for (const Row& r : rows) {
      std::printf("%-10s %-6s %12s %12s", r.level.c_str(), r.raw.c_str(),
                  psnr_str(r.psnr_db).c_str(), fmt(r.mse_v, 4).c_str());
      if (with_energy) std::printf(" %16s", fmt(r.energy_pj, 2).c_str());
      std::printf("\n");
    }
  }
  return 0;
}

int cmd_energy(const std::string& format, const std::string& trace_path,
               const std::string& table_path) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "error: cannot open trace " << trace_path << "\n";
    return 1;
  }
  std::vector<TraceEvent> trace = read_trace_jsonl(in);
  CostTable table =
      table_path.empty() ? CostTable::defaults() : load_cost_table(table_path);
  EnergyReport rep = estimate(trace, table);

  if (format == "json") {
    json j;
    j["total_pj"] = rep.total_pj;
    j["pj_per_op"] = rep.pj_per_op;
    j["base_pj"] = rep.base_pj;
    j["unit_pj"] = rep.unit_pj;
    j["instret"] = rep.instret;
    j["unit_ops"] = rep.unit_ops;
    json rows = json::array();
    for (const EnergyBreakdownRow& r : rep.rows) {
      rows.push_back({{"unit", unit_name(r.unit)},
                      {"slot", r.slot},
                      {"level", r.level},
                      {"count", r.count},
                      {"energy_pj", r.energy_pj}});
    }
    j["breakdown"] = rows;
    std::cout << j.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "unit,slot,level,count,energy_pj\n";
    for (const EnergyBreakdownRow& r : rep.rows) {
      std::cout << unit_name(r.unit) << ',' << r.slot << ',' << r.level << ','
                << r.count << ',' << fmt(r.energy_pj, 4) << "\n";
    }
    std::cout << "total,,," << rep.instret << ',' << fmt(rep.total_pj, 4)
              << "\n";
  } else {
    std::printf("instret    : %" PRIu64 "\n", rep.instret);
    std::printf("unit ops   : %" PRIu64 "\n", rep.unit_ops);
    std::printf("base       : %s pJ\n", fmt(rep.base_pj, 4).c_str());
    std::printf("unit total : %s pJ\n", fmt(rep.unit_pj, 4).c_str());
    std::printf("total      : %s pJ\n", fmt(rep.total_pj, 4).c_str());
    std::printf("pJ/op      : %s\n", fmt(rep.pj_per_op, 4).c_str());
    if (!rep.rows.empty()) {
      std::printf("%-12s %-5s %-6s %10s %14s\n", "unit", "slot", "level",
                  "count", "energy(pJ)");
      for (const EnergyBreakdownRow& r : rep.rows) {
        std::printf("%-12s %-5u %-6u %10" PRIu64 " %14s\n", unit_name(r.unit),
                    r.slot, r.level, r.count, fmt(r.energy_pj, 4).c_str());
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximation-aware RV32I(E)M instruction-set simulator"};
  app.require_subcommand(1);

  std::string format = "text";
  uint64_t seed = 1;
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--seed", seed, "rng seed for sampled modes");

  // run
  auto* run = app.add_subcommand("run", "load and run a guest program");
  std::string program, entry = "0x0", ext = "I", pipeline = "three_stage";
  std::string alucsr = "0x0", mulcsr = "0x0", divcsr = "0x0", trace_path;
  bool no_m = false;
  uint64_t mem_size = 16u * 1024 * 1024, max_steps = ~uint64_t(0);
  run->add_option("program", program, "ELF32 or flat binary")->required();
  run->add_option("--entry", entry, "entry address for flat binaries");
  run->add_option("--extension", ext, "base ISA variant")
      ->check(CLI::IsMember({"I", "E"}));
  run->add_flag("--no-m", no_m, "disable the M extension");
  run->add_option("--mem-size", mem_size, "RAM size in bytes");
  run->add_option("--pipeline", pipeline, "cycle accounting model")
      ->check(CLI::IsMember({"off", "three_stage"}));
  run->add_option("--alucsr", alucsr, "initial 0x800 value");
  run->add_option("--mulcsr", mulcsr, "initial 0x801 value");
  run->add_option("--divcsr", divcsr, "initial 0x802 value");
  run->add_option("--max-steps", max_steps, "instruction budget");
  run->add_option("--trace", trace_path, "write JSON-lines trace here");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "error metrics for a circuit");
  std::string unit_s = "mul", levels_s = "table4", trunc_s = "0";
  unsigned slot = 1, width = 8;
  bool exhaustive = false;
  uint64_t samples = 100000;
  metrics->add_option("--unit", unit_s, "adder|mul|div");
  metrics->add_option("--slot", slot, "circuit slot");
  metrics->add_option("--levels", levels_s,
                      "comma-separated raw error fields, or 'table4'");
  metrics->add_option("--width", width, "operand width in bits");
  metrics->add_flag("--exhaustive", exhaustive, "walk all 2^(2*width) pairs");
  metrics->add_option("--samples", samples, "random pair count");
  metrics->add_option("--trunc", trunc_s, "truncation field (0..15)");

  // sharpen
  auto* sharpen_cmd = app.add_subcommand("sharpen", "image sharpening sweep");
  std::string image_path, sharpen_levels = "exact,table4", save_dir, table_path;
  bool with_energy = false;
  sharpen_cmd->add_option("image", image_path, "P5 PGM input")->required();
  sharpen_cmd->add_option("--levels", sharpen_levels,
                          "'exact', 'table4', or raw error fields");
  sharpen_cmd->add_option("--save-dir", save_dir, "write per-level PGMs here");
  sharpen_cmd->add_flag("--with-energy", with_energy,
                        "add a multiplier-energy column");
  sharpen_cmd->add_option("--table", table_path, "cost table JSON");

  // energy
  auto* energy_cmd = app.add_subcommand("energy", "estimate energy of a trace");
  std::string energy_trace, energy_table;
  energy_cmd->add_option("--trace", energy_trace, "JSON-lines trace")
      ->required();
  energy_cmd->add_option("--table", energy_table, "cost table JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(format, program, entry, ext, no_m, mem_size, pipeline,
                     alucsr, mulcsr, divcsr, max_steps, trace_path);
    if (metrics->parsed())
      return cmd_metrics(format, unit_s, slot, levels_s, width, exhaustive,
                         samples, seed, trunc_s);
    if (sharpen_cmd->parsed())
      return cmd_sharpen(format, image_path, sharpen_levels, save_dir,
                         with_energy, table_path);
    if (energy_cmd->parsed())
      return cmd_energy(format, energy_trace, energy_table);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const SimFault& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
