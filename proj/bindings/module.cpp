#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "axrv/energy.hpp"
#include "axrv/imaging.hpp"
#include "axrv/loader.hpp"
#include "axrv/machine.hpp"
#include "axrv/metrics.hpp"

namespace py = pybind11;
using namespace axrv;

namespace {

MulMode mode_from_string(const std::string& s) {
  if (s == "uu") return MulMode::UnsignedUnsigned;
  if (s == "ss") return MulMode::SignedSigned;
  if (s == "su") return MulMode::SignedUnsigned;
  throw ConfigError("mul mode must be one of 'uu', 'ss', 'su'");
}

UnitKind unit_from_string(const std::string& s) {
  if (s == "adder" || s == "add" || s == "alu") return UnitKind::Adder;
  if (s == "multiplier" || s == "mul") return UnitKind::Multiplier;
  if (s == "divider" || s == "div") return UnitKind::Divider;
  throw ConfigError("unit must be one of 'adder', 'mul', 'div'");
}

py::dict report_to_dict(const ErrorReport& r) {
  py::dict d;
  d["er"] = r.er;
  d["mred"] = r.mred;
  d["nmed"] = r.nmed;
  d["pairs"] = r.pairs;
  d["mismatches"] = r.mismatches;
  d["mean_ed"] = r.mean_ed;
  return d;
}

class Simulator {
 public:
  Simulator(const std::string& extension, bool m, uint64_t mem_size,
            const std::string& pipeline) {
    CoreConfig cfg;
    if (extension == "E") cfg.extension = Extension::RV32E;
    else if (extension == "I") cfg.extension = Extension::RV32I;
    else throw ConfigError("extension must be 'I' or 'E'");
    cfg.m_extension = m;
    cfg.memory_size = uint32_t(mem_size);
    if (pipeline == "off") cfg.pipeline = PipelineModel::Off;
    else if (pipeline == "three_stage") cfg.pipeline = PipelineModel::ThreeStage;
    else throw ConfigError("pipeline must be 'off' or 'three_stage'");
    machine_ = std::make_unique<Machine>(cfg);
  }

  void load(const std::string& path, uint32_t entry) {
    load_program(*machine_, path, entry);
  }

  uint32_t csr_read(uint32_t addr) const { return machine_->csr_read(addr); }
  void csr_write(uint32_t addr, uint32_t v) { machine_->csr_write(addr, v); }
  uint32_t reg(unsigned idx) const { return machine_->reg(idx); }
  void set_reg(unsigned idx, uint32_t v) { machine_->set_reg(idx, v); }
  uint32_t pc() const { return machine_->pc(); }
  std::string console_output() const { return machine_->console_output(); }

  py::dict run(uint64_t max_steps, bool collect_trace) {
    std::vector<TraceEvent> trace;
    if (collect_trace) machine_->set_trace_sink(&trace);
    RunReport rep = machine_->run(max_steps);
    machine_->set_trace_sink(nullptr);

    py::dict d;
    d["stop"] = rep.stop == StopReason::GuestExit ? "exit" : "max-steps";
    d["exit_code"] = rep.exit_code;
    d["instret"] = rep.instret;
    d["cycle"] = rep.cycle;
    d["cpi"] = rep.cpi();
    d["hazard_stalls"] = rep.hazard_stalls;
    d["flush_cycles"] = rep.flush_cycles;
    if (collect_trace) {
      py::list events;
      for (const TraceEvent& ev : trace) {
        py::dict e;
        e["instr_index"] = ev.index;
        e["pc"] = ev.pc;
        e["class"] = op_class_name(ev.cls);
        if (ev.has_unit) e["unit"] = unit_name(ev.unit);
        e["slot"] = ev.slot;
        e["level"] = ev.level;
        e["cycles"] = ev.cycles;
        events.append(e);
      }
      d["trace"] = events;
    }
    return d;
  }

 private:
  std::unique_ptr<Machine> machine_;
};

}  // namespace

PYBIND11_MODULE(_axrv32, mod) {
  mod.doc() = "approximation-aware RV32I(E)M simulator core";

  py::register_exception<SimFault>(mod, "SimFault", PyExc_RuntimeError);
  py::register_exception<LoadError>(mod, "LoadError", PyExc_ValueError);
  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

  py::class_<ApproxConfig>(mod, "ApproxConfig")
      .def(py::init<>())
      .def_static("decode", &ApproxConfig::decode, py::arg("raw"))
      .def("encode", &ApproxConfig::encode)
      .def_readwrite("approx_enable", &ApproxConfig::approx_enable)
      .def_readwrite("circuit_select", &ApproxConfig::circuit_select)
      .def_readwrite("custom1", &ApproxConfig::custom1)
      .def_readwrite("custom2", &ApproxConfig::custom2)
      .def_readwrite("truncation", &ApproxConfig::truncation)
      .def_readwrite("error_field", &ApproxConfig::error_field)
      .def("__repr__", [](const ApproxConfig& c) {
        char buf[96];
        std::snprintf(buf, sizeof buf,
                      "ApproxConfig(enable=%d, select=%u, trunc=%u, "
                      "error=0x%04x)",
                      c.approx_enable ? 1 : 0, c.circuit_select, c.truncation,
                      c.error_field);
        return std::string(buf);
      });

  mod.def(
      "approx_add32",
      [](uint32_t a, uint32_t b, bool subtract, uint32_t mask, unsigned blocks) {
        return approx_add32(a, b, subtract, {uint8_t(mask), blocks});
      },
      py::arg("a"), py::arg("b"), py::arg("subtract") = false,
      py::arg("mask") = 0x0F, py::arg("blocks") = 4);

  mod.def(
      "approx_mul8",
      [](uint32_t a, uint32_t b, uint32_t raw) {
        return approx_mul8(uint8_t(a), uint8_t(b), {uint8_t(raw)});
      },
      py::arg("a"), py::arg("b"), py::arg("raw") = 0);

  mod.def(
      "mul32",
      [](uint32_t a, uint32_t b, const std::string& mode, uint32_t raw) {
        return mul32(a, b, mode_from_string(mode), {uint8_t(raw)});
      },
      py::arg("a"), py::arg("b"), py::arg("mode") = "uu", py::arg("raw") = 0);

  mod.def(
      "nonrestoring_div",
      [](uint32_t dividend, uint32_t divisor, bool is_signed, uint32_t raw) {
        DivResult r =
            nonrestoring_div(dividend, divisor, is_signed, {uint8_t(raw)});
        return py::make_tuple(r.quotient, r.remainder);
      },
      py::arg("dividend"), py::arg("divisor"), py::arg("signed") = false,
      py::arg("raw") = 0);

  mod.def(
      "evaluate_metrics",
      [](const std::string& unit, unsigned slot, uint32_t error_field,
         uint32_t truncation, unsigned width, bool exhaustive,
         uint64_t samples, uint64_t seed) {
        CircuitRegistry reg = CircuitRegistry::with_defaults();
        SampleMode mode = exhaustive ? SampleMode::exhaustive()
                                     : SampleMode::random(samples, seed);
        ErrorReport r = evaluate_metrics(
            reg,
            {unit_from_string(unit), slot, uint16_t(error_field),
             uint8_t(truncation)},
            width, mode);
        return report_to_dict(r);
      },
      py::arg("unit"), py::arg("slot") = 1, py::arg("error_field") = 0,
      py::arg("truncation") = 0, py::arg("width") = 8,
      py::arg("exhaustive") = true, py::arg("samples") = 100000,
      py::arg("seed") = 1);

  mod.attr("TABLE4_LEVELS") =
      std::vector<uint16_t>(kMulLevelEncodings.begin(), kMulLevelEncodings.end());
  mod.attr("ALUCSR") = kAluCsr;
  mod.attr("MULCSR") = kMulCsr;
  mod.attr("DIVCSR") = kDivCsr;
  mod.attr("CYCLE_CSR") = kCycleCsr;
  mod.attr("INSTRET_CSR") = kInstretCsr;

  mod.def(
      "sharpen_pgm",
      [](const std::string& input_path, const std::string& output_path,
         uint32_t mulcsr) {
        CircuitRegistry reg = CircuitRegistry::with_defaults();
        ImageBuffer img = load_pgm(input_path);
        ImageBuffer out = sharpen(img, reg, ApproxConfig::decode(mulcsr));
        save_pgm(out, output_path);
      },
      py::arg("input_path"), py::arg("output_path"), py::arg("mulcsr") = 0);

  mod.def("mse_pgm", [](const std::string& a, const std::string& b) {
    return mse(load_pgm(a), load_pgm(b));
  });
  mod.def("psnr", &psnr, py::arg("mse_value"));

  mod.def(
      "estimate_energy",
      [](const std::string& trace_path, const std::string& table_path) {
        std::ifstream in(trace_path);
        if (!in) throw ConfigError("cannot open trace: " + trace_path);
        std::vector<TraceEvent> trace = read_trace_jsonl(in);
        CostTable table = table_path.empty() ? CostTable::defaults()
                                             : load_cost_table(table_path);
        EnergyReport rep = estimate(trace, table);
        py::dict d;
        d["total_pj"] = rep.total_pj;
        d["pj_per_op"] = rep.pj_per_op;
        d["base_pj"] = rep.base_pj;
        d["unit_pj"] = rep.unit_pj;
        d["instret"] = rep.instret;
        d["unit_ops"] = rep.unit_ops;
        py::list rows;
        for (const EnergyBreakdownRow& r : rep.rows) {
          py::dict row;
          row["unit"] = unit_name(r.unit);
          row["slot"] = r.slot;
          row["level"] = r.level;
          row["count"] = r.count;
          row["energy_pj"] = r.energy_pj;
          rows.append(row);
        }
        d["breakdown"] = rows;
        return d;
      },
      py::arg("trace_path"), py::arg("table_path") = "");

  py::class_<Simulator>(mod, "Simulator")
      .def(py::init<const std::string&, bool, uint64_t, const std::string&>(),
           py::arg("extension") = "I", py::arg("m") = true,
           py::arg("mem_size") = uint64_t(16u * 1024 * 1024),
           py::arg("pipeline") = "three_stage")
      .def("load", &Simulator::load, py::arg("path"), py::arg("entry") = 0)
      .def("csr_read", &Simulator::csr_read)
      .def("csr_write", &Simulator::csr_write)
      .def("reg", &Simulator::reg)
      .def("set_reg", &Simulator::set_reg)
      .def_property_readonly("pc", &Simulator::pc)
      .def_property_readonly("console_output", &Simulator::console_output)
      .def("run", &Simulator::run, py::arg("max_steps") = ~uint64_t(0),
           py::arg("trace") = false);
}
