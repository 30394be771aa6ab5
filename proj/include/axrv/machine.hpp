#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "axrv/circuits.hpp"
#include "axrv/csr.hpp"
#include "axrv/error.hpp"

namespace axrv {

enum class Extension { RV32I, RV32E };
enum class PipelineModel { Off, ThreeStage };

struct CoreConfig {
  Extension extension = Extension::RV32I;
  bool m_extension = true;
  uint32_t memory_size = 16u * 1024 * 1024;
  uint32_t memory_base = 0;
  PipelineModel pipeline = PipelineModel::ThreeStage;
  unsigned branch_flush_penalty = 2;
  unsigned load_use_penalty = 1;
};

enum class OpClass {
  Alu, Load, Store, Branch, Jump, Mul, Div, Csr, System, Fence
};

const char* op_class_name(OpClass cls);

/// One retired instruction, as consumed by the energy estimator.
struct TraceEvent {
  uint64_t index = 0;
  uint32_t pc = 0;
  OpClass cls = OpClass::Alu;
  bool has_unit = false;
  UnitKind unit = UnitKind::Adder;
  uint8_t slot = 0;
  uint8_t level = 0;
  uint8_t cycles = 1;
};

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace_jsonl(std::istream& in);

enum class StopReason { GuestExit, MaxSteps };

struct RunReport {
  StopReason stop = StopReason::GuestExit;
  int exit_code = 0;
  uint64_t instret = 0;
  uint64_t cycle = 0;
  uint64_t hazard_stalls = 0;
  uint64_t flush_cycles = 0;
  double cpi() const { return instret ? double(cycle) / double(instret) : 0.0; }
};

/// Single-hart RV32I(E)M interpreter with pluggable arithmetic circuits.
///
/// Faults (illegal instruction, misaligned or out-of-range access, CSR
/// violations, empty circuit slots) throw SimFault carrying pc and the
/// instruction word; nothing is trapped back into the guest. ECALL follows
/// the bare-metal convention: a7=93 exits with code a0, a7=64 writes the
/// buffer a1[0..a2) to the console stream.
class Machine {
 public:
  explicit Machine(CoreConfig config = {},
                   CircuitRegistry registry = CircuitRegistry::with_defaults());

  const CoreConfig& config() const { return config_; }
  CircuitRegistry& registry() { return registry_; }

  uint32_t pc() const { return pc_; }
  void set_pc(uint32_t pc) { pc_ = pc; }
  uint32_t reg(unsigned idx) const;
  void set_reg(unsigned idx, uint32_t value);
  unsigned reg_count() const {
    return config_.extension == Extension::RV32E ? 16u : 32u;
  }

  std::vector<uint8_t>& memory() { return memory_; }
  const std::vector<uint8_t>& memory() const { return memory_; }
  uint8_t load8(uint32_t addr) const;
  void store8(uint32_t addr, uint8_t value);
  uint32_t load32(uint32_t addr) const;
  void store32(uint32_t addr, uint32_t value);

  /// CSR access with machine semantics (0x800..0x802 read/write, counters
  /// read-only, anything else faults). Used by tests and the CLI to preload
  /// configurations; guest csr instructions go through the same checks.
  uint32_t csr_read(uint32_t addr) const;
  void csr_write(uint32_t addr, uint32_t value);

  uint64_t instret() const { return instret_; }
  uint64_t cycle() const { return cycle_; }

  bool halted() const { return halted_; }
  int exit_code() const { return exit_code_; }

  /// Collect TraceEvents into `sink` while running (nullptr disables).
  void set_trace_sink(std::vector<TraceEvent>* sink) { trace_sink_ = sink; }
  /// Console bytes from ECALL 64 (defaults to an internal buffer).
  void set_console(std::ostream* out) { console_ = out; }
  const std::string& console_output() const { return console_buffer_; }

  /// Execute one instruction. Throws SimFault on any fault.
  void step();

  /// Run until guest exit or `max_steps` retired instructions.
  RunReport run(uint64_t max_steps = ~uint64_t(0));

 private:
  uint32_t fetch32(uint32_t pc) const;
  void require_reg(unsigned idx, uint32_t pc, uint32_t word) const;
  uint32_t csr_read_checked(uint32_t addr, uint32_t pc, uint32_t word) const;
  void csr_write_checked(uint32_t addr, uint32_t value, uint32_t pc, uint32_t word);
  [[noreturn]] void fault(const std::string& msg, uint32_t pc, uint32_t word) const;

  CoreConfig config_;
  CircuitRegistry registry_;
  std::array<uint32_t, 32> regs_{};
  uint32_t pc_ = 0;
  std::vector<uint8_t> memory_;
  uint32_t alucsr_ = 0;
  uint32_t mulcsr_ = 0;
  uint32_t divcsr_ = 0;
  uint64_t instret_ = 0;
  uint64_t cycle_ = 0;
  uint64_t hazard_stalls_ = 0;
  uint64_t flush_cycles_ = 0;
  bool halted_ = false;
  int exit_code_ = 0;
  // load-use hazard tracking: destination of the previous instruction when it
  // was a load, 0 otherwise (x0 never hazards)
  unsigned pending_load_rd_ = 0;
  std::vector<TraceEvent>* trace_sink_ = nullptr;
  std::ostream* console_ = nullptr;
  std::string console_buffer_;
};

}  // namespace axrv
