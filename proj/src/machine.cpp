#include "axrv/machine.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace axrv {

namespace {

std::string hex32(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

int32_t imm_i(uint32_t w) { return int32_t(w) >> 20; }

int32_t imm_s(uint32_t w) {
  return (int32_t(w & 0xFE000000u) >> 20) | int32_t((w >> 7) & 0x1Fu);
}

int32_t imm_b(uint32_t w) {
  int32_t imm = int32_t(w & 0x80000000u) >> 19;
  imm |= int32_t((w >> 25) & 0x3Fu) << 5;
  imm |= int32_t((w >> 8) & 0xFu) << 1;
  imm |= int32_t((w >> 7) & 1u) << 11;
  return imm;
}

int32_t imm_j(uint32_t w) {
  int32_t imm = int32_t(w & 0x80000000u) >> 11;
  imm |= int32_t(w & 0x000FF000u);
  imm |= int32_t((w >> 20) & 1u) << 11;
  imm |= int32_t((w >> 21) & 0x3FFu) << 1;
  return imm;
}

}  // namespace

const char* op_class_name(OpClass cls) {
  switch (cls) {
    case OpClass::Alu: return "alu";
    case OpClass::Load: return "load";
    case OpClass::Store: return "store";
    case OpClass::Branch: return "branch";
    case OpClass::Jump: return "jump";
    case OpClass::Mul: return "mul";
    case OpClass::Div: return "div";
    case OpClass::Csr: return "csr";
    case OpClass::System: return "system";
    case OpClass::Fence: return "fence";
  }
  return "?";
}

Machine::Machine(CoreConfig config, CircuitRegistry registry)
    : config_(config), registry_(std::move(registry)),
      memory_(config.memory_size, 0) {}

uint32_t Machine::reg(unsigned idx) const {
  return idx < 32 ? regs_[idx] : 0;
}

void Machine::set_reg(unsigned idx, uint32_t value) {
  if (idx > 0 && idx < 32) regs_[idx] = value;
}

void Machine::fault(const std::string& msg, uint32_t pc, uint32_t word) const {
  throw SimFault(msg + " at pc=" + hex32(pc) +
                     (word ? " word=" + hex32(word) : std::string()),
                 pc, word);
}

void Machine::require_reg(unsigned idx, uint32_t pc, uint32_t word) const {
  if (config_.extension == Extension::RV32E && idx >= 16)
    fault("register x" + std::to_string(idx) + " illegal under RV32E", pc, word);
}

uint8_t Machine::load8(uint32_t addr) const {
  uint32_t off = addr - config_.memory_base;
  if (addr < config_.memory_base || off >= memory_.size())
    throw SimFault("load out of bounds at addr=" + hex32(addr), pc_, 0);
  return memory_[off];
}

void Machine::store8(uint32_t addr, uint8_t value) {
  uint32_t off = addr - config_.memory_base;
  if (addr < config_.memory_base || off >= memory_.size())
    throw SimFault("store out of bounds at addr=" + hex32(addr), pc_, 0);
  memory_[off] = value;
}

uint32_t Machine::load32(uint32_t addr) const {
  uint32_t off = addr - config_.memory_base;
  if (addr < config_.memory_base || off + 4 > memory_.size() || off + 4 < off)
    throw SimFault("load out of bounds at addr=" + hex32(addr), pc_, 0);
  return uint32_t(memory_[off]) | uint32_t(memory_[off + 1]) << 8 |
         uint32_t(memory_[off + 2]) << 16 | uint32_t(memory_[off + 3]) << 24;
}

void Machine::store32(uint32_t addr, uint32_t value) {
  uint32_t off = addr - config_.memory_base;
  if (addr < config_.memory_base || off + 4 > memory_.size() || off + 4 < off)
    throw SimFault("store out of bounds at addr=" + hex32(addr), pc_, 0);
  memory_[off] = uint8_t(value);
  memory_[off + 1] = uint8_t(value >> 8);
  memory_[off + 2] = uint8_t(value >> 16);
  memory_[off + 3] = uint8_t(value >> 24);
}

uint32_t Machine::fetch32(uint32_t pc) const {
  uint32_t off = pc - config_.memory_base;
  if (pc < config_.memory_base || off + 4 > memory_.size() || off + 4 < off)
    throw SimFault("instruction fetch out of bounds at pc=" + hex32(pc), pc, 0);
  return uint32_t(memory_[off]) | uint32_t(memory_[off + 1]) << 8 |
         uint32_t(memory_[off + 2]) << 16 | uint32_t(memory_[off + 3]) << 24;
}

uint32_t Machine::csr_read_checked(uint32_t addr, uint32_t pc, uint32_t word) const {
  switch (addr) {
    case kAluCsr: return alucsr_;
    case kMulCsr: return mulcsr_;
    case kDivCsr: return divcsr_;
    case kCycleCsr: return uint32_t(cycle_);
    case kInstretCsr: return uint32_t(instret_);
    default:
      fault("unimplemented csr " + hex32(addr), pc, word);
  }
}

void Machine::csr_write_checked(uint32_t addr, uint32_t value, uint32_t pc,
                                uint32_t word) {
  switch (addr) {
    case kAluCsr: alucsr_ = value; return;
    case kMulCsr: mulcsr_ = value; return;
    case kDivCsr: divcsr_ = value; return;
    case kCycleCsr:
    case kInstretCsr:
      fault("write to read-only csr", pc, word);
    default:
      fault("unimplemented csr " + hex32(addr), pc, word);
  }
}

uint32_t Machine::csr_read(uint32_t addr) const {
  return csr_read_checked(addr, pc_, 0);
}

void Machine::csr_write(uint32_t addr, uint32_t value) {
  csr_write_checked(addr, value, pc_, 0);
}

void Machine::step() {
  if (halted_) throw Error("step on a halted machine");

  const uint32_t pc = pc_;
  if (pc & 3u) fault("misaligned pc", pc, 0);
  const uint32_t w = fetch32(pc);

  const uint32_t opcode = w & 0x7Fu;
  const unsigned rd = (w >> 7) & 31u;
  const unsigned f3 = (w >> 12) & 7u;
  const unsigned rs1 = (w >> 15) & 31u;
  const unsigned rs2 = (w >> 20) & 31u;
  const unsigned f7 = w >> 25;

  uint32_t next_pc = pc + 4;
  OpClass cls = OpClass::Alu;
  bool has_unit = false;
  UnitKind unit = UnitKind::Adder;
  unsigned slot = 0, level = 0, latency = 1;
  bool uses_rs1 = false, uses_rs2 = false, flush = false, is_load = false;

  auto check_target = [&](uint32_t target) {
    if (target & 3u) fault("misaligned jump target " + hex32(target), pc, w);
  };

  switch (opcode) {
    case 0x37: {  // LUI
      require_reg(rd, pc, w);
      set_reg(rd, w & 0xFFFFF000u);
      break;
    }
    case 0x17: {  // AUIPC
      require_reg(rd, pc, w);
      set_reg(rd, pc + (w & 0xFFFFF000u));
      break;
    }
    case 0x6F: {  // JAL
      require_reg(rd, pc, w);
      uint32_t target = pc + uint32_t(imm_j(w));
      check_target(target);
      set_reg(rd, pc + 4);
      next_pc = target;
      cls = OpClass::Jump;
      flush = true;
      break;
    }
    case 0x67: {  // JALR
      if (f3 != 0) fault("illegal instruction", pc, w);
      require_reg(rd, pc, w);
      require_reg(rs1, pc, w);
      uses_rs1 = true;
      uint32_t target = (regs_[rs1] + uint32_t(imm_i(w))) & ~1u;
      check_target(target);
      set_reg(rd, pc + 4);
      next_pc = target;
      cls = OpClass::Jump;
      flush = true;
      break;
    }
    case 0x63: {  // BRANCH
      require_reg(rs1, pc, w);
      require_reg(rs2, pc, w);
      uses_rs1 = uses_rs2 = true;
      uint32_t a = regs_[rs1], b = regs_[rs2];
      bool taken;
      switch (f3) {
        case 0: taken = a == b; break;
        case 1: taken = a != b; break;
        case 4: taken = int32_t(a) < int32_t(b); break;
        case 5: taken = int32_t(a) >= int32_t(b); break;
        case 6: taken = a < b; break;
        case 7: taken = a >= b; break;
        default: fault("illegal instruction", pc, w);
      }
      if (taken) {
        uint32_t target = pc + uint32_t(imm_b(w));
        check_target(target);
        next_pc = target;
        flush = true;
      }
      cls = OpClass::Branch;
      break;
    }
    case 0x03: {  // LOAD
      require_reg(rd, pc, w);
      require_reg(rs1, pc, w);
      uses_rs1 = true;
      uint32_t addr = regs_[rs1] + uint32_t(imm_i(w));
      uint32_t v;
      switch (f3) {
        case 0: v = uint32_t(int32_t(int8_t(load8(addr)))); break;
        case 4: v = load8(addr); break;
        case 1:
          if (addr & 1u) fault("misaligned load at addr=" + hex32(addr), pc, w);
          v = uint32_t(int32_t(int16_t(load8(addr) | load8(addr + 1) << 8)));
          break;
        case 5:
          if (addr & 1u) fault("misaligned load at addr=" + hex32(addr), pc, w);
          v = load8(addr) | uint32_t(load8(addr + 1)) << 8;
          break;
        case 2:
          if (addr & 3u) fault("misaligned load at addr=" + hex32(addr), pc, w);
          v = load32(addr);
          break;
        default: fault("illegal instruction", pc, w);
      }
      set_reg(rd, v);
      cls = OpClass::Load;
      is_load = rd != 0;
      break;
    }
    case 0x23: {  // STORE
      require_reg(rs1, pc, w);
      require_reg(rs2, pc, w);
      uses_rs1 = uses_rs2 = true;
      uint32_t addr = regs_[rs1] + uint32_t(imm_s(w));
      uint32_t v = regs_[rs2];
      switch (f3) {
        case 0: store8(addr, uint8_t(v)); break;
        case 1:
          if (addr & 1u) fault("misaligned store at addr=" + hex32(addr), pc, w);
          store8(addr, uint8_t(v));
          store8(addr + 1, uint8_t(v >> 8));
          break;
        case 2:
          if (addr & 3u) fault("misaligned store at addr=" + hex32(addr), pc, w);
          store32(addr, v);
          break;
        default: fault("illegal instruction", pc, w);
      }
      cls = OpClass::Store;
      break;
    }
    case 0x13: {  // OP-IMM
      require_reg(rd, pc, w);
      require_reg(rs1, pc, w);
      uses_rs1 = true;
      uint32_t a = regs_[rs1];
      uint32_t imm = uint32_t(imm_i(w));
      uint32_t v;
      switch (f3) {
        case 0: {  // ADDI via the ALU adder circuit
          UnitOutcome32 out;
          try {
            out = dispatch_add(registry_, ApproxConfig::decode(alucsr_), a,
                               imm, false);
          } catch (const ConfigError& e) {
            fault(e.what(), pc, w);
          }
          v = out.value;
          has_unit = true;
          unit = UnitKind::Adder;
          slot = out.slot;
          level = out.level;
          latency = out.latency;
          break;
        }
        case 1:
          if (f7 != 0) fault("illegal instruction", pc, w);
          v = a << rs2;
          break;
        case 2: v = int32_t(a) < imm_i(w) ? 1u : 0u; break;
        case 3: v = a < imm ? 1u : 0u; break;
        case 4: v = a ^ imm; break;
        case 5:
          if (f7 == 0x00) v = a >> rs2;
          else if (f7 == 0x20) v = uint32_t(int32_t(a) >> rs2);
          else fault("illegal instruction", pc, w);
          break;
        case 6: v = a | imm; break;
        case 7: v = a & imm; break;
        default: fault("illegal instruction", pc, w);
      }
      set_reg(rd, v);
      break;
    }
    case 0x33: {  // OP
      require_reg(rd, pc, w);
      require_reg(rs1, pc, w);
      require_reg(rs2, pc, w);
      uses_rs1 = uses_rs2 = true;
      uint32_t a = regs_[rs1], b = regs_[rs2];
      uint32_t v;
      if (f7 == 0x01) {  // M extension
        if (!config_.m_extension)
          fault("M extension disabled: illegal instruction", pc, w);
        ApproxConfig cfg = ApproxConfig::decode(f3 < 4 ? mulcsr_ : divcsr_);
        if (f3 < 4) {
          MulMode mode = f3 == 3   ? MulMode::UnsignedUnsigned
                         : f3 == 2 ? MulMode::SignedUnsigned
                                   : MulMode::SignedSigned;
          UnitOutcome64 out;
          try {
            out = dispatch_mul(registry_, cfg, a, b, mode);
          } catch (const ConfigError& e) {
            fault(e.what(), pc, w);
          }
          v = f3 == 0 ? uint32_t(out.value) : uint32_t(out.value >> 32);
          has_unit = true;
          unit = UnitKind::Multiplier;
          slot = out.slot;
          level = out.level;
          latency = out.latency;
          cls = OpClass::Mul;
        } else {
          DivOutcome out;
          try {
            out = dispatch_div(registry_, cfg, a, b, (f3 & 1u) == 0);
          } catch (const ConfigError& e) {
            fault(e.what(), pc, w);
          }
          v = (f3 == 4 || f3 == 5) ? out.quotient : out.remainder;
          has_unit = true;
          unit = UnitKind::Divider;
          slot = out.slot;
          level = out.level;
          latency = out.latency;
          cls = OpClass::Div;
        }
      } else if (f7 == 0x00 || f7 == 0x20) {
        bool alt = f7 == 0x20;
        switch (f3) {
          case 0: {  // ADD / SUB
            UnitOutcome32 out;
            try {
              out = dispatch_add(registry_, ApproxConfig::decode(alucsr_), a, b,
                                 alt);
            } catch (const ConfigError& e) {
              fault(e.what(), pc, w);
            }
            v = out.value;
            has_unit = true;
            unit = UnitKind::Adder;
            slot = out.slot;
            level = out.level;
            latency = out.latency;
            break;
          }
          case 1:
            if (alt) fault("illegal instruction", pc, w);
            v = a << (b & 31u);
            break;
          case 2:
            if (alt) fault("illegal instruction", pc, w);
            v = int32_t(a) < int32_t(b) ? 1u : 0u;
            break;
          case 3:
            if (alt) fault("illegal instruction", pc, w);
            v = a < b ? 1u : 0u;
            break;
          case 4:
            if (alt) fault("illegal instruction", pc, w);
            v = a ^ b;
            break;
          case 5:
            v = alt ? uint32_t(int32_t(a) >> (b & 31u)) : a >> (b & 31u);
            break;
          case 6:
            if (alt) fault("illegal instruction", pc, w);
            v = a | b;
            break;
          case 7:
            if (alt) fault("illegal instruction", pc, w);
            v = a & b;
            break;
          default: fault("illegal instruction", pc, w);
        }
      } else {
        fault("illegal instruction", pc, w);
      }
      set_reg(rd, v);
      break;
    }
    case 0x0F: {  // FENCE / FENCE.I, both no-ops here
      if (f3 > 1) fault("illegal instruction", pc, w);
      cls = OpClass::Fence;
      break;
    }
    case 0x73: {  // SYSTEM
      if (f3 == 0) {
        uint32_t imm12 = w >> 20;
        if (rd != 0 || rs1 != 0 || (imm12 != 0 && imm12 != 1))
          fault("illegal instruction", pc, w);
        if (imm12 == 1) fault("ebreak", pc, w);
        // ECALL: syscall number in a7 (x17); t0 (x5) under RV32E where a7
        // does not exist
        unsigned sysreg = config_.extension == Extension::RV32E ? 5u : 17u;
        uint32_t num = regs_[sysreg];
        if (num == 93) {
          halted_ = true;
          exit_code_ = int(regs_[10]);
        } else if (num == 64) {
          uint32_t buf = regs_[11], len = regs_[12];
          for (uint32_t i = 0; i < len; ++i) {
            char c = char(load8(buf + i));
            console_buffer_.push_back(c);
            if (console_) console_->put(c);
          }
          if (console_) console_->flush();
          set_reg(10, len);
        } else {
          fault("unsupported syscall " + std::to_string(num), pc, w);
        }
        cls = OpClass::System;
      } else {
        uint32_t csr = w >> 20;
        bool is_imm = (f3 & 4u) != 0;
        unsigned op = f3 & 3u;
        if (op == 0) fault("illegal instruction", pc, w);
        require_reg(rd, pc, w);
        if (!is_imm) {
          require_reg(rs1, pc, w);
          uses_rs1 = true;
        }
        uint32_t src = is_imm ? rs1 : regs_[rs1];
        bool do_write = op == 1 || rs1 != 0;
        bool do_read = op != 1 || rd != 0;
        uint32_t old = do_read ? csr_read_checked(csr, pc, w) : 0u;
        if (do_write) {
          uint32_t nv = op == 1 ? src : op == 2 ? (old | src) : (old & ~src);
          csr_write_checked(csr, nv, pc, w);
        }
        if (do_read) set_reg(rd, old);
        cls = OpClass::Csr;
      }
      break;
    }
    default:
      fault("illegal instruction", pc, w);
  }

  bool load_use = pending_load_rd_ != 0 &&
                  ((uses_rs1 && rs1 == pending_load_rd_) ||
                   (uses_rs2 && rs2 == pending_load_rd_));

  unsigned cycles = 1 + (latency - 1);
  if (config_.pipeline == PipelineModel::ThreeStage) {
    if (load_use) {
      cycles += config_.load_use_penalty;
      hazard_stalls_ += config_.load_use_penalty;
    }
    if (flush) {
      cycles += config_.branch_flush_penalty;
      flush_cycles_ += config_.branch_flush_penalty;
    }
  }

  if (trace_sink_) {
    TraceEvent ev;
    ev.index = instret_;
    ev.pc = pc;
    ev.cls = cls;
    ev.has_unit = has_unit;
    ev.unit = unit;
    ev.slot = uint8_t(slot);
    ev.level = uint8_t(level);
    ev.cycles = uint8_t(cycles);
    trace_sink_->push_back(ev);
  }

  pending_load_rd_ = is_load ? unsigned(rd) : 0u;
  regs_[0] = 0;
  pc_ = next_pc;
  instret_ += 1;
  cycle_ += cycles;
}

RunReport Machine::run(uint64_t max_steps) {
  uint64_t executed = 0;
  while (!halted_ && executed < max_steps) {
    step();
    ++executed;
  }
  RunReport r;
  r.stop = halted_ ? StopReason::GuestExit : StopReason::MaxSteps;
  r.exit_code = exit_code_;
  r.instret = instret_;
  r.cycle = cycle_;
  r.hazard_stalls = hazard_stalls_;
  r.flush_cycles = flush_cycles_;
  return r;
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const TraceEvent& ev : events) {
    nlohmann::json j;
    j["instr_index"] = ev.index;
    j["pc"] = ev.pc;
    j["class"] = op_class_name(ev.cls);
    if (ev.has_unit) j["unit"] = unit_name(ev.unit);
    j["slot"] = ev.slot;
    j["level"] = ev.level;
    j["cycles"] = ev.cycles;
    out << j.dump() << '\n';
  }
}

std::vector<TraceEvent> read_trace_jsonl(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    TraceEvent ev;
    ev.index = j.value("instr_index", uint64_t(0));
    ev.pc = j.value("pc", uint32_t(0));
    std::string cls = j.value("class", "alu");
    for (OpClass c : {OpClass::Alu, OpClass::Load, OpClass::Store,
                      OpClass::Branch, OpClass::Jump, OpClass::Mul,
                      OpClass::Div, OpClass::Csr, OpClass::System,
                      OpClass::Fence}) {
      if (cls == op_class_name(c)) { ev.cls = c; break; }
    }
    if (j.contains("unit")) {
      ev.has_unit = true;
      std::string u = j["unit"];
      if (u == "adder") ev.unit = UnitKind::Adder;
      else if (u == "multiplier") ev.unit = UnitKind::Multiplier;
      else if (u == "divider") ev.unit = UnitKind::Divider;
      else throw ConfigError("trace line " + std::to_string(lineno) +
                             ": unknown unit '" + u + "'");
    }
    ev.slot = uint8_t(j.value("slot", 0));
    ev.level = uint8_t(j.value("level", 0));
    ev.cycles = uint8_t(j.value("cycles", 1));
    events.push_back(ev);
  }
  return events;
}

}  // namespace axrv
