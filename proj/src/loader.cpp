#include "axrv/loader.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace axrv {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

uint16_t rd16(const std::vector<uint8_t>& b, size_t off) {
  return uint16_t(b[off]) | uint16_t(b[off + 1]) << 8;
}

uint32_t rd32(const std::vector<uint8_t>& b, size_t off) {
  return uint32_t(b[off]) | uint32_t(b[off + 1]) << 8 |
         uint32_t(b[off + 2]) << 16 | uint32_t(b[off + 3]) << 24;
}

constexpr uint16_t kMachineRiscV = 243;

void place(Machine& m, uint32_t vaddr, const uint8_t* data, uint32_t filesz,
           uint32_t memsz) {
  const CoreConfig& cfg = m.config();
  uint64_t start = uint64_t(vaddr) - cfg.memory_base;
  if (vaddr < cfg.memory_base || start + memsz > m.memory().size()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%08x size=%u", vaddr, memsz);
    throw LoadError(std::string("segment outside RAM: vaddr=") + buf);
  }
  if (filesz) std::memcpy(m.memory().data() + start, data, filesz);
  if (memsz > filesz)
    std::memset(m.memory().data() + start + filesz, 0, memsz - filesz);
}

}  // namespace

uint32_t initial_sp(const CoreConfig& config) {
  return config.memory_base + config.memory_size - 16;
}

void load_elf(Machine& m, const std::string& path) {
  std::vector<uint8_t> b = read_file(path);
  if (b.size() < 52 || b[0] != 0x7F || b[1] != 'E' || b[2] != 'L' || b[3] != 'F')
    throw LoadError("not an ELF file: " + path);
  if (b[4] != 1) throw LoadError("wrong ELF class (need 32-bit): " + path);
  if (b[5] != 1) throw LoadError("big-endian ELF not supported: " + path);
  if (rd16(b, 16) != 2) throw LoadError("not an executable ELF (e_type): " + path);
  if (rd16(b, 18) != kMachineRiscV)
    throw LoadError("wrong machine type (need RISC-V): " + path);

  uint32_t phoff = rd32(b, 28);
  uint16_t phentsize = rd16(b, 42);
  uint16_t phnum = rd16(b, 44);
  if (phentsize < 32)
    throw LoadError("malformed ELF: bad program header size: " + path);

  for (uint16_t i = 0; i < phnum; ++i) {
    uint64_t off = uint64_t(phoff) + uint64_t(i) * phentsize;
    if (off + 32 > b.size())
      throw LoadError("malformed ELF: truncated program headers: " + path);
    uint32_t p_type = rd32(b, off);
    if (p_type != 1) continue;  // PT_LOAD
    uint32_t p_offset = rd32(b, off + 4);
    uint32_t p_vaddr = rd32(b, off + 8);
    uint32_t p_filesz = rd32(b, off + 16);
    uint32_t p_memsz = rd32(b, off + 20);
    if (p_filesz > p_memsz)
      throw LoadError("malformed ELF: filesz > memsz: " + path);
    if (uint64_t(p_offset) + p_filesz > b.size())
      throw LoadError("malformed ELF: segment data truncated: " + path);
    place(m, p_vaddr, b.data() + p_offset, p_filesz, p_memsz);
  }

  m.set_pc(rd32(b, 24));
  m.set_reg(2, initial_sp(m.config()));
}

void load_flat(Machine& m, const std::string& path, uint32_t entry) {
  std::vector<uint8_t> b = read_file(path);
  const CoreConfig& cfg = m.config();
  uint64_t off = uint64_t(entry) - cfg.memory_base;
  if (entry < cfg.memory_base || off + b.size() > m.memory().size())
    throw LoadError("flat image too large for RAM (" +
                    std::to_string(b.size()) + " bytes): " + path);
  place(m, entry, b.data(), uint32_t(b.size()), uint32_t(b.size()));
  m.set_pc(entry);
  m.set_reg(2, initial_sp(m.config()));
}

void load_program(Machine& m, const std::string& path, uint32_t flat_entry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  bool is_elf = in.gcount() == 4 && magic[0] == 0x7F && magic[1] == 'E' &&
                magic[2] == 'L' && magic[3] == 'F';
  in.close();
  if (is_elf) {
    load_elf(m, path);
  } else {
    load_flat(m, path, flat_entry);
  }
}

}  // namespace axrv
