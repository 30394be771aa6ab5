#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "axrv/machine.hpp"

namespace axrv {

/// Load a little-endian ELF32 RISC-V executable: PT_LOAD segments are copied
/// to their p_vaddr, zero-filled up to p_memsz, pc set to e_entry. Throws
/// LoadError with a specific reason (not an ELF, wrong class, wrong machine,
/// segment outside RAM, truncated image).
void load_elf(Machine& m, const std::string& path);

/// Load a raw binary at `entry` and set pc there.
void load_flat(Machine& m, const std::string& path, uint32_t entry = 0);

/// Auto-detect by the ELF magic; flat images go to `flat_entry`.
void load_program(Machine& m, const std::string& path, uint32_t flat_entry = 0);

/// Initial stack pointer used by the loaders (top of RAM minus 16).
uint32_t initial_sp(const CoreConfig& config);

}  // namespace axrv
