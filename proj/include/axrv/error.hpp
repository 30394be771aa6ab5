#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace axrv {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Guest execution fault: illegal instruction, misaligned or out-of-bounds
/// access, unpopulated circuit slot, unsupported syscall. Terminates the run;
/// there is no trap emulation.
struct SimFault : Error {
  SimFault(const std::string& msg, uint32_t fault_pc, uint32_t fault_word = 0)
      : Error(msg), pc(fault_pc), word(fault_word) {}
  uint32_t pc;
  uint32_t word;
};

/// Program image could not be loaded (bad ELF, segment out of RAM, I/O).
struct LoadError : Error {
  using Error::Error;
};

/// Bad configuration: registry misuse, malformed cost table, bad image, ...
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace axrv
