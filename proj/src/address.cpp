#include <sstream>

#include "rcl/error.hpp"

namespace rcl {

namespace {

std::string with_line(std::size_t line, const std::string& what) {
  if (line == 0) return what;
  std::ostringstream os;
  os << "line " << line << ": " << what;
  return os.str();
}

std::string fault_message(Addr va) {
  std::ostringstream os;
  os << "unmapped virtual address 0x" << std::hex << va;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : Error(with_line(line, what)), line_(line) {}

TraceError::TraceError(std::size_t line, const std::string& what)
    : Error(with_line(line, what)), line_(line) {}

TranslationFault::TranslationFault(Addr va) : Error(fault_message(va)), va_(va) {}

}  // namespace rcl
