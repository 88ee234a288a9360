#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "rcl/address.hpp"

namespace rcl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Malformed trace file.
class TraceError : public Error {
 public:
  TraceError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Page-map allocation request that cannot be satisfied.
class AllocationError : public Error {
 public:
  using Error::Error;
};

/// Access to an unmapped virtual page.
class TranslationFault : public Error {
 public:
  explicit TranslationFault(Addr va);
  Addr va() const { return va_; }

 private:
  Addr va_;
};

/// Broken caller contract, e.g. VA and PA disagreeing on the page offset.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Simulator state invariant broken (inclusion, stale index, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Fault raised while replaying a trace; carries the offending event index.
class SimulationFault : public Error {
 public:
  SimulationFault(std::size_t event, const std::string& what)
      : Error("event " + std::to_string(event) + ": " + what), event_(event) {}
  std::size_t event() const { return event_; }

 private:
  std::size_t event_;
};

}  // namespace rcl
