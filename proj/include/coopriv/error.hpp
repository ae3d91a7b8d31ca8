#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coopriv {

/// Base class for all library errors. `code()` is a stable machine-readable
/// identifier used by the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& message) : Error("invalid-parameter", message) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse-error", "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InconsistentVehicle : public Error {
 public:
  InconsistentVehicle(std::string vehicle_id, const std::string& message)
      : Error("inconsistent-vehicle", message), vehicle_id_(std::move(vehicle_id)) {}
  const std::string& vehicle_id() const noexcept { return vehicle_id_; }

 private:
  std::string vehicle_id_;
};

class DegenerateScenario : public Error {
 public:
  explicit DegenerateScenario(const std::string& message) : Error("degenerate-scenario", message) {}
};

class InfeasibleConfig : public Error {
 public:
  InfeasibleConfig(std::string constraint, const std::string& message)
      : Error("infeasible-config", constraint + ": " + message), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class NoOpenSlot : public Error {
 public:
  explicit NoOpenSlot(const std::string& message) : Error("no-open-slot", message) {}
};

}  // namespace coopriv
