#pragma once

#include <stdexcept>
#include <string>

namespace stsexo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class SingularityError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class CouplingInfeasible : public Error { using Error::Error; };
class SlackWireError : public Error { using Error::Error; };
class StrokeError : public Error { using Error::Error; };
class DivisionGuard : public Error { using Error::Error; };
class NoFeasibleActuator : public Error { using Error::Error; };

/// The transition cannot be completed; `angle()` is the knee angle (rad)
/// where the actuator and the load crossed.
class StallError : public Error {
public:
  StallError(const std::string& what, double knee_angle)
      : Error(what), angle_(knee_angle) {}
  [[nodiscard]] double angle() const noexcept { return angle_; }

private:
  double angle_;
};

/// Raised by the optimizer when no candidate satisfied the constraints.
class NoFeasibleDesign : public Error {
public:
  NoFeasibleDesign(const std::string& what, double best_violation)
      : Error(what), best_violation_(best_violation) {}
  [[nodiscard]] double best_violation() const noexcept { return best_violation_; }

private:
  double best_violation_;
};

/// Malformed text input; `line()` is 1-based.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace stsexo
