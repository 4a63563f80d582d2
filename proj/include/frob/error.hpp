#pragma once

#include <stdexcept>
#include <string>

namespace frob {

enum class ErrorKind {
  InvalidParameter,
  InvalidModel,
  InvalidData,
  NotTame,
  DegenerateFrame,
  DegeneratePotential,
  DegenerateWeight,
  PoleProximity,
  MonitorBreach,
  StepUnderflow,
  NonInvertible,
  ParityError,
  OrderError,
  ParseError,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace frob
