// Error kinds shared by all simulator components.
#pragma once

#include <stdexcept>
#include <string>

namespace qeihan {

enum class Err {
  ParseError,
  ShapeError,
  MissingTensor,
  DimsMismatch,
  NonFiniteValue,
  EmptyDistribution,
  ZeroOrSubnormal,
  SliceLengthMismatch,
  UnknownGroup,
  CapacityExceeded,
  Unpartitionable,
  UnknownTableId,
  EmptyHistogram,
  MismatchedRuns,
  BadConfig,
  IoError,
};

const char* err_name(Err e);

class SimError : public std::runtime_error {
 public:
  SimError(Err kind, const std::string& msg)
      : std::runtime_error(std::string(err_name(kind)) + ": " + msg), kind_(kind) {}

  Err kind() const { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& msg) { throw SimError(kind, msg); }

}  // namespace qeihan
