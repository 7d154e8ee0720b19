#include "qeihan/errors.hpp"

namespace qeihan {

const char* err_name(Err e) {
  switch (e) {
    case Err::ParseError: return "ParseError";
    case Err::ShapeError: return "ShapeError";
    case Err::MissingTensor: return "MissingTensor";
    case Err::DimsMismatch: return "DimsMismatch";
    case Err::NonFiniteValue: return "NonFiniteValue";
    case Err::EmptyDistribution: return "EmptyDistribution";
    case Err::ZeroOrSubnormal: return "ZeroOrSubnormal";
    case Err::SliceLengthMismatch: return "SliceLengthMismatch";
    case Err::UnknownGroup: return "UnknownGroup";
    case Err::CapacityExceeded: return "CapacityExceeded";
    case Err::Unpartitionable: return "Unpartitionable";
    case Err::UnknownTableId: return "UnknownTableId";
    case Err::EmptyHistogram: return "EmptyHistogram";
    case Err::MismatchedRuns: return "MismatchedRuns";
    case Err::BadConfig: return "BadConfig";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace qeihan
