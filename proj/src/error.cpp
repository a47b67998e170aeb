#include "afford/error.hpp"

namespace afford {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownEntityName: return "UnknownEntityName";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::TruncatedGroup: return "TruncatedGroup";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyHoldout: return "EmptyHoldout";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingEntitySamples: return "MissingEntitySamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::LayerMismatch: return "LayerMismatch";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::FlatCloud: return "FlatCloud";
    case ErrorCode::BadBinCount: return "BadBinCount";
    case ErrorCode::NoFeasibleRegion: return "NoFeasibleRegion";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownEntityName:
    case ErrorCode::MissingFile:
    case ErrorCode::TruncatedGroup:
    case ErrorCode::IoError:
    case ErrorCode::ClassTooSmall:
    case ErrorCode::EmptyHoldout:
    case ErrorCode::NoLabels:
    case ErrorCode::EmptyInput:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace afford
