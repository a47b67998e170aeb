#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace afford {

enum class ErrorCode {
  // data / parse
  ParseError,
  UnknownEntityName,
  MissingFile,
  TruncatedGroup,
  IoError,
  ClassTooSmall,
  EmptyHoldout,
  NoLabels,
  EmptyInput,
  InvalidArgument,
  // model / numeric
  MissingEntitySamples,
  DimensionMismatch,
  NumericalUnderflow,
  MissingAttribute,
  EmptyTrainingSet,
  LayerMismatch,
  PathExplosion,
  InconsistentDimensions,
  FlatCloud,
  BadBinCount,
  NoFeasibleRegion,
  EmptyRegion,
};

std::string_view to_string(ErrorCode code);

// Data errors map to CLI exit code 2, model/numeric errors to exit code 3.
bool is_data_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace afford
