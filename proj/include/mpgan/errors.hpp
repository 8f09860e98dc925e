#pragma once

#include <stdexcept>
#include <string>

namespace mpgan {

// Base error with a coarse kind used by the CLI to pick exit codes:
// config -> 2, data -> 3, numeric -> 4.
struct Error : std::runtime_error {
  enum class Kind { config, data, numeric };
  Kind kind;
  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(Kind::config, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(Kind::data, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(Kind::numeric, m) {}
};

struct FormatError : DataError {
  explicit FormatError(const std::string& m) : DataError("format: " + m) {}
};
struct DimensionMismatch : DataError {
  explicit DimensionMismatch(const std::string& m) : DataError("dimension mismatch: " + m) {}
};
struct MissingClass : DataError {
  explicit MissingClass(const std::string& m) : DataError("missing class: " + m) {}
};
struct InvalidSpec : DataError {
  explicit InvalidSpec(const std::string& m) : DataError("invalid spec: " + m) {}
};
struct EmptyDocument : DataError {
  explicit EmptyDocument(const std::string& m) : DataError("empty document: " + m) {}
};
struct RankError : DataError {
  explicit RankError(const std::string& m) : DataError("rank: " + m) {}
};
struct LabelOutOfRange : DataError {
  explicit LabelOutOfRange(const std::string& m) : DataError("label out of range: " + m) {}
};
struct NonScalarOutput : DataError {
  explicit NonScalarOutput(const std::string& m) : DataError("non-scalar output: " + m) {}
};
struct MissingPivot : DataError {
  explicit MissingPivot(const std::string& m) : DataError("missing pivot: " + m) {}
};
struct BatchMismatch : DataError {
  explicit BatchMismatch(const std::string& m) : DataError("batch mismatch: " + m) {}
};
struct NeedsTwoClasses : DataError {
  explicit NeedsTwoClasses(const std::string& m) : DataError("needs two classes: " + m) {}
};
struct MissingClassSamples : DataError {
  explicit MissingClassSamples(const std::string& m) : DataError("missing class samples: " + m) {}
};
struct PatchCountMismatch : DataError {
  explicit PatchCountMismatch(const std::string& m) : DataError("patch count mismatch: " + m) {}
};
struct EmptyClass : DataError {
  explicit EmptyClass(const std::string& m) : DataError("empty class: " + m) {}
};
struct UnknownFraction : DataError {
  explicit UnknownFraction(const std::string& m) : DataError("unknown fraction: " + m) {}
};
struct MissingCheckpoint : DataError {
  explicit MissingCheckpoint(const std::string& m) : DataError("missing checkpoint: " + m) {}
};
struct NonFiniteLoss : NumericError {
  explicit NonFiniteLoss(const std::string& m) : NumericError("non-finite loss: " + m) {}
};

}  // namespace mpgan
