#pragma once

#include <stdexcept>
#include <string>

namespace twigner {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TWIGNER_DEFINE_ERROR(Name)       \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// Ordering and algebra.
TWIGNER_DEFINE_ERROR(DuplicateTime);
TWIGNER_DEFINE_ERROR(MissingBranchTag);
TWIGNER_DEFINE_ERROR(SizeLimit);
TWIGNER_DEFINE_ERROR(ParseError);

// Kernels.
TWIGNER_DEFINE_ERROR(KindMismatch);
TWIGNER_DEFINE_ERROR(EqualRank);

// Exact oracle.
TWIGNER_DEFINE_ERROR(DimensionLimit);
TWIGNER_DEFINE_ERROR(OrderViolation);

// Phase-space engine.
TWIGNER_DEFINE_ERROR(UnsupportedState);
TWIGNER_DEFINE_ERROR(StepMismatch);
TWIGNER_DEFINE_ERROR(TimeOffGrid);
TWIGNER_DEFINE_ERROR(EqualTime);

#undef TWIGNER_DEFINE_ERROR

/// Configuration error carrying the offending field path, e.g. `requests[2].factors[0].time`.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace twigner
