#pragma once

#include <stdexcept>
#include <string>

namespace blindid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BLINDID_ERROR(Name)              \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  };

BLINDID_ERROR(InvalidArgument)
BLINDID_ERROR(DimensionMismatch)
BLINDID_ERROR(InfeasibleDimensions)
BLINDID_ERROR(ZeroColumn)
BLINDID_ERROR(PartitionMismatch)
BLINDID_ERROR(EnumerationTooLarge)
BLINDID_ERROR(BadSupportSizes)
BLINDID_ERROR(ZeroReference)
BLINDID_ERROR(PreconditionViolated)
BLINDID_ERROR(NotPartitioned)
BLINDID_ERROR(SampleComplexityTooHigh)
BLINDID_ERROR(DegenerateNullspace)
BLINDID_ERROR(OperatorTooLarge)

#undef BLINDID_ERROR

/// A sub-band column whose passband is empty.
class EmptyPassband : public Error {
 public:
  EmptyPassband(const std::string& what, long column)
      : Error(what), column_(column) {}
  long column() const { return column_; }

 private:
  long column_;
};

/// Malformed input file; carries the source name and 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

}  // namespace blindid
