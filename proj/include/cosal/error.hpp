#pragma once

#include <stdexcept>
#include <string>

namespace cosal {

enum class ErrorKind {
  Io,
  Format,
  InvalidArg,
  DimMismatch,
  EmptyRegion,
  SolveFailure,
  DegenerateSeeds,
  InvalidData,
  EmptyGroundTruth,
};

const char* kindName(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kindName(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* kindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::InvalidArg: return "InvalidArg";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::DegenerateSeeds: return "DegenerateSeeds";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
  }
  return "Error";
}

}  // namespace cosal
