#pragma once

#include <stdexcept>
#include <string>

namespace peerpredict {

enum class ErrorKind {
  OutOfRange,
  NotPositivelyCorrelated,
  InvalidModel,
  DegenerateModel,
  NotStrict,
  DegenerateMatrix,
  InfeasibleTangents,
  OutsideHull,
  TruthNotEquilibrium,
  Boundary,
  MirrorRequired,
  SymmetricPrior,
  EpsilonMissing,
  IndexOutOfRange,
  NeverFocal,
};

inline const char* error_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotPositivelyCorrelated: return "NotPositivelyCorrelated";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::DegenerateModel: return "DegenerateModel";
    case ErrorKind::NotStrict: return "NotStrict";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::InfeasibleTangents: return "InfeasibleTangents";
    case ErrorKind::OutsideHull: return "OutsideHull";
    case ErrorKind::TruthNotEquilibrium: return "TruthNotEquilibrium";
    case ErrorKind::Boundary: return "Boundary";
    case ErrorKind::MirrorRequired: return "MirrorRequired";
    case ErrorKind::SymmetricPrior: return "SymmetricPrior";
    case ErrorKind::EpsilonMissing: return "EpsilonMissing";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NeverFocal: return "NeverFocal";
  }
  return "Unknown";
}

// Domain error; what() starts with the error name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace peerpredict
