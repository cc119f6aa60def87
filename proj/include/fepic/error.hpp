#pragma once

#include <stdexcept>
#include <string>

namespace fepic {

enum class ErrorKind {
  InvalidConfig,
  DegenerateCell,
  LocateCycle,
  StaleCellIndex,
  NoConvergence,
  InvalidEmission,
  OverBarrier,
  OrphanFace,
  CoincidentPoints,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the last residual so callers can report how far the solve got.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::NoConvergence, what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::LocateCycle: return "LocateCycle";
    case ErrorKind::StaleCellIndex: return "StaleCellIndex";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidEmission: return "InvalidEmission";
    case ErrorKind::OverBarrier: return "OverBarrier";
    case ErrorKind::OrphanFace: return "OrphanFace";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace fepic
