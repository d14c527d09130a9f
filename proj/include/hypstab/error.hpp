#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hypstab {

enum class ErrorKind {
  InvalidArgument,
  StepTooLarge,
  NotInJ,
  CompatibilityViolation,
  BoxEvaluationFailure,
  NoConvergence,
  CoefficientSignLoss,
  WorkingBoxExit,
  NonpositiveDepth,
  DepthCollapse,
  NotSubcritical,
  NewtonFailure,
  MissingTrace,
  InvalidTree,
  CouplingResidualExceeded,
  CFLViolation,
  BoxExit,
  ScenarioError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Network solves tag failures with the edge being solved.
  std::optional<int> edge() const noexcept { return edge_; }
  Error with_edge(int edge) const {
    Error tagged(kind_, std::string(what()) + " [edge " + std::to_string(edge) + "]", 0);
    tagged.edge_ = edge;
    tagged.iterations_ = iterations_;
    tagged.last_residual_ = last_residual_;
    return tagged;
  }

  // Populated for NoConvergence.
  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

  static Error no_convergence(std::size_t iterations, double last_residual) {
    Error e(ErrorKind::NoConvergence, "Picard iteration stalled after " +
                                          std::to_string(iterations) +
                                          " iterations, last residual " +
                                          std::to_string(last_residual));
    e.iterations_ = iterations;
    e.last_residual_ = last_residual;
    return e;
  }

 private:
  // Raw-message constructor used when re-tagging.
  Error(ErrorKind kind, const std::string& full, int) : std::runtime_error(full), kind_(kind) {}

  ErrorKind kind_;
  std::optional<int> edge_;
  std::size_t iterations_ = 0;
  double last_residual_ = 0.0;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::NotInJ: return "NotInJ";
    case ErrorKind::CompatibilityViolation: return "CompatibilityViolation";
    case ErrorKind::BoxEvaluationFailure: return "BoxEvaluationFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CoefficientSignLoss: return "CoefficientSignLoss";
    case ErrorKind::WorkingBoxExit: return "WorkingBoxExit";
    case ErrorKind::NonpositiveDepth: return "NonpositiveDepth";
    case ErrorKind::DepthCollapse: return "DepthCollapse";
    case ErrorKind::NotSubcritical: return "NotSubcritical";
    case ErrorKind::NewtonFailure: return "NewtonFailure";
    case ErrorKind::MissingTrace: return "MissingTrace";
    case ErrorKind::InvalidTree: return "InvalidTree";
    case ErrorKind::CouplingResidualExceeded: return "CouplingResidualExceeded";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::BoxExit: return "BoxExit";
    case ErrorKind::ScenarioError: return "ScenarioError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hypstab
