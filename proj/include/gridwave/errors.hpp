#pragma once

#include <stdexcept>
#include <string>

namespace gridwave {

/// Machine-readable failure categories. Every gridwave exception carries one
/// so callers (and the CLI) can map failures to exit codes and messages
/// without parsing strings.
enum class ErrorCode {
    // case loading / validation
    MissingFile,
    MalformedRow,
    DuplicateId,
    DanglingReference,
    InvalidCase,
    // network assembly
    SingularBranch,
    UnknownBus,
    ZeroVoltageBus,
    SingularInterior,
    SingularResBlock,
    // power flow
    Diverged,
    SingularJacobian,
    // device initialization
    NonPhysicalInit,
    InitInfeasible,
    // time-domain simulation
    InitResidualTooLarge,
    NumericalBlowup,
    // linearization / modal analysis
    NotAtEquilibrium,
    StepUnderflow,
    DefectiveMatrix,
    EmptyFilter,
    // frequency response
    GridHitsPole,
    AmbiguousPhaseUnwrap,
    // misc
    IoError,
};

const char* to_string(ErrorCode code);

/// Single exception type for all domain failures.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace gridwave
