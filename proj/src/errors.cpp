#include "gridwave/errors.hpp"

namespace gridwave {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::InvalidCase: return "InvalidCase";
        case ErrorCode::SingularBranch: return "SingularBranch";
        case ErrorCode::UnknownBus: return "UnknownBus";
        case ErrorCode::ZeroVoltageBus: return "ZeroVoltageBus";
        case ErrorCode::SingularInterior: return "SingularInterior";
        case ErrorCode::SingularResBlock: return "SingularResBlock";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::NonPhysicalInit: return "NonPhysicalInit";
        case ErrorCode::InitInfeasible: return "InitInfeasible";
        case ErrorCode::InitResidualTooLarge: return "InitResidualTooLarge";
        case ErrorCode::NumericalBlowup: return "NumericalBlowup";
        case ErrorCode::NotAtEquilibrium: return "NotAtEquilibrium";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
        case ErrorCode::EmptyFilter: return "EmptyFilter";
        case ErrorCode::GridHitsPole: return "GridHitsPole";
        case ErrorCode::AmbiguousPhaseUnwrap: return "AmbiguousPhaseUnwrap";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace gridwave
