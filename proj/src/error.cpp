#include "isoshell/error.hpp"

namespace isoshell {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptySurface: return "EmptySurface";
        case ErrorKind::NonManifold: return "NonManifold";
        case ErrorKind::UnderResolved: return "UnderResolved";
        case ErrorKind::WeldFailure: return "WeldFailure";
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::DegenerateElement: return "DegenerateElement";
        case ErrorKind::UntaggedBoundary: return "UntaggedBoundary";
        case ErrorKind::ConflictingConstraint: return "ConflictingConstraint";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::ConsistencyFailure: return "ConsistencyFailure";
        case ErrorKind::DegenerateConstants: return "DegenerateConstants";
        case ErrorKind::UnstableTensor: return "UnstableTensor";
        case ErrorKind::MissingEnergySplit: return "MissingEnergySplit";
        case ErrorKind::MissingDomainMap: return "MissingDomainMap";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::SelfIntersection: return "SelfIntersection";
        case ErrorKind::OpenBoundary: return "OpenBoundary";
        case ErrorKind::IsolatedVertex: return "IsolatedVertex";
        case ErrorKind::NotWatertight: return "NotWatertight";
        case ErrorKind::InconsistentStiffness: return "InconsistentStiffness";
        case ErrorKind::InsufficientRange: return "InsufficientRange";
        case ErrorKind::ZeroStress: return "ZeroStress";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace isoshell
