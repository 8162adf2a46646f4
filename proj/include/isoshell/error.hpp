#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isoshell {

enum class ErrorKind {
    // geometry
    EmptySurface,
    NonManifold,
    UnderResolved,
    WeldFailure,
    MalformedFile,
    // shellfea
    DegenerateElement,
    UntaggedBoundary,
    ConflictingConstraint,
    SingularSystem,
    // homogenize
    ConsistencyFailure,
    DegenerateConstants,
    UnstableTensor,
    // optimize
    MissingEnergySplit,
    MissingDomainMap,
    NonConvergence,
    // thicken
    SelfIntersection,
    OpenBoundary,
    IsolatedVertex,
    NotWatertight,
    // postprocess
    InconsistentStiffness,
    InsufficientRange,
    ZeroStress,
    SchemaError,
    // general
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable kind next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace isoshell
