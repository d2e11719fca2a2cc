#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deltacharger {

enum class ErrorKind {
    InvalidArgument,
    Unreachable,
    JointLimit,
    NoIntersection,
    OutOfRange,
    ShapeMismatch,
    Degenerate,
    TaskMismatch,
    MalformedFile,
    IllegalTransition,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Unreachable: return "Unreachable";
        case ErrorKind::JointLimit: return "JointLimit";
        case ErrorKind::NoIntersection: return "NoIntersection";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::Degenerate: return "Degenerate";
        case ErrorKind::TaskMismatch: return "TaskMismatch";
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::IllegalTransition: return "IllegalTransition";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace deltacharger
