#pragma once

#include <stdexcept>
#include <string>

namespace funcdist {

// Error taxonomy mirrors the CLI exit codes: Validation -> 1,
// Estimation/Io -> 2, Tolerance -> 3.
enum class ErrorKind {
    Validation,
    Estimation,
    Tolerance,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Validation: return 1;
            case ErrorKind::Estimation: return 2;
            case ErrorKind::Tolerance:  return 3;
            case ErrorKind::Io:         return 2;
        }
        return 2;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
    throw Error(ErrorKind::Validation, msg);
}
[[noreturn]] inline void fail_estimation(const std::string& msg) {
    throw Error(ErrorKind::Estimation, msg);
}
[[noreturn]] inline void fail_tolerance(const std::string& msg) {
    throw Error(ErrorKind::Tolerance, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(ErrorKind::Io, msg);
}

}  // namespace funcdist
