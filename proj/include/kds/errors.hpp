#pragma once

#include <stdexcept>
#include <string>

namespace kds {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorKind {
    Config,          // invalid configuration or input data (exit 2)
    Backend,         // backend unreachable / malformed reply (exit 3)
    MissingArtifact, // a stage ran before its prerequisite (exit 4)
    Io,              // storage / filesystem failure (exit 1)
};

class KdsError : public std::runtime_error {
public:
    KdsError(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Config: return 2;
            case ErrorKind::Backend: return 3;
            case ErrorKind::MissingArtifact: return 4;
            case ErrorKind::Io: return 1;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(std::string msg) {
    throw KdsError(ErrorKind::Config, std::move(msg));
}
[[noreturn]] inline void throw_backend(std::string msg) {
    throw KdsError(ErrorKind::Backend, std::move(msg));
}
[[noreturn]] inline void throw_missing_artifact(std::string msg) {
    throw KdsError(ErrorKind::MissingArtifact, std::move(msg));
}
[[noreturn]] inline void throw_io(std::string msg) {
    throw KdsError(ErrorKind::Io, std::move(msg));
}

} // namespace kds
