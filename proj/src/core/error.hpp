#pragma once
// Error type shared across the engine. Every failure carries a stable code
// (mirrored one-to-one by the C API status values) plus a human message.

#include <stdexcept>
#include <string>

namespace migtf {

enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    io = 2,
    parse = 3,
    state = 4,
    shape = 5,
    not_found = 6,
    numeric = 7,
    internal = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ok: return "ok";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io: return "io";
        case ErrorCode::parse: return "parse";
        case ErrorCode::state: return "state";
        case ErrorCode::shape: return "shape";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::numeric: return "numeric";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

}  // namespace migtf
