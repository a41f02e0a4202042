#pragma once

#include <stdexcept>
#include <string>

namespace xspec {

// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind {
    invalid_argument,
    shape_mismatch,
    io,
    format,
    config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace xspec
