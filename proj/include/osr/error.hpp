#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace osr {

// Single exception type for the whole library. The kind makes failure
// classes testable without string matching.
class Error : public std::runtime_error {
public:
    enum class Kind {
        io,         // unreadable/unwritable file
        format,     // malformed or unsupported file contents
        dimension,  // size/shape mismatch between arguments
        argument,   // invalid parameter value
        model       // bad model file (magic, version, truncation)
    };

    Error(Kind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind kind, const std::string& msg) {
    throw Error(kind, msg);
}

inline void require(bool cond, Error::Kind kind, const std::string& msg) {
    if (!cond) fail(kind, msg);
}

}  // namespace osr
