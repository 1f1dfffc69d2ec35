#pragma once

#include <stdexcept>
#include <string>

namespace kmsgraph {

// Error categories map onto CLI exit codes.
enum class ErrorKind { schema, precondition, undetermined, internal, resource };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

const char* kind_name(ErrorKind kind);

}  // namespace kmsgraph
