#pragma once

#include <stdexcept>
#include <string>

namespace shred {

enum class ErrorKind { Config, Data, Numeric, Io };

/// Base exception for every failure raised by the library. The kind decides
/// the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what)
{
    if (!ok) throw Error(kind, what);
}

} // namespace shred
