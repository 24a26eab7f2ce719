#pragma once

#include <stdexcept>
#include <string>

namespace fdlpv {

enum class ErrorKind {
    InvalidArgument,
    Parse,
    GridMismatch,
    OutOfRange,
    Io,
    Excitation,       // zero auto-spectrum / sensitivity magnitude below threshold
    Unstable,         // controller or factor fails a stability requirement
    Bezout,
    Infeasible,
    SolverFailure,
    Numerical,
    Config,
    Degenerate,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library. The kind decides how the CLI maps the
// failure to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition)
        throw Error(kind, what);
}

} // namespace fdlpv
