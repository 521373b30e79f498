#pragma once

#include <stdexcept>
#include <string>

namespace actrec {

// Error taxonomy used across the library. Everything derives from Error so
// callers can catch broadly; the concrete type says what went wrong.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };   // tensor/layer extent mismatch
struct ParamError : Error { using Error::Error; };   // invalid argument value
struct ParseError : Error { using Error::Error; };   // malformed input file
struct LabelError : Error { using Error::Error; };   // unknown class or index out of range
struct CorpusError : Error { using Error::Error; };  // unusable dataset tree
struct ConfigError : Error { using Error::Error; };  // infeasible run configuration
struct StateError : Error { using Error::Error; };   // API misuse (e.g. backward in inference mode)
struct OptimError : Error { using Error::Error; };   // optimizer rejected a step
struct IoError : Error { using Error::Error; };      // filesystem / stream failure

// Non-fatal diagnostics (clamped values, fallbacks, degenerate partitions).
// Default handler writes "warning: ..." to stderr; tests may install their own.
using WarnHandler = void (*)(const std::string&);
void warn(const std::string& message);
WarnHandler set_warn_handler(WarnHandler handler);  // returns the previous handler

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace actrec
