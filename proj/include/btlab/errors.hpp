#pragma once

#include <stdexcept>
#include <string>

namespace btlab {

struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IncompatibleGridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedOracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleLpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedBenchmarkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised on malformed instance or config files; carries a 1-based text position.
struct InstanceParseError : std::runtime_error {
    InstanceParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
    int line = 0;
    int column = 0;
};

}  // namespace btlab
