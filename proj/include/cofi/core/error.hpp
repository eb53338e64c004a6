#pragma once

#include <stdexcept>
#include <string>

namespace cofi {

/// Base of every error raised by the library. Subclasses split user-facing
/// failures (bad input, bad configuration) from broken internal invariants.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (missing perturbation entry,
/// missing StaR Map layer, invalid filter parameters, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input file or text that does not follow the expected format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Syntax error in constitution source, carrying a 1-based position.
class ParseError : public FormatError {
public:
    ParseError(const std::string& msg, int line, int column)
        : FormatError(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Query outside the region covered by a raster.
class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

/// A relation that cannot be evaluated (e.g. depth without soundings).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Programs the grounder refuses: cycles, unsorted variables, ...
class UnsupportedProgramError : public Error {
public:
    using Error::Error;
};

/// Too many probabilistic atoms for exhaustive model enumeration.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// All particle weight vanished during an update.
class DegenerateUpdateError : public Error {
public:
    using Error::Error;
};

/// A simulated agent could not find an acceptable move.
class StuckAgentError : public Error {
public:
    using Error::Error;
};

/// Internal consistency check failed; indicates a bug rather than bad input.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace cofi
