#pragma once

#include <stdexcept>
#include <string>

namespace hermcurv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed DSL text; pos is a 0-based offset into the source.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

// Input violates a documented precondition (domain, class, sign of a degree).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Iterative method failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A quantity that must be real/symmetric/bounded is not, beyond tolerance.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace hermcurv
