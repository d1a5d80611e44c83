#pragma once

#include <stdexcept>
#include <string>

namespace alma {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (dimension mismatch,
/// negative tolerance, ...).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// A function was evaluated outside its mathematical domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A network description is not a radial tree or has invalid parameters.
class ModelError : public Error {
  public:
    using Error::Error;
};

/// Malformed constraint, topology or scenario file.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// An iterative solver produced a non-finite iterate. Solvers derive a
/// trace-carrying subclass.
class DivergedError : public Error {
  public:
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw UsageError(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw UsageError(msg);
}

}  // namespace detail

}  // namespace alma
