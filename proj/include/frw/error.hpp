#pragma once

#include <stdexcept>
#include <string>

namespace frw {

/// Bad arguments or malformed input data. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that could not produce a usable number. Maps to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The ML estimate does not exist for the (weighted) data.
class DegenerateError : public NumericalError {
  public:
    explicit DegenerateError(const std::string &reason)
        : NumericalError("degenerate data: " + reason), reason_(reason) {}
    const std::string &reason() const noexcept { return reason_; }

  private:
    std::string reason_;
};

/// Too many pathological bootstrap replicates under strict mode. Exit code 4.
class PathologyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace frw
