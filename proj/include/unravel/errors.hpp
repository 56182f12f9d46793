#pragma once

#include <stdexcept>
#include <string>

namespace unravel {

/// The requested quantity is undefined for these parameters (e.g. a pure
/// stationary state at omega = 0).
class DegenerateError : public std::domain_error {
public:
  explicit DegenerateError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure failed to converge or to meet its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace unravel
