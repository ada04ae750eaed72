#pragma once

#include <stdexcept>
#include <string>

namespace metgeo {

// Base class for all errors raised by the library.  The CLI maps these to
// exit code 2 (bad input / infeasible request); optimizer non-convergence
// beyond the budget is reported separately with exit code 3.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A base-point tensor that must be SPD is degenerate (eigenvalue <= eps_pd).
struct DegenerateBaseError : Error {
  explicit DegenerateBaseError(const std::string& msg) : Error(msg) {}
};

// A discrete path violates its admissibility contract (degenerate node with
// nonzero local difference, too few nodes, mismatched endpoints, ...).
struct InvalidPathError : Error {
  explicit InvalidPathError(const std::string& msg) : Error(msg) {}
};

// Two fields that must live on the same grid do not.
struct DomainMismatchError : Error {
  explicit DomainMismatchError(const std::string& msg) : Error(msg) {}
};

// A scalar argument lies outside the admissible domain of a map
// (e.g. psi_map below -4/n), or an enum/size argument is unsupported.
struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

// Field file / manifest parse or write failure.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace metgeo
