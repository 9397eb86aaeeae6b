#pragma once

#include <stdexcept>
#include <string>

namespace vvq {

// Malformed or out-of-domain input: unreadable files, invalid shapes,
// arguments outside their documented range.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Valid input that nevertheless defeats the numerics: failed convergence,
// overflow, degenerate posteriors.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Process exit codes used by the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

}  // namespace vvq
