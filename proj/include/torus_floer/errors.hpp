#pragma once

#include <stdexcept>
#include <string>

namespace floer {

enum class ErrorKind {
  Dimension,
  Degenerate,
  IntegrationQuality,
  Resolution,
  Truncation,
  SpectralGap,
  Stiffness,
  NoSolution,
  Undecided,
  Structural,
  Config,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries the module that detected it,
/// so the CLI can report a structured diagnostic and choose an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

/// Exit code convention of the command line tool:
/// 2 structural failure, 3 numerical-resolution failure, 4 configuration error.
int exit_code_for(ErrorKind kind);

}  // namespace floer
