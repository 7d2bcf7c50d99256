#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metafold {

enum class ErrorKind {
  Parse,
  EmptyStructure,
  InvalidStructure,
  EnsembleInconsistency,
  SingularConfiguration,
  InsufficientRegion,
  UndefinedFluctuation,
  AllFiltered,
  NoClusters,
  DegenerateTraining,
  UndefinedRate,
  Stratification,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library is a metafold::Error carrying a kind,
/// so callers (the CLI, batch ranking) can sort data errors from bugs.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

} // namespace metafold
