#include "metafold/error.hpp"

namespace metafold {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::EmptyStructure: return "empty structure";
    case ErrorKind::InvalidStructure: return "invalid structure";
    case ErrorKind::EnsembleInconsistency: return "ensemble inconsistency";
    case ErrorKind::SingularConfiguration: return "singular configuration";
    case ErrorKind::InsufficientRegion: return "insufficient region";
    case ErrorKind::UndefinedFluctuation: return "undefined fluctuation";
    case ErrorKind::AllFiltered: return "all members filtered";
    case ErrorKind::NoClusters: return "no clusters";
    case ErrorKind::DegenerateTraining: return "degenerate training data";
    case ErrorKind::UndefinedRate: return "undefined rate";
    case ErrorKind::Stratification: return "stratification error";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

} // namespace metafold
