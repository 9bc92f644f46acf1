#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xcheck {

// Error categories surfaced by the engine. Every exception thrown by the
// library derives from xcheck::Error and carries one of these codes.
enum class ErrorCode {
  Malformed,             // graph text could not be parsed
  InvariantViolation,    // graph parsed but broke a structural rule
  EmptyGraph,            // a template was requested from an edgeless graph
  DanglingReference,     // annotations cite ids unknown to the graph
  DimMismatch,           // vectors of different lengths were compared
  ZeroVector,            // cosine of an all-zero vector
  InvalidBundle,         // feature bundle violates the file contract
  GraphBuildExhausted,   // LLM never produced a valid graph within budget
  ProviderUnavailable,   // transport/protocol failure talking to a service
  RefinementStagnant,    // LLM kept echoing the previous search string
  StoreUnavailable,      // evidence store could not be opened/written
  ManifestNotFound,
  EmptyCorpus,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidBundle: return "InvalidBundle";
    case ErrorCode::GraphBuildExhausted: return "GraphBuildExhausted";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::RefinementStagnant: return "RefinementStagnant";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
    case ErrorCode::ManifestNotFound: return "ManifestNotFound";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace xcheck
