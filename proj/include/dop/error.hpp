// -*- mode: c++ -*-

#ifndef DOP_ERROR_HPP
#define DOP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dop
{
  enum class ErrorCode
  {
    UnbalancedParens,
    EmptyNode,
    ReservedLabel,
    IrreversibleScheme,
    ArityViolation,
    SubtreeCapExceeded,
    EnumerationCapExceeded,
    NoParse,
    ZeroLength,
    YieldMismatch,
    CorpusTooSmall,
    DegenerateVariance,
    EmptyCorpus,
    MalformedGrammar,
    Io,
    Usage,
  };

  inline std::string_view to_string(ErrorCode code)
  {
    switch (code) {
    case ErrorCode::UnbalancedParens:       return "UnbalancedParens";
    case ErrorCode::EmptyNode:              return "EmptyNode";
    case ErrorCode::ReservedLabel:          return "ReservedLabel";
    case ErrorCode::IrreversibleScheme:     return "IrreversibleScheme";
    case ErrorCode::ArityViolation:         return "ArityViolation";
    case ErrorCode::SubtreeCapExceeded:     return "SubtreeCapExceeded";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::NoParse:                return "NoParse";
    case ErrorCode::ZeroLength:             return "ZeroLength";
    case ErrorCode::YieldMismatch:          return "YieldMismatch";
    case ErrorCode::CorpusTooSmall:         return "CorpusTooSmall";
    case ErrorCode::DegenerateVariance:     return "DegenerateVariance";
    case ErrorCode::EmptyCorpus:            return "EmptyCorpus";
    case ErrorCode::MalformedGrammar:       return "MalformedGrammar";
    case ErrorCode::Io:                     return "Io";
    case ErrorCode::Usage:                  return "Usage";
    }
    return "Unknown";
  }

  // all library failures are reported through this one exception type;
  // callers dispatch on code()
  class Error : public std::runtime_error
  {
  public:
    Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
  };
}

#endif
