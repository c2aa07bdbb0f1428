#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace npdl {

struct SourcePos {
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& msg)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  int rule_index = -1;  // -1 when not rule-specific
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_errors(const Diagnostics& ds) {
  for (const auto& d : ds)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

inline Diagnostic error_at(int rule, std::string msg) {
  return Diagnostic{Diagnostic::Severity::Error, rule, std::move(msg)};
}

inline Diagnostic warning_at(int rule, std::string msg) {
  return Diagnostic{Diagnostic::Severity::Warning, rule, std::move(msg)};
}

}  // namespace npdl
