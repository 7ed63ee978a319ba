#pragma once

#include <string>
#include <vector>

#include "panverif/ast.hpp"

namespace panverif {

struct Diagnostic {
  Span span;
  /// Stable machine-readable code, e.g. "unbound-var".
  std::string code;
  std::string message;

  friend bool operator==(const Diagnostic& a, const Diagnostic& b) {
    return same_location(a.span, b.span) && a.code == b.code && a.message == b.message;
  }
};

/// `file:line:col: error[code]: message`
std::string format(const Diagnostic& diagnostic);
std::string format(const std::vector<Diagnostic>& diagnostics);

}  // namespace panverif
