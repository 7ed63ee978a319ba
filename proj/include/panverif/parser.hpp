#pragma once

#include <optional>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/diagnostic.hpp"
#include "panverif/source.hpp"

namespace panverif {

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value() && diagnostics.empty(); }
};

/// Lexes and parses a whole source file. Lexical errors are all reported;
/// parsing stops at the first syntax error.
ParseResult parse_program(const SourceFile& source, unsigned word_width = 64);

struct ExprParseResult {
  std::optional<Expr> expr;
  std::vector<Diagnostic> diagnostics;
};

/// Parses a single expression. With `annotation` set, the annotation-only
/// forms (applications, old, &&, ||, ==>, member and index) are accepted.
ExprParseResult parse_expression(const SourceFile& source, unsigned word_width = 64,
                                 bool annotation = false);

}  // namespace panverif
