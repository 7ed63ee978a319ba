#pragma once

#include <map>
#include <string>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/diagnostic.hpp"

namespace panverif {

/// Static well-formedness: name binding, loop nesting of break/continue,
/// shapes (field indices, operator operands, call arguments and results),
/// shift amounts, shared-region ranges and annotation placement.
/// Deterministic: diagnostics come out in program order.
std::vector<Diagnostic> validate_program(const Program& program);

/// Return shape of every function, inferred from its return statements.
/// Functions that never return a value return a word.
std::map<std::string, Shape, std::less<>> infer_return_shapes(const Program& program);

/// Names that annotations may use without binding them.
bool is_reserved_annotation_name(std::string_view name);

}  // namespace panverif
