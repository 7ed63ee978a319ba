#pragma once

#include <string>

#include "panverif/ast.hpp"

namespace panverif {

// Canonical concrete syntax. parse(print(p)) == p for every program the
// parser can produce.

std::string print_expr(const Expr& e);
std::string print_annotation(const Annotation& a);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_function(const Function& f);
std::string print_program(const Program& p);

}  // namespace panverif
