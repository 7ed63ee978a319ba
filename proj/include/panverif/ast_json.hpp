#pragma once

#include <json.hpp>

#include "panverif/ast.hpp"
#include "panverif/diagnostic.hpp"

namespace panverif {

// JSON dump of the syntax tree. Every node is an object with a "kind" tag
// and a "span"; field names are stable.

nlohmann::json to_json(const Span& span);
nlohmann::json to_json(const Shape& shape);
nlohmann::json to_json(const Expr& e);
nlohmann::json to_json(const Annotation& a);
nlohmann::json to_json(const Stmt& s);
nlohmann::json to_json(const Function& f);
nlohmann::json to_json(const Program& p);
nlohmann::json to_json(const Diagnostic& d);

}  // namespace panverif
