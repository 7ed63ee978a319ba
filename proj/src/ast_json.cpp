#include "panverif/ast_json.hpp"

namespace panverif {

using nlohmann::json;

namespace {

json node(const char* kind, const Span& span) { return json{{"kind", kind}, {"span", to_json(span)}}; }

json exprs(const std::vector<Expr>& es) {
  json out = json::array();
  for (const auto& e : es) out.push_back(to_json(e));
  return out;
}

json range_json(const AddressRange& r) {
  json out{{"lo", to_json(r.lo)}};
  out["hi"] = r.hi ? to_json(*r.hi) : json(nullptr);
  return out;
}

}  // namespace

json to_json(const Span& span) {
  if (!span.valid()) return nullptr;
  return json{{"file", span.file_name()}, {"line", span.line},         {"col", span.col},
              {"end_line", span.end_line}, {"end_col", span.end_col}};
}

json to_json(const Shape& shape) {
  if (shape.is_word()) return json{{"kind", "Word"}};
  json elems = json::array();
  for (const auto& e : shape.elements()) elems.push_back(to_json(e));
  return json{{"kind", "Composite"}, {"elements", elems}};
}

json to_json(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, expr::Const>) {
          json j = node("Const", e.span);
          j["value"] = n.value;
          return j;
        } else if constexpr (std::is_same_v<T, expr::Var>) {
          json j = node("Var", e.span);
          j["name"] = n.name;
          return j;
        } else if constexpr (std::is_same_v<T, expr::Label>) {
          json j = node("Label", e.span);
          j["name"] = n.name;
          return j;
        } else if constexpr (std::is_same_v<T, expr::Struct>) {
          json j = node("Struct", e.span);
          j["elements"] = exprs(n.elements);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Field>) {
          json j = node("Field", e.span);
          j["index"] = n.index;
          j["base"] = to_json(*n.base);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Load>) {
          json j = node("Load", e.span);
          j["shape"] = to_json(n.shape);
          j["address"] = to_json(*n.address);
          return j;
        } else if constexpr (std::is_same_v<T, expr::LoadByte>) {
          json j = node("LoadByte", e.span);
          j["address"] = to_json(*n.address);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Op>) {
          json j = node("Op", e.span);
          j["op"] = std::string(to_string(n.op));
          j["args"] = exprs(n.args);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Cmp>) {
          json j = node("Cmp", e.span);
          j["op"] = std::string(to_string(n.op));
          j["lhs"] = to_json(*n.lhs);
          j["rhs"] = to_json(*n.rhs);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Shift>) {
          json j = node("Shift", e.span);
          j["shift"] = std::string(to_string(n.kind));
          j["operand"] = to_json(*n.operand);
          j["amount"] = n.amount;
          return j;
        } else if constexpr (std::is_same_v<T, expr::BaseAddr>) {
          return node("BaseAddr", e.span);
        } else if constexpr (std::is_same_v<T, expr::BytesInWord>) {
          return node("BytesInWord", e.span);
        } else if constexpr (std::is_same_v<T, expr::App>) {
          json j = node("App", e.span);
          j["name"] = n.name;
          j["args"] = exprs(n.args);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Old>) {
          json j = node("Old", e.span);
          j["inner"] = to_json(*n.inner);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Logic>) {
          json j = node("Logic", e.span);
          j["op"] = std::string(to_string(n.op));
          j["lhs"] = to_json(*n.lhs);
          j["rhs"] = to_json(*n.rhs);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Not>) {
          json j = node("Not", e.span);
          j["inner"] = to_json(*n.inner);
          return j;
        } else if constexpr (std::is_same_v<T, expr::Member>) {
          json j = node("Member", e.span);
          j["base"] = to_json(*n.base);
          j["name"] = n.name;
          return j;
        } else {
          json j = node("Index", e.span);
          j["base"] = to_json(*n.base);
          j["index"] = to_json(*n.index);
          return j;
        }
      },
      e.node);
}

json to_json(const Annotation& a) {
  json j = node("Annotation", a.span);
  j["annotation"] = std::string(to_string(a.kind));
  if (auto* e = a.expr()) {
    j["expr"] = to_json(*e);
  } else if (auto* s = std::get_if<SharedRegionDecl>(&a.payload)) {
    j["name"] = s->name;
    j["access"] = std::string(to_string(s->access));
    j["width"] = s->width_bits;
    j["range"] = range_json(s->range);
  } else {
    const auto& r = std::get<LocalRegionDecl>(a.payload);
    j["name"] = r.name;
    j["access"] = std::string(to_string(r.access));
    j["range"] = range_json(r.range);
  }
  return j;
}

json to_json(const Stmt& s) {
  return std::visit(
      [&](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::Skip>) {
          return node("Skip", s.span);
        } else if constexpr (std::is_same_v<T, stmt::Dec>) {
          json j = node("Dec", s.span);
          j["name"] = n.name;
          j["init"] = to_json(n.init);
          j["body"] = to_json(*n.body);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Assign>) {
          json j = node("Assign", s.span);
          j["name"] = n.name;
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Store>) {
          json j = node("Store", s.span);
          j["address"] = to_json(n.address);
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::StoreByte>) {
          json j = node("StoreByte", s.span);
          j["address"] = to_json(n.address);
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          json j = node("Seq", s.span);
          j["first"] = to_json(*n.first);
          j["second"] = to_json(*n.second);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::If>) {
          json j = node("If", s.span);
          j["cond"] = to_json(n.cond);
          j["then"] = to_json(*n.then_branch);
          j["else"] = to_json(*n.else_branch);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::While>) {
          json j = node("While", s.span);
          j["cond"] = to_json(n.cond);
          j["body"] = to_json(*n.body);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Break>) {
          return node("Break", s.span);
        } else if constexpr (std::is_same_v<T, stmt::Continue>) {
          return node("Continue", s.span);
        } else if constexpr (std::is_same_v<T, stmt::Call>) {
          json j = node("Call", s.span);
          j["target"] = n.target ? json(*n.target) : json(nullptr);
          j["callee"] = to_json(n.callee);
          j["args"] = exprs(n.args);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Raise>) {
          json j = node("Raise", s.span);
          j["exception"] = n.exception;
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Return>) {
          json j = node("Return", s.span);
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::Tick>) {
          return node("Tick", s.span);
        } else if constexpr (std::is_same_v<T, stmt::ShMemStore>) {
          json j = node("ShMemStore", s.span);
          j["size"] = n.size_bits;
          j["address"] = to_json(n.address);
          j["value"] = to_json(n.value);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
          json j = node("ShMemLoad", s.span);
          j["size"] = n.size_bits;
          j["target"] = n.target;
          j["address"] = to_json(n.address);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::DecCall>) {
          json j = node("DecCall", s.span);
          j["name"] = n.name;
          j["shape"] = to_json(n.shape);
          j["callee"] = to_json(n.callee);
          j["args"] = exprs(n.args);
          j["body"] = to_json(*n.body);
          return j;
        } else if constexpr (std::is_same_v<T, stmt::ExtCall>) {
          json j = node("ExtCall", s.span);
          j["name"] = n.name;
          j["in_ptr"] = to_json(n.in_ptr);
          j["in_len"] = to_json(n.in_len);
          j["out_ptr"] = to_json(n.out_ptr);
          j["out_len"] = to_json(n.out_len);
          return j;
        } else {
          json j = node("Annot", s.span);
          j["annotation"] = to_json(n.annotation);
          return j;
        }
      },
      s.node);
}

json to_json(const Function& f) {
  json j = node("Function", f.span);
  j["name"] = f.name;
  j["exported"] = f.exported;
  json params = json::array();
  for (const auto& p : f.params)
    params.push_back(json{{"name", p.name}, {"shape", to_json(p.shape)}, {"span", to_json(p.span)}});
  j["params"] = params;
  json contract = json::array();
  for (const auto& a : f.contract) contract.push_back(to_json(a));
  j["contract"] = contract;
  j["body"] = to_json(f.body);
  return j;
}

json to_json(const Program& p) {
  json j{{"kind", "Program"}, {"word_width", p.word_width}};
  json consts = json::array();
  for (const auto& c : p.constants)
    consts.push_back(json{{"kind", "Const"},
                          {"name", c.name},
                          {"value", to_json(c.value)},
                          {"span", to_json(c.span)}});
  j["constants"] = consts;
  json shared = json::array();
  for (const auto& s : p.shared) shared.push_back(to_json(Annotation{AnnotKind::Shared, s, s.span}));
  j["shared"] = shared;
  json fns = json::array();
  for (const auto& f : p.functions) fns.push_back(to_json(f));
  j["functions"] = fns;
  return j;
}

json to_json(const Diagnostic& d) {
  return json{{"code", d.code}, {"message", d.message}, {"span", to_json(d.span)}};
}

}  // namespace panverif
