#include "panverif/verif.hpp"

#include <sstream>

namespace panverif::vir {

std::string_view to_string(VOp op) {
  switch (op) {
    case VOp::Add: return "+";
    case VOp::Sub: return "-";
    case VOp::Mul: return "*";
    case VOp::Div: return "\\";
    case VOp::Mod: return "%";
    case VOp::Eq: return "==";
    case VOp::Ne: return "!=";
    case VOp::Lt: return "<";
    case VOp::Le: return "<=";
    case VOp::Gt: return ">";
    case VOp::Ge: return ">=";
    case VOp::And: return "&&";
    case VOp::Or: return "||";
    case VOp::Implies: return "==>";
  }
  return "?";
}

bool is_relational(VOp op) {
  switch (op) {
    case VOp::Eq:
    case VOp::Ne:
    case VOp::Lt:
    case VOp::Le:
    case VOp::Gt:
    case VOp::Ge:
      return true;
    default:
      return false;
  }
}

bool is_logical(VOp op) { return op == VOp::And || op == VOp::Or || op == VOp::Implies; }

VExpr vint(BigInt value) { return VExpr{Int{std::move(value)}}; }
VExpr vbool(bool value) { return VExpr{Bool{value}}; }
VExpr vref(std::string name) { return VExpr{Ref{std::move(name)}}; }
VExpr vbin(VOp op, VExpr lhs, VExpr rhs) { return VExpr{Bin{op, std::move(lhs), std::move(rhs)}}; }
VExpr vnot(VExpr inner) { return VExpr{Not{std::move(inner)}}; }
VExpr vcond(VExpr c, VExpr a, VExpr b) {
  return VExpr{Cond{std::move(c), std::move(a), std::move(b)}};
}
VExpr vapp(std::string name, std::vector<VExpr> args) {
  return VExpr{App{std::move(name), std::move(args)}};
}
VExpr vslot(VExpr index) {
  return VExpr{FieldOf{vapp("slot", {vref("heap"), std::move(index)}), "val"}};
}

VExpr vand(VExpr lhs, VExpr rhs) {
  auto is_true = [](const VExpr& e) {
    auto* b = e.as<Bool>();
    return b && b->value;
  };
  if (is_true(lhs)) return rhs;
  if (is_true(rhs)) return lhs;
  return vbin(VOp::And, std::move(lhs), std::move(rhs));
}

BigInt pow2(unsigned bits) {
  BigInt r = 1;
  r <<= bits;
  return r;
}

const VerifMethod* VerifDoc::find_method(std::string_view name) const {
  for (const auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

const Span* RenderedDoc::span_for_line(std::size_t line) const {
  if (line == 0 || line > line_spans.size()) return nullptr;
  const Span& s = line_spans[line - 1];
  return s.valid() ? &s : nullptr;
}

namespace {

int precedence(const VExpr& e) {
  if (auto* b = e.as<Bin>()) {
    switch (b->op) {
      case VOp::Implies: return 1;
      case VOp::Or: return 2;
      case VOp::And: return 3;
      case VOp::Eq:
      case VOp::Ne: return 4;
      case VOp::Lt:
      case VOp::Le:
      case VOp::Gt:
      case VOp::Ge: return 5;
      case VOp::Add:
      case VOp::Sub: return 6;
      default: return 7;
    }
  }
  if (e.is<Cond>() || e.is<Forall>()) return 0;
  if (e.is<Not>()) return 8;
  if (auto* i = e.as<Int>(); i && i->value < 0) return 8;
  return 9;
}

void emit(std::ostream& out, const VExpr& e, int min_prec);

void emit_list(std::ostream& out, const std::vector<VExpr>& es) {
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out << ", ";
    emit(out, es[i], 0);
  }
}

void emit_node(std::ostream& out, const VExpr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Int>) {
          out << n.value.str();
        } else if constexpr (std::is_same_v<T, Bool>) {
          out << (n.value ? "true" : "false");
        } else if constexpr (std::is_same_v<T, Ref>) {
          out << n.name;
        } else if constexpr (std::is_same_v<T, Bin>) {
          int p = precedence(e);
          int lp = p, rp = p + 1;
          if (n.op == VOp::Implies) {
            lp = p + 1;
            rp = p;
          } else if (is_relational(n.op)) {
            lp = p + 1;
          }
          emit(out, *n.lhs, lp);
          out << ' ' << to_string(n.op) << ' ';
          emit(out, *n.rhs, rp);
        } else if constexpr (std::is_same_v<T, Not>) {
          out << '!';
          emit(out, *n.inner, 8);
        } else if constexpr (std::is_same_v<T, Cond>) {
          emit(out, *n.cond, 1);
          out << " ? ";
          emit(out, *n.then_e, 1);
          out << " : ";
          emit(out, *n.else_e, 0);
        } else if constexpr (std::is_same_v<T, App>) {
          out << n.name << '(';
          emit_list(out, n.args);
          out << ')';
        } else if constexpr (std::is_same_v<T, Old>) {
          out << "old(";
          emit(out, *n.inner, 0);
          out << ')';
        } else if constexpr (std::is_same_v<T, FieldOf>) {
          emit(out, *n.base, 9);
          out << '.' << n.field;
        } else if constexpr (std::is_same_v<T, IndexOf>) {
          emit(out, *n.base, 9);
          out << '[';
          emit(out, *n.index, 0);
          out << ']';
        } else if constexpr (std::is_same_v<T, Acc>) {
          out << "acc(";
          emit(out, *n.location, 0);
          out << ", " << n.permission << ')';
        } else {
          out << "forall " << n.var << ": Int :: ";
          if (!n.triggers.empty()) {
            out << "{ ";
            emit_list(out, n.triggers);
            out << " } ";
          }
          emit(out, *n.body, 0);
        }
      },
      e.node);
}

void emit(std::ostream& out, const VExpr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    out << '(';
    emit_node(out, e);
    out << ')';
  } else {
    emit_node(out, e);
  }
}

class Writer {
 public:
  void line(const std::string& text, const Span& span = {}) {
    out_ += text;
    out_ += '\n';
    spans_.push_back(span);
  }
  void blank() { line(""); }
  std::size_t lines() const { return spans_.size(); }

  RenderedDoc finish() {
    RenderedDoc d;
    d.text = std::move(out_);
    d.line_spans = std::move(spans_);
    return d;
  }

 private:
  std::string out_;
  std::vector<Span> spans_;
};

std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

std::string targets_prefix(const std::vector<std::string>& targets) {
  std::string s;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (i) s += ", ";
    s += targets[i];
  }
  return s.empty() ? s : s + " := ";
}

void write_stmts(Writer& w, const std::vector<VStmt>& body, int depth);

void write_stmt(Writer& w, const VStmt& s, int depth) {
  const std::string pad = indent(depth);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, vs::Assign>) {
          w.line(pad + n.target + " := " + render_expr(n.value), s.span);
        } else if constexpr (std::is_same_v<T, vs::HeapWrite>) {
          w.line(pad + render_expr(vslot(n.index)) + " := " + render_expr(n.value), s.span);
        } else if constexpr (std::is_same_v<T, vs::Assert>) {
          w.line(pad + "assert " + render_expr(n.cond), s.span);
        } else if constexpr (std::is_same_v<T, vs::Assume>) {
          w.line(pad + "assume " + render_expr(n.cond), s.span);
        } else if constexpr (std::is_same_v<T, vs::If>) {
          w.line(pad + "if (" + render_expr(n.cond) + ") {", s.span);
          write_stmts(w, n.then_body, depth + 1);
          if (!n.else_body.empty()) {
            w.line(pad + "} else {");
            write_stmts(w, n.else_body, depth + 1);
          }
          w.line(pad + "}");
        } else if constexpr (std::is_same_v<T, vs::While>) {
          w.line(pad + "while (" + render_expr(n.cond) + ")", s.span);
          for (const auto& inv : n.invariants)
            w.line(pad + "  invariant " + render_expr(inv.cond), inv.span.valid() ? inv.span : s.span);
          w.line(pad + "{");
          write_stmts(w, n.body, depth + 1);
          w.line(pad + "}");
        } else if constexpr (std::is_same_v<T, vs::Call>) {
          std::ostringstream call;
          call << n.method << '(';
          emit_list(call, n.args);
          call << ')';
          w.line(pad + targets_prefix(n.targets) + call.str(), s.span);
        } else {
          w.line(pad + (n.unfold ? "unfold " : "fold ") + render_expr(n.predicate), s.span);
        }
      },
      s.node);
}

void write_stmts(Writer& w, const std::vector<VStmt>& body, int depth) {
  for (const auto& s : body) write_stmt(w, s, depth);
}

void write_method(Writer& w, const VerifMethod& m, bool with_body,
                  std::map<std::string, std::pair<std::size_t, std::size_t>>& ranges) {
  std::size_t first = w.lines() + 1;
  std::string header = "method " + m.name + "(heap: IArray, device: Ref";
  for (const auto& p : m.params) header += ", " + p.name + ": " + p.type;
  header += ")";
  if (!m.returns.empty()) {
    header += " returns (";
    for (std::size_t i = 0; i < m.returns.size(); ++i) {
      if (i) header += ", ";
      header += m.returns[i].name + ": " + m.returns[i].type;
    }
    header += ")";
  }
  w.line(header, m.span);
  for (const auto& c : m.requires_) w.line("  requires " + render_expr(c.cond), c.span.valid() ? c.span : m.span);
  for (const auto& c : m.ensures) w.line("  ensures " + render_expr(c.cond), c.span.valid() ? c.span : m.span);
  if (with_body) {
    w.line("{");
    for (const auto& d : m.locals) w.line("  var " + d.name + ": " + d.type, d.span.valid() ? d.span : m.span);
    write_stmts(w, m.body, 1);
    w.line("}");
  }
  ranges[m.name] = {first, w.lines()};
}

const char* kPreamble[] = {
    "domain IArray {",
    "  function slot(a: IArray, i: Int): Ref",
    "  function len(a: IArray): Int",
    "  function first(r: Ref): IArray",
    "  function second(r: Ref): Int",
    "",
    "  axiom all_diff {",
    "    forall a: IArray, i: Int :: { slot(a, i) } first(slot(a, i)) == a && second(slot(a, i)) == i",
    "  }",
    "",
    "  axiom len_nonneg {",
    "    forall a: IArray :: { len(a) } len(a) >= 0",
    "  }",
    "}",
    "",
    "field val: Int",
    "",
    "function bounded8(x: Int): Bool { 0 <= x && x < 256 }",
    "function bounded16(x: Int): Bool { 0 <= x && x < 65536 }",
    "function bounded32(x: Int): Bool { 0 <= x && x < 4294967296 }",
    "function bounded64(x: Int): Bool { 0 <= x && x < 18446744073709551616 }",
    "",
    "function pow256(k: Int): Int",
    "  requires 0 <= k && k < 8",
    "{ k == 0 ? 1 : 256 * pow256(k - 1) }",
};

}  // namespace

std::string render_expr(const VExpr& e) {
  std::ostringstream out;
  emit(out, e, 0);
  return out.str();
}

RenderedDoc render(const VerifDoc& doc, const std::optional<std::string>& only) {
  Writer w;
  w.line("// Generated by panverif from " + (doc.source_name.empty() ? "<input>" : doc.source_name));
  w.line("// word width " + std::to_string(doc.word_width) + ", overflow " +
         (doc.wrap ? "wrap" : "fail") + ", bitop rewriting " + (doc.rewrite_bitops ? "on" : "off"));
  w.blank();
  if (!doc.defines.empty()) {
    for (const auto& d : doc.defines) w.line("define " + d.name + " " + d.value.str(), d.span);
    w.blank();
  }
  if (!doc.imports.empty()) {
    for (const auto& i : doc.imports) w.line("import \"" + i + "\"");
    w.blank();
  }
  for (const char* l : kPreamble) w.line(l);
  if (!doc.helpers.empty()) {
    w.blank();
    for (const auto& h : doc.helpers) {
      bool shift = h.rfind("bw_and", 0) != 0 && h.rfind("bw_or", 0) != 0 && h.rfind("bw_xor", 0) != 0;
      w.line("function " + h + (shift ? "(a: Int, k: Int): Int" : "(a: Int, b: Int): Int"));
    }
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& m : doc.methods) {
    w.blank();
    write_method(w, m, !only || *only == m.name, ranges);
  }
  RenderedDoc out = w.finish();
  out.method_lines = std::move(ranges);
  return out;
}

}  // namespace panverif::vir
