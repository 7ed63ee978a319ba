#include "panverif/printer.hpp"

#include <cstdio>

namespace panverif {
namespace {

std::string word_literal(Word v) {
  if (v < 65536) return std::to_string(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

bool atomic(const Expr& e) {
  return e.is<expr::Const>() || e.is<expr::Var>() || e.is<expr::Label>() ||
         e.is<expr::Struct>() || e.is<expr::Field>() || e.is<expr::BaseAddr>() ||
         e.is<expr::BytesInWord>() || e.is<expr::App>() || e.is<expr::Old>() ||
         e.is<expr::Member>() || e.is<expr::Index>();
}

std::string child(const Expr& e) { return atomic(e) ? print_expr(e) : "(" + print_expr(e) + ")"; }

std::string join_exprs(const std::vector<Expr>& es, bool as_children) {
  std::string out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out += ", ";
    out += as_children ? child(es[i]) : print_expr(es[i]);
  }
  return out;
}

std::string shape_prefix(const Shape& s) { return to_string(s) + " "; }

std::string callee_text(const Expr& callee) {
  if (auto* l = callee.as<expr::Label>()) return l->name;
  if (auto* v = callee.as<expr::Var>()) return "*" + v->name;
  return "*(" + print_expr(callee) + ")";
}

std::string range_text(const AddressRange& r) {
  std::string out = "[" + print_expr(r.lo);
  if (r.hi) out += ".." + print_expr(*r.hi);
  return out + "]";
}

class StmtPrinter {
 public:
  std::string out;

  void line(int indent, const std::string& text) {
    out.append(static_cast<std::size_t>(indent) * 4, ' ');
    out += text;
    out += '\n';
  }

  // Prints the statement as the items of an enclosing block.
  void items(const Stmt& s, int indent) {
    if (s.is<stmt::Skip>()) return;
    const Stmt* cur = &s;
    while (auto* seq = cur->as<stmt::Seq>()) {
      const Stmt& first = *seq->first;
      if (first.is<stmt::Seq>() || first.is<stmt::Dec>() || first.is<stmt::DecCall>()) {
        line(indent, "{");
        items(first, indent + 1);
        line(indent, "}");
      } else {
        single(first, indent);
      }
      cur = &*seq->second;
    }
    if (auto* d = cur->as<stmt::Dec>()) {
      line(indent, "var " + d->name + " = " + print_expr(d->init) + ";");
      items(*d->body, indent);
    } else if (auto* dc = cur->as<stmt::DecCall>()) {
      line(indent, "var " + shape_prefix(dc->shape) + dc->name + " = " + callee_text(dc->callee) +
                       "(" + join_exprs(dc->args, false) + ");");
      items(*dc->body, indent);
    } else {
      single(*cur, indent);
    }
  }

  void single(const Stmt& s, int indent) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::Skip>) {
            line(indent, "skip;");
          } else if constexpr (std::is_same_v<T, stmt::Assign>) {
            line(indent, n.name + " = " + print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::Store>) {
            line(indent, "st " + print_expr(n.address) + ", " + print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::StoreByte>) {
            line(indent, "stb " + print_expr(n.address) + ", " + print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::If>) {
            line(indent, "if (" + print_expr(n.cond) + ") {");
            items(*n.then_branch, indent + 1);
            if (n.else_branch->template is<stmt::Skip>()) {
              line(indent, "}");
            } else {
              line(indent, "} else {");
              items(*n.else_branch, indent + 1);
              line(indent, "}");
            }
          } else if constexpr (std::is_same_v<T, stmt::While>) {
            line(indent, "while (" + print_expr(n.cond) + ") {");
            items(*n.body, indent + 1);
            line(indent, "}");
          } else if constexpr (std::is_same_v<T, stmt::Break>) {
            line(indent, "break;");
          } else if constexpr (std::is_same_v<T, stmt::Continue>) {
            line(indent, "continue;");
          } else if constexpr (std::is_same_v<T, stmt::Tick>) {
            line(indent, "tick;");
          } else if constexpr (std::is_same_v<T, stmt::Call>) {
            std::string call = callee_text(n.callee) + "(" + join_exprs(n.args, false) + ");";
            line(indent, n.target ? *n.target + " = " + call : call);
          } else if constexpr (std::is_same_v<T, stmt::Raise>) {
            line(indent, "raise " + n.exception + " " + print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::Return>) {
            line(indent, "return " + print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::ShMemStore>) {
            line(indent, "!st" + std::to_string(n.size_bits) + " " + print_expr(n.address) + ", " +
                             print_expr(n.value) + ";");
          } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
            line(indent, "!ld" + std::to_string(n.size_bits) + " " + n.target + ", " +
                             print_expr(n.address) + ";");
          } else if constexpr (std::is_same_v<T, stmt::ExtCall>) {
            line(indent, "@" + n.name + "(" + print_expr(n.in_ptr) + ", " + print_expr(n.in_len) +
                             ", " + print_expr(n.out_ptr) + ", " + print_expr(n.out_len) + ");");
          } else if constexpr (std::is_same_v<T, stmt::Annot>) {
            line(indent, print_annotation(n.annotation));
          } else {
            // Seq, Dec and DecCall in a single-statement position.
            line(indent, "{");
            items(s, indent + 1);
            line(indent, "}");
          }
        },
        s.node);
  }
};

}  // namespace

std::string print_expr(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, expr::Const>) {
          return word_literal(n.value);
        } else if constexpr (std::is_same_v<T, expr::Var>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, expr::Label>) {
          return "&" + n.name;
        } else if constexpr (std::is_same_v<T, expr::Struct>) {
          return "<" + join_exprs(n.elements, true) + ">";
        } else if constexpr (std::is_same_v<T, expr::Field>) {
          return child(*n.base) + "." + std::to_string(n.index);
        } else if constexpr (std::is_same_v<T, expr::Load>) {
          return "lds " + shape_prefix(n.shape) + child(*n.address);
        } else if constexpr (std::is_same_v<T, expr::LoadByte>) {
          return "ldb " + child(*n.address);
        } else if constexpr (std::is_same_v<T, expr::Op>) {
          std::string out;
          std::string sep = " " + std::string(to_string(n.op)) + " ";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += sep;
            out += child(n.args[i]);
          }
          return out;
        } else if constexpr (std::is_same_v<T, expr::Cmp>) {
          return child(*n.lhs) + " " + std::string(to_string(n.op)) + " " + child(*n.rhs);
        } else if constexpr (std::is_same_v<T, expr::Shift>) {
          return child(*n.operand) + " " + std::string(to_string(n.kind)) + " " +
                 std::to_string(n.amount);
        } else if constexpr (std::is_same_v<T, expr::BaseAddr>) {
          return "@base";
        } else if constexpr (std::is_same_v<T, expr::BytesInWord>) {
          return "@biw";
        } else if constexpr (std::is_same_v<T, expr::App>) {
          return n.name + "(" + join_exprs(n.args, false) + ")";
        } else if constexpr (std::is_same_v<T, expr::Old>) {
          return "old(" + print_expr(*n.inner) + ")";
        } else if constexpr (std::is_same_v<T, expr::Logic>) {
          return child(*n.lhs) + " " + std::string(to_string(n.op)) + " " + child(*n.rhs);
        } else if constexpr (std::is_same_v<T, expr::Not>) {
          return "!" + child(*n.inner);
        } else if constexpr (std::is_same_v<T, expr::Member>) {
          return child(*n.base) + "." + n.name;
        } else {
          static_assert(std::is_same_v<T, expr::Index>);
          return child(*n.base) + "[" + print_expr(*n.index) + "]";
        }
      },
      e.node);
}

std::string print_annotation(const Annotation& a) {
  std::string body = std::string(to_string(a.kind)) + " ";
  if (auto* e = a.expr()) {
    body += print_expr(*e);
  } else if (auto* s = std::get_if<SharedRegionDecl>(&a.payload)) {
    body += std::string(to_string(s->access)) + " u" + std::to_string(s->width_bits) + " " +
            s->name + range_text(s->range);
  } else {
    const auto& r = std::get<LocalRegionDecl>(a.payload);
    body += std::string(to_string(r.access)) + " " + r.name + range_text(r.range);
  }
  return "/@ " + body + " @/";
}

std::string print_stmt(const Stmt& s, int indent) {
  StmtPrinter p;
  p.items(s, indent);
  return p.out;
}

std::string print_function(const Function& f) {
  StmtPrinter p;
  std::string head = f.exported ? "export fun " : "fun ";
  head += f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) head += ", ";
    if (!f.params[i].shape.is_word()) head += shape_prefix(f.params[i].shape);
    head += f.params[i].name;
  }
  head += ") {";
  p.line(0, head);
  for (const auto& a : f.contract) p.line(1, print_annotation(a));
  p.items(f.body, 1);
  p.line(0, "}");
  return p.out;
}

std::string print_program(const Program& prog) {
  std::string out;
  auto section = [&](const std::string& text) {
    if (!out.empty()) out += "\n";
    out += text;
  };
  if (!prog.constants.empty()) {
    std::string block;
    for (const auto& c : prog.constants)
      block += "const " + c.name + " = " + print_expr(c.value) + ";\n";
    section(block);
  }
  if (!prog.shared.empty()) {
    std::string block;
    for (const auto& s : prog.shared) {
      Annotation a{AnnotKind::Shared, s, s.span};
      block += print_annotation(a) + "\n";
    }
    section(block);
  }
  for (const auto& f : prog.functions) section(print_function(f));
  return out.empty() ? "\n" : out;
}

}  // namespace panverif
