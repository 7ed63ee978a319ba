#include "panverif/ast.hpp"

#include <numeric>
#include <stdexcept>

namespace panverif {

std::string Span::to_string() const {
  std::string out = file ? *file : std::string("<input>");
  if (!valid()) return out;
  out += ':' + std::to_string(line) + ':' + std::to_string(col);
  return out;
}

bool same_location(const Span& a, const Span& b) {
  return a.file_name() == b.file_name() && a.line == b.line && a.col == b.col &&
         a.end_line == b.end_line && a.end_col == b.end_col;
}

Shape Shape::composite(std::vector<Shape> elements) {
  if (elements.empty()) throw std::invalid_argument("composite shape needs at least one element");
  Shape shape;
  shape.elements_ = std::move(elements);
  return shape;
}

std::size_t shape_size(const Shape& shape) {
  if (shape.is_word()) return 1;
  return std::accumulate(shape.elements().begin(), shape.elements().end(), std::size_t{0},
                         [](std::size_t acc, const Shape& s) { return acc + shape_size(s); });
}

std::string to_string(const Shape& shape) {
  if (shape.is_word()) return "1";
  bool all_words = true;
  for (const auto& e : shape.elements()) all_words = all_words && e.is_word();
  if (all_words && shape.elements().size() > 1) return std::to_string(shape.elements().size());
  std::string out = "{";
  for (std::size_t i = 0; i < shape.elements().size(); ++i) {
    if (i) out += ',';
    out += to_string(shape.elements()[i]);
  }
  return out + "}";
}

std::string_view to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    case BinOp::Xor: return "^";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

std::string_view to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::Lsl: return "<<";
    case ShiftKind::Lsr: return ">>";
    case ShiftKind::Asr: return ">>>";
  }
  return "?";
}

std::string_view to_string(LogicOp op) {
  switch (op) {
    case LogicOp::And: return "&&";
    case LogicOp::Or: return "||";
    case LogicOp::Implies: return "==>";
  }
  return "?";
}

bool is_associative(BinOp op) {
  return op == BinOp::Add || op == BinOp::And || op == BinOp::Or || op == BinOp::Xor;
}

bool Expr::is_annotation_only() const {
  return is<expr::App>() || is<expr::Old>() || is<expr::Logic>() || is<expr::Not>() ||
         is<expr::Member>() || is<expr::Index>();
}

Expr make_const(Word value, Span span) { return Expr{expr::Const{value}, std::move(span)}; }
Expr make_var(std::string name, Span span) {
  return Expr{expr::Var{std::move(name)}, std::move(span)};
}
Expr make_label(std::string name, Span span) {
  return Expr{expr::Label{std::move(name)}, std::move(span)};
}
Expr make_op(BinOp op, std::vector<Expr> args, Span span) {
  return Expr{expr::Op{op, std::move(args)}, std::move(span)};
}
Expr make_cmp(CmpOp op, Expr lhs, Expr rhs, Span span) {
  return Expr{expr::Cmp{op, std::move(lhs), std::move(rhs)}, std::move(span)};
}
Expr make_shift(ShiftKind kind, Expr operand, std::uint32_t amount, Span span) {
  return Expr{expr::Shift{kind, std::move(operand), amount}, std::move(span)};
}
Expr make_struct(std::vector<Expr> elements, Span span) {
  return Expr{expr::Struct{std::move(elements)}, std::move(span)};
}
Expr make_field(std::uint32_t index, Expr base, Span span) {
  return Expr{expr::Field{index, std::move(base)}, std::move(span)};
}
Expr make_load(Shape shape, Expr address, Span span) {
  return Expr{expr::Load{std::move(shape), std::move(address)}, std::move(span)};
}
Expr make_load_byte(Expr address, Span span) {
  return Expr{expr::LoadByte{std::move(address)}, std::move(span)};
}
Expr make_app(std::string name, std::vector<Expr> args, Span span) {
  return Expr{expr::App{std::move(name), std::move(args)}, std::move(span)};
}

std::string_view to_string(AnnotKind kind) {
  switch (kind) {
    case AnnotKind::Requires: return "requires";
    case AnnotKind::Ensures: return "ensures";
    case AnnotKind::Invariant: return "invariant";
    case AnnotKind::Assert: return "assert";
    case AnnotKind::Fold: return "fold";
    case AnnotKind::Unfold: return "unfold";
    case AnnotKind::Shared: return "shared";
    case AnnotKind::Region: return "region";
  }
  return "?";
}

std::string_view to_string(Access access) {
  switch (access) {
    case Access::ReadOnly: return "ro";
    case Access::WriteOnly: return "wo";
    case Access::ReadWrite: return "rw";
  }
  return "?";
}

std::optional<AnnotKind> annot_kind_from_string(std::string_view text) {
  for (auto kind : {AnnotKind::Requires, AnnotKind::Ensures, AnnotKind::Invariant,
                    AnnotKind::Assert, AnnotKind::Fold, AnnotKind::Unfold, AnnotKind::Shared,
                    AnnotKind::Region}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

bool permits_load(Access access) { return access != Access::WriteOnly; }
bool permits_store(Access access) { return access != Access::ReadOnly; }

Stmt make_skip(Span span) { return Stmt{stmt::Skip{}, std::move(span)}; }

Stmt make_seq(Stmt first, Stmt second, Span span) {
  return Stmt{stmt::Seq{std::move(first), std::move(second)}, std::move(span)};
}

Stmt make_block(std::vector<Stmt> stmts, Span span) {
  if (stmts.empty()) return make_skip(std::move(span));
  Stmt result = std::move(stmts.back());
  for (std::size_t i = stmts.size() - 1; i-- > 0;) {
    Span s = stmts[i].span;
    result = make_seq(std::move(stmts[i]), std::move(result), s);
  }
  return result;
}

std::vector<const LocalRegionDecl*> Function::regions() const {
  std::vector<const LocalRegionDecl*> out;
  for (const auto& a : contract) {
    if (const auto* r = std::get_if<LocalRegionDecl>(&a.payload)) out.push_back(r);
  }
  return out;
}

const Function* Program::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const ConstDecl* Program::find_constant(std::string_view name) const {
  for (const auto& c : constants) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

// nullopt means "nothing left": the statement was an annotation.
std::optional<Stmt> strip(const Stmt& s) {
  auto or_skip = [&](std::optional<Stmt> x) { return x ? std::move(*x) : make_skip(s.span); };
  return std::visit(
      [&](const auto& n) -> std::optional<Stmt> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::Annot>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          auto a = strip(*n.first);
          auto b = strip(*n.second);
          if (!a) return b;
          if (!b) return a;
          return make_seq(std::move(*a), std::move(*b), s.span);
        } else if constexpr (std::is_same_v<T, stmt::Dec>) {
          return Stmt{stmt::Dec{n.name, n.init, or_skip(strip(*n.body))}, s.span};
        } else if constexpr (std::is_same_v<T, stmt::DecCall>) {
          return Stmt{stmt::DecCall{n.name, n.shape, n.callee, n.args, or_skip(strip(*n.body))},
                      s.span};
        } else if constexpr (std::is_same_v<T, stmt::If>) {
          return Stmt{stmt::If{n.cond, or_skip(strip(*n.then_branch)),
                               or_skip(strip(*n.else_branch))},
                      s.span};
        } else if constexpr (std::is_same_v<T, stmt::While>) {
          return Stmt{stmt::While{n.cond, or_skip(strip(*n.body))}, s.span};
        } else {
          return s;
        }
      },
      s.node);
}

}  // namespace

Program strip_annotations(const Program& program) {
  Program out = program;
  out.shared.clear();
  for (auto& f : out.functions) {
    f.contract.clear();
    auto body = strip(f.body);
    f.body = body ? std::move(*body) : make_skip(f.body.span);
  }
  return out;
}

}  // namespace panverif
