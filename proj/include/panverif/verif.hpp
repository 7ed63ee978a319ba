#pragma once

// Structured verification-language documents (Viper concrete syntax) and
// their rendering with a line-level source map.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "panverif/ast.hpp"

namespace panverif::vir {

using BigInt = boost::multiprecision::cpp_int;

enum class VOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Implies };
std::string_view to_string(VOp op);
bool is_relational(VOp op);
bool is_logical(VOp op);

struct VExpr;

struct Int {
  BigInt value;
  friend bool operator==(const Int&, const Int&) = default;
};
struct Bool {
  bool value = false;
  friend bool operator==(const Bool&, const Bool&) = default;
};
/// Local, parameter, macro or one of the `heap` / `device` handles.
struct Ref {
  std::string name;
  friend bool operator==(const Ref&, const Ref&) = default;
};
struct Bin {
  VOp op = VOp::Add;
  Box<VExpr> lhs;
  Box<VExpr> rhs;
  friend bool operator==(const Bin&, const Bin&) = default;
};
struct Not {
  Box<VExpr> inner;
  friend bool operator==(const Not&, const Not&) = default;
};
struct Cond {
  Box<VExpr> cond;
  Box<VExpr> then_e;
  Box<VExpr> else_e;
  friend bool operator==(const Cond&, const Cond&) = default;
};
struct App {
  std::string name;
  std::vector<VExpr> args;
  friend bool operator==(const App&, const App&) = default;
};
struct Old {
  Box<VExpr> inner;
  friend bool operator==(const Old&, const Old&) = default;
};
struct FieldOf {
  Box<VExpr> base;
  std::string field;
  friend bool operator==(const FieldOf&, const FieldOf&) = default;
};
struct IndexOf {
  Box<VExpr> base;
  Box<VExpr> index;
  friend bool operator==(const IndexOf&, const IndexOf&) = default;
};
/// acc(location, permission) -- permission is rendered verbatim ("write", "1/2").
struct Acc {
  Box<VExpr> location;
  std::string permission;
  friend bool operator==(const Acc&, const Acc&) = default;
};
struct Forall {
  std::string var;
  std::vector<VExpr> triggers;
  Box<VExpr> body;
  friend bool operator==(const Forall&, const Forall&) = default;
};

struct VExpr {
  using Node = std::variant<Int, Bool, Ref, Bin, Not, Cond, App, Old, FieldOf, IndexOf, Acc, Forall>;
  Node node;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  friend bool operator==(const VExpr&, const VExpr&) = default;
};

VExpr vint(BigInt value);
VExpr vbool(bool value);
VExpr vref(std::string name);
VExpr vbin(VOp op, VExpr lhs, VExpr rhs);
VExpr vnot(VExpr inner);
VExpr vcond(VExpr c, VExpr a, VExpr b);
VExpr vapp(std::string name, std::vector<VExpr> args);
/// `slot(heap, index).val`
VExpr vslot(VExpr index);
/// Conjunction that drops literal `true` operands.
VExpr vand(VExpr lhs, VExpr rhs);

/// Two to the power `bits`.
BigInt pow2(unsigned bits);

// ---------------------------------------------------------------------------
// Statements

/// What produced an assignment. Arithmetic temporaries carry the overflow
/// checks; heap reads and residual bitops carry bounds assumptions.
enum class AssignKind { Plain, Arith, Residual, HeapRead };
enum class AssertKind { Bounds, Alignment, User };
enum class CallKind { Method, SharedStore, SharedLoad, Foreign };

struct VStmt;

namespace vs {
struct Assign {
  std::string target;
  VExpr value;
  AssignKind kind = AssignKind::Plain;
  friend bool operator==(const Assign&, const Assign&) = default;
};
/// slot(heap, index).val := value
struct HeapWrite {
  VExpr index;
  VExpr value;
  friend bool operator==(const HeapWrite&, const HeapWrite&) = default;
};
struct Assert {
  VExpr cond;
  AssertKind kind = AssertKind::User;
  friend bool operator==(const Assert&, const Assert&) = default;
};
struct Assume {
  VExpr cond;
  friend bool operator==(const Assume&, const Assume&) = default;
};
struct If {
  VExpr cond;
  std::vector<VStmt> then_body;
  std::vector<VStmt> else_body;
  friend bool operator==(const If&, const If&) = default;
};
struct Invariant {
  VExpr cond;
  Span span;
  friend bool operator==(const Invariant&, const Invariant&) = default;
};
struct While {
  VExpr cond;
  std::vector<Invariant> invariants;
  std::vector<VStmt> body;
  friend bool operator==(const While&, const While&) = default;
};
struct Call {
  std::vector<std::string> targets;
  std::string method;
  std::vector<VExpr> args;
  CallKind kind = CallKind::Method;
  // shared accesses: the region and access size; foreign calls: the name
  std::string region;
  unsigned size_bits = 0;
  friend bool operator==(const Call&, const Call&) = default;
};
struct Fold {
  bool unfold = false;
  VExpr predicate;
  friend bool operator==(const Fold&, const Fold&) = default;
};
}  // namespace vs

struct VStmt {
  using Node = std::variant<vs::Assign, vs::HeapWrite, vs::Assert, vs::Assume, vs::If, vs::While,
                            vs::Call, vs::Fold>;
  Node node;
  Span span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  friend bool operator==(const VStmt&, const VStmt&) = default;
};

// ---------------------------------------------------------------------------
// Documents

struct VDecl {
  std::string name;
  std::string type = "Int";
  Span span;
  friend bool operator==(const VDecl&, const VDecl&) = default;
};

struct VContract {
  VExpr cond;
  Span span;
  friend bool operator==(const VContract&, const VContract&) = default;
};

struct VerifMethod {
  std::string name;
  /// Word parameters after the heap and device handles.
  std::vector<VDecl> params;
  std::vector<VDecl> returns;
  std::vector<VContract> requires_;
  std::vector<VContract> ensures;
  std::vector<VDecl> locals;
  std::vector<VStmt> body;
  Span span;
  friend bool operator==(const VerifMethod&, const VerifMethod&) = default;
};

struct Define {
  std::string name;
  BigInt value;
  Span span;
  friend bool operator==(const Define&, const Define&) = default;
};

struct VerifDoc {
  std::string source_name;
  unsigned word_width = 64;
  bool wrap = false;
  bool rewrite_bitops = true;
  std::vector<std::string> imports;
  std::vector<Define> defines;
  /// Residual bitop helpers referenced by the methods, e.g. "bw_and64".
  std::set<std::string> helpers;
  std::vector<VerifMethod> methods;

  const VerifMethod* find_method(std::string_view name) const;
};

struct RenderedDoc {
  std::string text;
  /// One entry per output line (index 0 is line 1); an invalid span marks a
  /// synthetic line.
  std::vector<Span> line_spans;
  /// Method name -> first and last output line (1-based, inclusive).
  std::map<std::string, std::pair<std::size_t, std::size_t>> method_lines;

  const Span* span_for_line(std::size_t line) const;
};

std::string render_expr(const VExpr& e);

/// Renders the document. With `only` set, every other method is emitted as
/// a body-less declaration so the named method can be checked on its own.
RenderedDoc render(const VerifDoc& doc, const std::optional<std::string>& only = std::nullopt);

}  // namespace panverif::vir
