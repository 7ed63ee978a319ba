#pragma once

// Pancake abstract syntax: shapes, expressions, statements, annotations and
// whole programs. Every node carries a source span. Structural equality
// (operator==) ignores spans, so a re-parsed program compares equal to the
// original regardless of formatting.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace panverif {

using Word = std::uint64_t;

/// Location of a node in its source file. Lines and columns are 1-based;
/// line 0 marks a synthetic node with no source location.
struct Span {
  std::shared_ptr<const std::string> file;
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::uint32_t end_line = 0;
  std::uint32_t end_col = 0;

  bool valid() const { return line != 0; }
  std::string file_name() const { return file ? *file : std::string(); }
  std::string to_string() const;

  // Spans never take part in AST equality.
  friend bool operator==(const Span&, const Span&) { return true; }
};

bool same_location(const Span& a, const Span& b);

/// Heap-allocated value with value semantics; used for recursive AST edges.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------------------
// Shapes

/// Word-count structure of a value. An empty element list is a single word;
/// a non-empty one is a composite.
class Shape {
 public:
  Shape() = default;
  static Shape word() { return Shape(); }
  /// Throws std::invalid_argument on an empty element list.
  static Shape composite(std::vector<Shape> elements);

  bool is_word() const { return elements_.empty(); }
  const std::vector<Shape>& elements() const { return elements_; }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<Shape> elements_;
};

/// Total machine words occupied by a value of this shape.
std::size_t shape_size(const Shape& shape);
std::string to_string(const Shape& shape);

// ---------------------------------------------------------------------------
// Expressions

enum class BinOp { Add, Sub, Mul, Div, Mod, And, Or, Xor };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ShiftKind { Lsl, Lsr, Asr };
enum class LogicOp { And, Or, Implies };

std::string_view to_string(BinOp op);
std::string_view to_string(CmpOp op);
std::string_view to_string(ShiftKind kind);
std::string_view to_string(LogicOp op);
bool is_associative(BinOp op);

struct Expr;

namespace expr {
struct Const {
  Word value = 0;
  friend bool operator==(const Const&, const Const&) = default;
};
struct Var {
  std::string name;
  friend bool operator==(const Var&, const Var&) = default;
};
struct Label {
  std::string name;
  friend bool operator==(const Label&, const Label&) = default;
};
struct Struct {
  std::vector<Expr> elements;
  friend bool operator==(const Struct&, const Struct&) = default;
};
struct Field {
  std::uint32_t index = 0;
  Box<Expr> base;
  friend bool operator==(const Field&, const Field&) = default;
};
struct Load {
  Shape shape;
  Box<Expr> address;
  friend bool operator==(const Load&, const Load&) = default;
};
struct LoadByte {
  Box<Expr> address;
  friend bool operator==(const LoadByte&, const LoadByte&) = default;
};
struct Op {
  BinOp op = BinOp::Add;
  std::vector<Expr> args;
  friend bool operator==(const Op&, const Op&) = default;
};
struct Cmp {
  CmpOp op = CmpOp::Eq;
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const Cmp&, const Cmp&) = default;
};
struct Shift {
  ShiftKind kind = ShiftKind::Lsl;
  Box<Expr> operand;
  std::uint32_t amount = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};
struct BaseAddr {
  friend bool operator==(const BaseAddr&, const BaseAddr&) = default;
};
struct BytesInWord {
  friend bool operator==(const BytesInWord&, const BytesInWord&) = default;
};

// The forms below only occur inside annotations. They are passed through to
// the verification language; the front-end does not interpret them.

/// Opaque predicate or function application, e.g. `valid_device()`.
struct App {
  std::string name;
  std::vector<Expr> args;
  friend bool operator==(const App&, const App&) = default;
};
struct Old {
  Box<Expr> inner;
  friend bool operator==(const Old&, const Old&) = default;
};
struct Logic {
  LogicOp op = LogicOp::And;
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const Logic&, const Logic&) = default;
};
struct Not {
  Box<Expr> inner;
  friend bool operator==(const Not&, const Not&) = default;
};
/// Named member access, e.g. `device.hw_ring_tx`.
struct Member {
  Box<Expr> base;
  std::string name;
  friend bool operator==(const Member&, const Member&) = default;
};
struct Index {
  Box<Expr> base;
  Box<Expr> index;
  friend bool operator==(const Index&, const Index&) = default;
};
}  // namespace expr

struct Expr {
  using Node = std::variant<expr::Const, expr::Var, expr::Label, expr::Struct, expr::Field,
                            expr::Load, expr::LoadByte, expr::Op, expr::Cmp, expr::Shift,
                            expr::BaseAddr, expr::BytesInWord, expr::App, expr::Old,
                            expr::Logic, expr::Not, expr::Member, expr::Index>;

  Node node;
  Span span;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }

  /// True for the annotation-only forms (App, Old, Logic, Not, Member, Index).
  bool is_annotation_only() const;

  friend bool operator==(const Expr&, const Expr&) = default;
};

// Convenience constructors, mostly for tests and rewriting passes.
Expr make_const(Word value, Span span = {});
Expr make_var(std::string name, Span span = {});
Expr make_label(std::string name, Span span = {});
Expr make_op(BinOp op, std::vector<Expr> args, Span span = {});
Expr make_cmp(CmpOp op, Expr lhs, Expr rhs, Span span = {});
Expr make_shift(ShiftKind kind, Expr operand, std::uint32_t amount, Span span = {});
Expr make_struct(std::vector<Expr> elements, Span span = {});
Expr make_field(std::uint32_t index, Expr base, Span span = {});
Expr make_load(Shape shape, Expr address, Span span = {});
Expr make_load_byte(Expr address, Span span = {});
Expr make_app(std::string name, std::vector<Expr> args, Span span = {});

// ---------------------------------------------------------------------------
// Annotations

enum class AnnotKind { Requires, Ensures, Invariant, Assert, Fold, Unfold, Shared, Region };
enum class Access { ReadOnly, WriteOnly, ReadWrite };

std::string_view to_string(AnnotKind kind);
std::string_view to_string(Access access);
std::optional<AnnotKind> annot_kind_from_string(std::string_view text);
bool permits_load(Access access);
bool permits_store(Access access);

/// Address range of constant expressions, inclusive at both ends. The
/// single-address form `name[a]` leaves `hi` empty, meaning hi = lo.
struct AddressRange {
  Expr lo;
  std::optional<Expr> hi;

  const Expr& upper() const { return hi ? *hi : lo; }
  friend bool operator==(const AddressRange&, const AddressRange&) = default;
};

/// `shared <access> u<width> name[lo..hi]`: shared-memory operations on the
/// range dispatch to the model methods `store_<name>` / `load_<name>`.
struct SharedRegionDecl {
  std::string name;
  Access access = Access::ReadWrite;
  unsigned width_bits = 64;
  AddressRange range;
  Span span;

  std::string store_method() const { return "store_" + name; }
  std::string load_method() const { return "load_" + name; }
  friend bool operator==(const SharedRegionDecl&, const SharedRegionDecl&) = default;
};

/// `region <access> name[lo..hi]`: local memory a function needs, with the
/// permission it needs it at. Encoded as a quantified permission contract.
struct LocalRegionDecl {
  std::string name;
  Access access = Access::ReadWrite;
  AddressRange range;
  Span span;
  friend bool operator==(const LocalRegionDecl&, const LocalRegionDecl&) = default;
};

struct Annotation {
  using Payload = std::variant<Expr, SharedRegionDecl, LocalRegionDecl>;

  AnnotKind kind = AnnotKind::Assert;
  Payload payload;
  Span span;

  const Expr* expr() const { return std::get_if<Expr>(&payload); }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// ---------------------------------------------------------------------------
// Statements

struct Stmt;

namespace stmt {
struct Skip {
  friend bool operator==(const Skip&, const Skip&) = default;
};
struct Dec {
  std::string name;
  Expr init;
  Box<Stmt> body;
  friend bool operator==(const Dec&, const Dec&) = default;
};
struct Assign {
  std::string name;
  Expr value;
  friend bool operator==(const Assign&, const Assign&) = default;
};
struct Store {
  Expr address;
  Expr value;
  friend bool operator==(const Store&, const Store&) = default;
};
struct StoreByte {
  Expr address;
  Expr value;
  friend bool operator==(const StoreByte&, const StoreByte&) = default;
};
struct Seq {
  Box<Stmt> first;
  Box<Stmt> second;
  friend bool operator==(const Seq&, const Seq&) = default;
};
struct If {
  Expr cond;
  Box<Stmt> then_branch;
  Box<Stmt> else_branch;
  friend bool operator==(const If&, const If&) = default;
};
struct While {
  Expr cond;
  Box<Stmt> body;
  friend bool operator==(const While&, const While&) = default;
};
struct Break {
  friend bool operator==(const Break&, const Break&) = default;
};
struct Continue {
  friend bool operator==(const Continue&, const Continue&) = default;
};
/// Function call. `target` empty means the result is discarded.
struct Call {
  std::optional<std::string> target;
  Expr callee;
  std::vector<Expr> args;
  friend bool operator==(const Call&, const Call&) = default;
};
struct Raise {
  std::string exception;
  Expr value;
  friend bool operator==(const Raise&, const Raise&) = default;
};
struct Return {
  Expr value;
  friend bool operator==(const Return&, const Return&) = default;
};
struct Tick {
  friend bool operator==(const Tick&, const Tick&) = default;
};
struct ShMemStore {
  unsigned size_bits = 64;
  Expr address;
  Expr value;
  friend bool operator==(const ShMemStore&, const ShMemStore&) = default;
};
struct ShMemLoad {
  unsigned size_bits = 64;
  std::string target;
  Expr address;
  friend bool operator==(const ShMemLoad&, const ShMemLoad&) = default;
};
struct DecCall {
  std::string name;
  Shape shape;
  Expr callee;
  std::vector<Expr> args;
  Box<Stmt> body;
  friend bool operator==(const DecCall&, const DecCall&) = default;
};
/// Foreign call: (input pointer, input length, output pointer, output length).
struct ExtCall {
  std::string name;
  Expr in_ptr;
  Expr in_len;
  Expr out_ptr;
  Expr out_len;
  friend bool operator==(const ExtCall&, const ExtCall&) = default;
};
struct Annot {
  Annotation annotation;
  friend bool operator==(const Annot&, const Annot&) = default;
};
}  // namespace stmt

struct Stmt {
  using Node = std::variant<stmt::Skip, stmt::Dec, stmt::Assign, stmt::Store, stmt::StoreByte,
                            stmt::Seq, stmt::If, stmt::While, stmt::Break, stmt::Continue,
                            stmt::Call, stmt::Raise, stmt::Return, stmt::Tick, stmt::ShMemStore,
                            stmt::ShMemLoad, stmt::DecCall, stmt::ExtCall, stmt::Annot>;

  Node node;
  Span span;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

Stmt make_skip(Span span = {});
Stmt make_seq(Stmt first, Stmt second, Span span = {});
/// Right-nested sequence of a statement list: [] is Skip, [s] is s.
Stmt make_block(std::vector<Stmt> stmts, Span span = {});

// ---------------------------------------------------------------------------
// Programs

struct Param {
  std::string name;
  Shape shape;
  Span span;
  friend bool operator==(const Param&, const Param&) = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  /// requires / ensures / region annotations, in source order.
  std::vector<Annotation> contract;
  Stmt body;
  bool exported = false;
  Span span;

  std::vector<const LocalRegionDecl*> regions() const;
  friend bool operator==(const Function&, const Function&) = default;
};

/// Top-level `const NAME = expr;` binding a name to a constant word.
struct ConstDecl {
  std::string name;
  Expr value;
  Span span;
  friend bool operator==(const ConstDecl&, const ConstDecl&) = default;
};

struct Program {
  std::vector<ConstDecl> constants;
  std::vector<SharedRegionDecl> shared;
  std::vector<Function> functions;
  unsigned word_width = 64;

  const Function* find_function(std::string_view name) const;
  const ConstDecl* find_constant(std::string_view name) const;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Removes every Annot statement and every contract annotation, normalising
/// sequences the way the parser would if the annotations had never been
/// written.
Program strip_annotations(const Program& program);

/// Word mask for a given width (32 or 64).
constexpr Word word_mask(unsigned width) {
  return width >= 64 ? ~Word{0} : ((Word{1} << width) - 1);
}

}  // namespace panverif
