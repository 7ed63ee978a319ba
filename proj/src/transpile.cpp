#include "panverif/transpile.hpp"

#include <functional>
#include <sstream>

#include "panverif/validate.hpp"

namespace panverif {

using vir::BigInt;
using vir::VExpr;
using vir::VStmt;
namespace vs = vir::vs;

namespace {

const std::set<std::string, std::less<>> kViperWords = {
    "method", "function", "predicate", "field", "domain", "axiom", "var", "returns", "requires",
    "ensures", "invariant", "assert", "assume", "inhale", "exhale", "fold", "unfold", "unfolding",
    "in", "if", "elseif", "else", "while", "new", "true", "false", "null", "result", "old", "forall",
    "exists", "forperm", "acc", "write", "none", "wildcard", "epsilon", "perm", "Int", "Bool", "Ref",
    "Perm", "Seq", "Set", "Multiset", "Map", "import", "define", "package", "apply", "applying",
    "label", "goto", "let", "union", "intersection", "setminus", "subset", "fresh", "constraining",
    "Rational", "range", "decreases", "quasihavoc", "quasihavocall", "interpretation"};

const std::set<std::string, std::less<>> kEncodingNames = {
    "heap",      "device",    "ret",       "slot",      "len",       "first",     "second",
    "val",       "IArray",    "pow256",    "bounded8",  "bounded16", "bounded32", "bounded64",
    "bw_and32",  "bw_or32",   "bw_xor32",  "bw_shl32",  "bw_lshr32", "bw_ashr32", "bw_and64",
    "bw_or64",   "bw_xor64",  "bw_shl64",  "bw_lshr64", "bw_ashr64", "i$"};

bool reserved_name(const std::string& n) { return kViperWords.count(n) || kEncodingNames.count(n); }

class NameSupply {
 public:
  void reserve(const std::string& n) { used_.insert(n); }

  std::string fresh(const std::string& base) {
    if (!used_.count(base)) {
      used_.insert(base);
      return base;
    }
    for (unsigned i = 1;; ++i) {
      std::string c = base + "$" + std::to_string(i);
      if (!used_.count(c)) {
        used_.insert(c);
        return c;
      }
    }
  }

  /// One name for a word, `base$0..` for a composite of n words.
  std::vector<std::string> fresh_flat(const std::string& base, std::size_t n) {
    if (n == 1) return {fresh(base)};
    for (unsigned i = 0;; ++i) {
      std::string cand = i == 0 ? base : base + "$" + std::to_string(i);
      bool free = !used_.count(cand);
      for (std::size_t k = 0; free && k < n; ++k) free = !used_.count(cand + "$" + std::to_string(k));
      if (!free) continue;
      used_.insert(cand);
      std::vector<std::string> out;
      for (std::size_t k = 0; k < n; ++k) {
        out.push_back(cand + "$" + std::to_string(k));
        used_.insert(out.back());
      }
      return out;
    }
  }

  std::string numbered(const std::string& prefix) {
    for (;;) {
      std::string c = prefix + "$" + std::to_string(++counters_[prefix]);
      if (!used_.count(c)) {
        used_.insert(c);
        return c;
      }
    }
  }

 private:
  std::set<std::string, std::less<>> used_;
  std::map<std::string, unsigned> counters_;
};

struct Binding {
  Shape shape;
  std::vector<std::string> names;
};

constexpr int kBreak = 1;
constexpr int kContinue = 2;
constexpr int kReturn = 4;

struct LoopFrame {
  std::optional<std::string> brk;
  std::optional<std::string> cont;
};

std::string method_name(const std::string& fn) { return reserved_name(fn) ? fn + "$" : fn; }

bool falls_through(const Stmt& s) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::Return> || std::is_same_v<T, stmt::Raise> ||
                      std::is_same_v<T, stmt::Break> || std::is_same_v<T, stmt::Continue>) {
          return false;
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          return falls_through(*n.first) && falls_through(*n.second);
        } else if constexpr (std::is_same_v<T, stmt::If>) {
          return falls_through(*n.then_branch) || falls_through(*n.else_branch);
        } else if constexpr (std::is_same_v<T, stmt::Dec> || std::is_same_v<T, stmt::DecCall>) {
          return falls_through(*n.body);
        } else {
          return true;
        }
      },
      s.node);
}

void assigned_names(const Stmt& s, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::Assign>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
          out.insert(n.target);
        } else if constexpr (std::is_same_v<T, stmt::Call>) {
          if (n.target) out.insert(*n.target);
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          assigned_names(*n.first, out);
          assigned_names(*n.second, out);
        } else if constexpr (std::is_same_v<T, stmt::If>) {
          assigned_names(*n.then_branch, out);
          assigned_names(*n.else_branch, out);
        } else if constexpr (std::is_same_v<T, stmt::While> || std::is_same_v<T, stmt::Dec> ||
                             std::is_same_v<T, stmt::DecCall>) {
          assigned_names(*n.body, out);
        }
      },
      s.node);
}

std::string hex(Word w) {
  std::ostringstream o;
  o << "0x" << std::hex << w;
  return o.str();
}

std::string_view bitop_symbol(BinOp op) { return to_string(op); }

class Encoder {
 public:
  struct Shared {
    const Program& program;
    const EncodingConfig& cfg;
    const DispatchTable& table;
    const std::map<std::string, Shape, std::less<>>& ret_shapes;
    const ConstEnv& consts;
    std::vector<Diagnostic>& diags;
    std::vector<ResidualBitop>& residual;
    std::set<std::string>& helpers;
  };

  explicit Encoder(Shared sh) : sh_(sh), consts_(sh.consts) {
    for (const auto& w : kViperWords) names_.reserve(w);
    for (const auto& w : kEncodingNames) names_.reserve(w);
    for (const auto& [k, v] : sh_.consts) names_.reserve(k);
    for (const auto& f : sh_.program.functions) names_.reserve(method_name(f.name));
    if (sh_.cfg.model_methods)
      for (const auto& [k, v] : sh_.cfg.model_methods->methods) names_.reserve(k);
  }

  // Standalone mode for unroll_expr: unknown variables are used as they are.
  void allow_free_variables() { free_vars_ = true; }

  vir::VerifMethod function(const Function& f) {
    fn_ = &f;
    cur_span_ = f.span;
    vir::VerifMethod m;
    m.name = method_name(f.name);
    m.span = f.span;

    for (const auto& p : f.params)
      if (consts_.count(p.name)) consts_.erase(p.name);

    std::set<std::string> assigned;
    assigned_names(f.body, assigned);
    std::vector<VStmt> prologue;
    std::map<std::string, Binding> contract_env;
    for (const auto& p : f.params) {
      std::size_t n = shape_size(p.shape);
      Binding b{p.shape, names_.fresh_flat(p.name, n)};
      for (const auto& name : b.names) m.params.push_back({name, "Int", p.span});
      contract_env[p.name] = b;
      if (assigned.count(p.name)) {
        Binding copy{p.shape, names_.fresh_flat(p.name, n)};
        for (std::size_t i = 0; i < n; ++i) {
          declare(copy.names[i], p.span);
          push(prologue, vs::Assign{copy.names[i], vir::vref(b.names[i])}, p.span);
        }
        env_[p.name] = copy;
      } else {
        env_[p.name] = b;
      }
    }

    auto rs = sh_.ret_shapes.find(f.name);
    Shape ret_shape = rs == sh_.ret_shapes.end() ? Shape::word() : rs->second;
    std::size_t nret = shape_size(ret_shape);
    if (nret == 1) {
      ret_names_ = {"ret"};
    } else {
      for (std::size_t i = 0; i < nret; ++i) {
        ret_names_.push_back("ret$" + std::to_string(i));
        names_.reserve(ret_names_.back());
      }
    }
    for (const auto& r : ret_names_) m.returns.push_back({r, "Int", f.span});

    // contracts
    Binding ret_binding{ret_shape, ret_names_};
    contract_env_ = &contract_env;
    contract_ret_ = &ret_binding;
    for (const auto& p : m.params) m.requires_.push_back({bounded(sh_.cfg.word_width, vir::vref(p.name)), p.span});
    std::vector<vir::VContract> perms;
    for (const auto& a : f.contract)
      if (auto* r = std::get_if<LocalRegionDecl>(&a.payload)) perms.push_back({region_permission(*r), a.span});
    for (const auto& c : perms) m.requires_.push_back(c);
    for (const auto& a : f.contract)
      if (a.kind == AnnotKind::Requires && a.expr()) m.requires_.push_back({annot_bool(*a.expr()), a.span});
    for (const auto& c : perms) m.ensures.push_back(c);
    for (const auto& a : f.contract)
      if (a.kind == AnnotKind::Ensures && a.expr()) m.ensures.push_back({annot_bool(*a.expr()), a.span});
    for (const auto& r : ret_names_) m.ensures.push_back({bounded(sh_.cfg.word_width, vir::vref(r)), f.span});
    contract_env_ = nullptr;
    contract_ret_ = nullptr;

    std::vector<VStmt> body;
    lower(f.body, true, body);

    std::vector<VStmt> all = std::move(prologue);
    if (ret_flag_) push(all, vs::Assign{*ret_flag_, vir::vbool(false)}, f.span);
    if (falls_through(f.body))
      for (const auto& r : ret_names_) push(all, vs::Assign{r, vir::vint(0)}, f.span);
    for (auto& s : body) all.push_back(std::move(s));
    m.body = std::move(all);
    m.locals = std::move(locals_);
    return m;
  }

  UnrollResult unroll(const Expr& e) {
    UnrollResult r{{}, vir::vint(0), {}, {}};
    cur_span_ = e.span;
    r.atom = word(prepare(e), r.stmts);
    for (const auto& d : locals_) r.temps.push_back(d.name);
    return r;
  }

 private:
  // ---- helpers -----------------------------------------------------------

  static VExpr bounded(unsigned bits, VExpr e) {
    return vir::vapp("bounded" + std::to_string(bits), {std::move(e)});
  }

  unsigned width() const { return sh_.cfg.word_width; }
  BigInt word_bytes() const { return BigInt(sh_.cfg.word_bytes()); }
  bool wrap() const { return sh_.cfg.overflow == OverflowPolicy::Wrap; }

  Span span_of(const Expr& e) const { return e.span.valid() ? e.span : cur_span_; }

  static void push(std::vector<VStmt>& out, VStmt::Node n, const Span& span) {
    out.push_back(VStmt{std::move(n), span});
  }

  void declare(const std::string& name, const Span& span, const char* type = "Int") {
    locals_.push_back({name, type, span});
  }

  std::string temp(const Span& span) {
    std::string t = names_.numbered("t");
    declare(t, span);
    return t;
  }

  void error(const Span& span, std::string code, std::string message) {
    sh_.diags.push_back({span.valid() ? span : cur_span_, std::move(code), std::move(message)});
  }

  Expr prepare(const Expr& e) const {
    Expr r = fold_constants(e, consts_, width(), sh_.cfg.base_addr);
    if (sh_.cfg.rewrite_bitops) r = fold_constants(rewrite_bitop(r, width()), consts_, width(), sh_.cfg.base_addr);
    return r;
  }

  const Binding* binding(const std::string& name) const {
    auto it = env_.find(name);
    return it == env_.end() ? nullptr : &it->second;
  }

  std::string function_name() const { return fn_ ? fn_->name : std::string(); }

  std::string residual_helper(std::string_view op, const Span& span) {
    std::string base;
    if (op == "&") base = "bw_and";
    else if (op == "|") base = "bw_or";
    else if (op == "^") base = "bw_xor";
    else if (op == "<<") base = "bw_shl";
    else if (op == ">>") base = "bw_lshr";
    else base = "bw_ashr";
    std::string helper = base + std::to_string(width());
    sh_.helpers.insert(helper);
    sh_.residual.push_back({function_name(), std::string(op), helper, span});
    return helper;
  }

  // ---- shapes and flattened values -------------------------------------

  Shape shape_of(const Expr& e) const {
    if (auto* v = e.as<expr::Var>()) {
      auto* b = binding(v->name);
      return b ? b->shape : Shape::word();
    }
    if (auto* s = e.as<expr::Struct>()) {
      std::vector<Shape> el;
      for (const auto& x : s->elements) el.push_back(shape_of(x));
      return Shape::composite(std::move(el));
    }
    if (auto* f = e.as<expr::Field>()) {
      Shape b = shape_of(*f->base);
      if (b.is_word() || f->index >= b.elements().size()) return Shape::word();
      return b.elements()[f->index];
    }
    if (auto* l = e.as<expr::Load>()) return l->shape;
    return Shape::word();
  }

  static std::vector<VExpr> slice(const std::vector<VExpr>& words, const Shape& shape, std::uint32_t index) {
    if (shape.is_word() || index >= shape.elements().size()) return words;
    std::size_t off = 0;
    for (std::uint32_t i = 0; i < index; ++i) off += shape_size(shape.elements()[i]);
    std::size_t n = shape_size(shape.elements()[index]);
    if (off + n > words.size()) return words;
    return {words.begin() + static_cast<std::ptrdiff_t>(off), words.begin() + static_cast<std::ptrdiff_t>(off + n)};
  }

  std::vector<VExpr> value(const Expr& e, std::vector<VStmt>& out) {
    if (auto* s = e.as<expr::Struct>()) {
      std::vector<VExpr> words;
      for (const auto& x : s->elements)
        for (auto& w : value(x, out)) words.push_back(std::move(w));
      return words;
    }
    if (auto* v = e.as<expr::Var>()) {
      if (auto* b = binding(v->name)) {
        std::vector<VExpr> words;
        for (const auto& n : b->names) words.push_back(vir::vref(n));
        return words;
      }
    }
    if (auto* f = e.as<expr::Field>()) return slice(value(*f->base, out), shape_of(*f->base), f->index);
    if (auto* l = e.as<expr::Load>()) return load_words(*l->address, shape_size(l->shape), span_of(e), out);
    return {word(e, out)};
  }

  // ---- three-address unrolling ------------------------------------------

  VExpr arith(BinOp op, VExpr a, VExpr b, const Span& span, std::vector<VStmt>& out) {
    vir::VOp vop;
    switch (op) {
      case BinOp::Add: vop = vir::VOp::Add; break;
      case BinOp::Sub: vop = vir::VOp::Sub; break;
      case BinOp::Mul: vop = vir::VOp::Mul; break;
      case BinOp::Div: vop = vir::VOp::Div; break;
      case BinOp::Mod: vop = vir::VOp::Mod; break;
      default: {
        std::string helper = residual_helper(bitop_symbol(op), span);
        std::string t = temp(span);
        push(out, vs::Assign{t, vir::vapp(helper, {std::move(a), std::move(b)}), vir::AssignKind::Residual}, span);
        push(out, vs::Assume{bounded(width(), vir::vref(t))}, span);
        return vir::vref(t);
      }
    }
    return arith_assign(vir::vbin(vop, std::move(a), std::move(b)), span, out);
  }

  VExpr arith_assign(VExpr rhs, const Span& span, std::vector<VStmt>& out) {
    std::string t = temp(span);
    if (wrap()) rhs = vir::vbin(vir::VOp::Mod, std::move(rhs), vir::vint(vir::pow2(width())));
    push(out, vs::Assign{t, std::move(rhs), vir::AssignKind::Arith}, span);
    if (!wrap()) push(out, vs::Assert{bounded(width(), vir::vref(t)), vir::AssertKind::Bounds}, span);
    return vir::vref(t);
  }

  static vir::VOp rel(CmpOp op) {
    switch (op) {
      case CmpOp::Eq: return vir::VOp::Eq;
      case CmpOp::Ne: return vir::VOp::Ne;
      case CmpOp::Lt: return vir::VOp::Lt;
      case CmpOp::Le: return vir::VOp::Le;
      case CmpOp::Gt: return vir::VOp::Gt;
      case CmpOp::Ge: return vir::VOp::Ge;
    }
    return vir::VOp::Eq;
  }

  VExpr word(const Expr& e, std::vector<VStmt>& out) {
    const Span span = span_of(e);
    if (auto* c = e.as<expr::Const>()) return vir::vint(c->value);
    if (e.is<expr::BaseAddr>()) return vir::vint(sh_.cfg.base_addr);
    if (e.is<expr::BytesInWord>()) return vir::vint(sh_.cfg.word_bytes());
    if (auto* v = e.as<expr::Var>()) {
      if (auto* b = binding(v->name)) return vir::vref(b->names.front());
      if (!free_vars_) error(span, "unbound-var", "unbound variable '" + v->name + "'");
      return vir::vref(v->name);
    }
    if (auto* l = e.as<expr::Label>()) {
      error(span, "code-label", "code label '&" + l->name + "' cannot be encoded");
      return vir::vint(0);
    }
    if (e.is<expr::Field>() || e.is<expr::Load>() || e.is<expr::Struct>()) {
      auto words = value(e, out);
      return words.empty() ? vir::vint(0) : words.front();
    }
    if (auto* lb = e.as<expr::LoadByte>()) {
      VExpr a = word(*lb->address, out);
      check_local(*lb->address, 1, span);
      VExpr w = read_slot(a, 0, span, out);
      VExpr shift = vir::vapp("pow256", {vir::vbin(vir::VOp::Mod, a, vir::vint(word_bytes()))});
      return arith_assign(
          vir::vbin(vir::VOp::Mod, vir::vbin(vir::VOp::Div, std::move(w), std::move(shift)), vir::vint(256)),
          span, out);
    }
    if (auto* op = e.as<expr::Op>()) {
      VExpr acc = word(op->args.front(), out);
      for (std::size_t i = 1; i < op->args.size(); ++i) {
        VExpr rhs = word(op->args[i], out);
        acc = arith(op->op, std::move(acc), std::move(rhs), span, out);
      }
      return acc;
    }
    if (auto* c = e.as<expr::Cmp>()) {
      VExpr a = word(*c->lhs, out);
      VExpr b = word(*c->rhs, out);
      std::string t = temp(span);
      push(out,
           vs::Assign{t, vir::vcond(vir::vbin(rel(c->op), std::move(a), std::move(b)), vir::vint(1), vir::vint(0))},
           span);
      return vir::vref(t);
    }
    if (auto* s = e.as<expr::Shift>()) {
      VExpr a = word(*s->operand, out);
      std::string helper = residual_helper(to_string(s->kind), span);
      std::string t = temp(span);
      push(out, vs::Assign{t, vir::vapp(helper, {std::move(a), vir::vint(s->amount)}), vir::AssignKind::Residual},
           span);
      push(out, vs::Assume{bounded(width(), vir::vref(t))}, span);
      return vir::vref(t);
    }
    error(span, "annotation-syntax-in-code", "annotation-only expression in code");
    return vir::vint(0);
  }

  VExpr cond(const Expr& e, std::vector<VStmt>& out) {
    if (auto* c = e.as<expr::Cmp>()) {
      VExpr a = word(*c->lhs, out);
      VExpr b = word(*c->rhs, out);
      return vir::vbin(rel(c->op), std::move(a), std::move(b));
    }
    VExpr a = word(e, out);
    if (auto* i = a.as<vir::Int>()) return vir::vbool(i->value != 0);
    return vir::vbin(vir::VOp::Ne, std::move(a), vir::vint(0));
  }

  // ---- local memory -------------------------------------------------------

  VExpr slot_index(const VExpr& addr, std::size_t offset) const {
    if (auto* i = addr.as<vir::Int>()) return vir::vint(i->value / word_bytes() + offset);
    VExpr idx = vir::vbin(vir::VOp::Div, addr, vir::vint(word_bytes()));
    if (offset) idx = vir::vbin(vir::VOp::Add, std::move(idx), vir::vint(offset));
    return idx;
  }

  VExpr read_slot(const VExpr& addr, std::size_t offset, const Span& span, std::vector<VStmt>& out) {
    std::string t = temp(span);
    push(out, vs::Assign{t, vir::vslot(slot_index(addr, offset)), vir::AssignKind::HeapRead}, span);
    push(out, vs::Assume{bounded(width(), vir::vref(t))}, span);
    return vir::vref(t);
  }

  void align(const VExpr& addr, const Span& span, std::vector<VStmt>& out) {
    push(out,
         vs::Assert{vir::vbin(vir::VOp::Eq, vir::vbin(vir::VOp::Mod, addr, vir::vint(word_bytes())), vir::vint(0)),
                    vir::AssertKind::Alignment},
         span);
  }

  std::vector<VExpr> load_words(const Expr& address, std::size_t n, const Span& span, std::vector<VStmt>& out) {
    VExpr a = word(address, out);
    check_local(address, n * sh_.cfg.word_bytes(), span);
    align(a, span, out);
    std::vector<VExpr> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back(read_slot(a, i, span, out));
    return words;
  }

  void check_local(const Expr& address, std::size_t bytes, const Span& span) {
    if (!fn_) return;
    auto* c = address.as<expr::Const>();
    if (!c) return;
    BigInt lo = c->value, hi = BigInt(c->value) + bytes - 1;
    for (const auto* r : fn_->regions()) {
      auto rlo = eval_const(r->range.lo, consts_, width(), sh_.cfg.base_addr);
      auto rhi = eval_const(r->range.upper(), consts_, width(), sh_.cfg.base_addr);
      if (!rlo || !rhi) return;
      if (BigInt(*rlo) <= lo && hi <= BigInt(*rhi)) return;
    }
    error(span, "outside-regions",
          "address " + hex(c->value) + " is outside every region annotated on '" + fn_->name + "'");
  }

  // ---- annotations -------------------------------------------------------

  enum class Ty { Int, Bool, Any };
  struct AExpr {
    VExpr e;
    Ty ty;
  };

  static VExpr as_bool(AExpr a) {
    if (a.ty != Ty::Int) return std::move(a.e);
    if (auto* i = a.e.as<vir::Int>()) return vir::vbool(i->value != 0);
    return vir::vbin(vir::VOp::Ne, std::move(a.e), vir::vint(0));
  }
  static VExpr as_int(AExpr a) {
    if (a.ty != Ty::Bool) return std::move(a.e);
    return vir::vcond(std::move(a.e), vir::vint(1), vir::vint(0));
  }

  VExpr annot_bool(const Expr& e) { return as_bool(annot(prepare(e))); }
  VExpr annot_int(const Expr& e) { return as_int(annot(prepare(e))); }

  const Binding* annot_binding(const std::string& name) const {
    if (contract_env_) {
      if (name == "retval") return contract_ret_;
      auto it = contract_env_->find(name);
      return it == contract_env_->end() ? nullptr : &it->second;
    }
    return binding(name);
  }

  std::optional<std::vector<VExpr>> annot_words(const Expr& e) {
    if (auto* v = e.as<expr::Var>()) {
      if (auto* b = annot_binding(v->name)) {
        std::vector<VExpr> out;
        for (const auto& n : b->names) out.push_back(vir::vref(n));
        return out;
      }
      return std::nullopt;
    }
    if (auto* f = e.as<expr::Field>()) {
      auto base = annot_words(*f->base);
      if (!base) return std::nullopt;
      return slice(*base, annot_shape(*f->base), f->index);
    }
    return std::nullopt;
  }

  Shape annot_shape(const Expr& e) const {
    if (auto* v = e.as<expr::Var>()) {
      auto* b = annot_binding(v->name);
      return b ? b->shape : Shape::word();
    }
    if (auto* f = e.as<expr::Field>()) {
      Shape b = annot_shape(*f->base);
      if (b.is_word() || f->index >= b.elements().size()) return Shape::word();
      return b.elements()[f->index];
    }
    return Shape::word();
  }

  AExpr annot(const Expr& e) {
    const Span span = span_of(e);
    if (auto* c = e.as<expr::Const>()) return {vir::vint(c->value), Ty::Int};
    if (e.is<expr::BaseAddr>()) return {vir::vint(sh_.cfg.base_addr), Ty::Int};
    if (e.is<expr::BytesInWord>()) return {vir::vint(sh_.cfg.word_bytes()), Ty::Int};
    if (auto* v = e.as<expr::Var>()) {
      if (v->name == "device" || v->name == "heap") return {vir::vref(v->name), Ty::Any};
      if (auto words = annot_words(e)) {
        if (words->size() != 1) error(span, "aggregate-in-annotation", "aggregate '" + v->name + "' used as a word");
        return {words->front(), Ty::Int};
      }
      return {vir::vref(v->name), Ty::Any};
    }
    if (auto* f = e.as<expr::Field>()) {
      auto words = annot_words(e);
      if (!words || words->size() != 1) {
        error(span, "aggregate-in-annotation", "field access does not name a word");
        return {vir::vint(0), Ty::Int};
      }
      (void)f;
      return {words->front(), Ty::Int};
    }
    if (auto* op = e.as<expr::Op>()) {
      VExpr acc = as_int(annot(op->args.front()));
      for (std::size_t i = 1; i < op->args.size(); ++i) {
        VExpr rhs = as_int(annot(op->args[i]));
        switch (op->op) {
          case BinOp::Add: acc = vir::vbin(vir::VOp::Add, std::move(acc), std::move(rhs)); break;
          case BinOp::Sub: acc = vir::vbin(vir::VOp::Sub, std::move(acc), std::move(rhs)); break;
          case BinOp::Mul: acc = vir::vbin(vir::VOp::Mul, std::move(acc), std::move(rhs)); break;
          case BinOp::Div: acc = vir::vbin(vir::VOp::Div, std::move(acc), std::move(rhs)); break;
          case BinOp::Mod: acc = vir::vbin(vir::VOp::Mod, std::move(acc), std::move(rhs)); break;
          default:
            acc = vir::vapp(residual_helper(bitop_symbol(op->op), span), {std::move(acc), std::move(rhs)});
        }
      }
      return {std::move(acc), Ty::Int};
    }
    if (auto* c = e.as<expr::Cmp>())
      return {vir::vbin(rel(c->op), as_int(annot(*c->lhs)), as_int(annot(*c->rhs))), Ty::Bool};
    if (auto* s = e.as<expr::Shift>())
      return {vir::vapp(residual_helper(to_string(s->kind), span), {as_int(annot(*s->operand)), vir::vint(s->amount)}),
              Ty::Int};
    if (auto* l = e.as<expr::Logic>()) {
      vir::VOp op = l->op == LogicOp::And ? vir::VOp::And : l->op == LogicOp::Or ? vir::VOp::Or : vir::VOp::Implies;
      return {vir::vbin(op, as_bool(annot(*l->lhs)), as_bool(annot(*l->rhs))), Ty::Bool};
    }
    if (auto* n = e.as<expr::Not>()) return {vir::vnot(as_bool(annot(*n->inner))), Ty::Bool};
    if (auto* a = e.as<expr::App>()) {
      std::vector<VExpr> args;
      if (a->args.empty()) args.push_back(vir::vref("device"));
      for (const auto& x : a->args) args.push_back(annot(x).e);
      return {vir::vapp(a->name, std::move(args)), Ty::Any};
    }
    if (auto* o = e.as<expr::Old>()) {
      AExpr inner = annot(*o->inner);
      return {VExpr{vir::Old{std::move(inner.e)}}, inner.ty};
    }
    if (auto* m = e.as<expr::Member>()) return {VExpr{vir::FieldOf{annot(*m->base).e, m->name}}, Ty::Any};
    if (auto* ix = e.as<expr::Index>())
      return {VExpr{vir::IndexOf{annot(*ix->base).e, as_int(annot(*ix->index))}}, Ty::Any};
    if (auto* l = e.as<expr::Load>()) {
      if (!l->shape.is_word()) error(span, "aggregate-in-annotation", "multi-word load in an annotation");
      return {vir::vslot(slot_index(as_int(annot(*l->address)), 0)), Ty::Int};
    }
    if (auto* lb = e.as<expr::LoadByte>()) {
      VExpr a = as_int(annot(*lb->address));
      VExpr w = vir::vslot(slot_index(a, 0));
      VExpr p = vir::vapp("pow256", {vir::vbin(vir::VOp::Mod, a, vir::vint(word_bytes()))});
      return {vir::vbin(vir::VOp::Mod, vir::vbin(vir::VOp::Div, std::move(w), std::move(p)), vir::vint(256)), Ty::Int};
    }
    error(span, "unsupported-annotation", "expression form cannot appear in an annotation");
    return {vir::vint(0), Ty::Int};
  }

  VExpr region_permission(const LocalRegionDecl& r) {
    VExpr lo = annot_int(r.range.lo);
    VExpr hi = annot_int(r.range.upper());
    auto to_slot = [&](VExpr a) {
      if (auto* i = a.as<vir::Int>()) return vir::vint(i->value / word_bytes());
      return vir::vbin(vir::VOp::Div, std::move(a), vir::vint(word_bytes()));
    };
    VExpr i = vir::vref("i$");
    VExpr within = vir::vbin(vir::VOp::And, vir::vbin(vir::VOp::Le, to_slot(std::move(lo)), i),
                             vir::vbin(vir::VOp::Le, i, to_slot(std::move(hi))));
    std::string perm = r.access == Access::ReadOnly ? "1/2" : "write";
    VExpr acc{vir::Acc{vir::vslot(i), perm}};
    VExpr trigger = vir::vapp("slot", {vir::vref("heap"), i});
    return VExpr{vir::Forall{"i$", {trigger}, vir::vbin(vir::VOp::Implies, std::move(within), std::move(acc))}};
  }

  // ---- statements ---------------------------------------------------------

  VExpr guard(int exits) const {
    VExpr g = vir::vbool(true);
    if (!loops_.empty()) {
      const auto& top = loops_.back();
      if ((exits & kBreak) && top.brk) g = vir::vand(std::move(g), vir::vnot(vir::vref(*top.brk)));
      if ((exits & kContinue) && top.cont) g = vir::vand(std::move(g), vir::vnot(vir::vref(*top.cont)));
    }
    if ((exits & kReturn) && ret_flag_) g = vir::vand(std::move(g), vir::vnot(vir::vref(*ret_flag_)));
    return g;
  }

  void assign_words(const std::vector<std::string>& targets, std::vector<VExpr> words, const Span& span,
                    std::vector<VStmt>& out) {
    if (targets.size() > 1) {
      // a composite assignment may read its own target, e.g. x = <x.1, x.0>
      for (auto& w : words) {
        auto* r = w.as<vir::Ref>();
        if (r && std::find(targets.begin(), targets.end(), r->name) != targets.end()) {
          std::string t = temp(span);
          push(out, vs::Assign{t, w}, span);
          w = vir::vref(t);
        }
      }
    }
    for (std::size_t i = 0; i < targets.size() && i < words.size(); ++i)
      push(out, vs::Assign{targets[i], std::move(words[i])}, span);
  }

  std::vector<std::string> call_targets(const std::string& callee, const std::optional<std::string>& target,
                                        const Span& span) {
    if (target) {
      if (auto* b = binding(*target)) return b->names;
      error(span, "unbound-var", "unbound variable '" + *target + "'");
      return {};
    }
    auto rs = sh_.ret_shapes.find(callee);
    std::size_t n = rs == sh_.ret_shapes.end() ? 1 : shape_size(rs->second);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(temp(span));
    return out;
  }

  std::optional<std::string> callee_name(const Expr& callee, const Span& span) {
    if (auto* l = callee.as<expr::Label>()) return l->name;
    error(span, "indirect-call", "indirect calls cannot be encoded");
    return std::nullopt;
  }

  std::vector<VExpr> call_args(const std::vector<Expr>& args, std::vector<VStmt>& out) {
    std::vector<VExpr> v{vir::vref("heap"), vir::vref("device")};
    for (const auto& a : args)
      for (auto& w : value(prepare(a), out)) v.push_back(std::move(w));
    return v;
  }

  std::vector<VExpr> model_args(const std::string& method, std::vector<VExpr> rest) const {
    std::vector<VExpr> v;
    bool heap = !sh_.cfg.model_methods || sh_.cfg.model_methods->takes_heap(method);
    if (heap) v.push_back(vir::vref("heap"));
    v.push_back(vir::vref("device"));
    for (auto& r : rest) v.push_back(std::move(r));
    return v;
  }

  const DispatchEntry* dispatch(const Expr& address, unsigned size_bits, bool store, const Span& span) {
    auto [lo, hi] = value_interval(address, width(), sh_.cfg.base_addr);
    const DispatchEntry* entry = sh_.table.lookup(lo, hi);
    std::string where = lo == hi ? "address " + hex(lo) : "addresses " + hex(lo) + ".." + hex(hi);
    if (!entry) {
      bool overlaps = false;
      for (const auto& e : sh_.table.entries) overlaps = overlaps || (e.lo <= hi && lo <= e.hi);
      if (overlaps)
        error(span, "unresolved-shared-address",
              "shared access to " + where + " cannot be resolved to a single shared region");
      else
        error(span, "undeclared-shared-region", "undeclared shared region for " + where);
      return nullptr;
    }
    if (entry->decl.width_bits != size_bits) {
      error(span, "shared-width-mismatch",
            "shared region '" + entry->decl.name + "' is u" + std::to_string(entry->decl.width_bits) +
                " but is accessed with size " + std::to_string(size_bits));
      return nullptr;
    }
    if (store ? !permits_store(entry->decl.access) : !permits_load(entry->decl.access)) {
      error(span, "shared-mode-violation",
            std::string(store ? "store to " : "load from ") + std::string(to_string(entry->decl.access)) +
                " shared region '" + entry->decl.name + "'");
      return nullptr;
    }
    const std::string& method = store ? entry->store_method : entry->load_method;
    if (sh_.cfg.model_methods && !sh_.cfg.model_methods->has(method)) {
      error(span, "undeclared-model-method", "model method '" + method + "' is not declared by the models");
      return nullptr;
    }
    return entry;
  }

  std::vector<Annotation> peel_invariants(const Stmt*& body) {
    std::vector<Annotation> out;
    for (;;) {
      if (auto* a = body->as<stmt::Annot>(); a && a->annotation.kind == AnnotKind::Invariant) {
        out.push_back(a->annotation);
        static const Stmt skip = make_skip();
        body = &skip;
        return out;
      }
      auto* seq = body->as<stmt::Seq>();
      if (!seq) return out;
      auto* a = seq->first->as<stmt::Annot>();
      if (!a || a->annotation.kind != AnnotKind::Invariant) return out;
      out.push_back(a->annotation);
      body = &*seq->second;
    }
  }

  int lower(const Stmt& s, bool tail, std::vector<VStmt>& out) {
    Span saved = cur_span_;
    if (s.span.valid()) cur_span_ = s.span;
    int exits = lower_node(s, tail, out);
    cur_span_ = saved;
    return exits;
  }

  int lower_node(const Stmt& s, bool tail, std::vector<VStmt>& out) {
    const Span span = cur_span_;
    return std::visit(
        [&](const auto& n) -> int {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::Skip> || std::is_same_v<T, stmt::Tick>) {
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::Seq>) {
            int e1 = lower(*n.first, false, out);
            if (!e1) return lower(*n.second, tail, out);
            std::vector<VStmt> rest;
            int e2 = lower(*n.second, tail, rest);
            if (!rest.empty()) {
              Span rs = n.second->span.valid() ? n.second->span : span;
              push(out, vs::If{guard(e1), std::move(rest), {}}, rs);
            }
            return e1 | e2;
          } else if constexpr (std::is_same_v<T, stmt::Dec>) {
            Expr init = prepare(n.init);
            Shape shape = shape_of(init);
            auto words = value(init, out);
            Binding b{shape, names_.fresh_flat(n.name, shape_size(shape))};
            for (const auto& name : b.names) declare(name, span);
            assign_words(b.names, std::move(words), span, out);
            return scoped(n.name, std::move(b), *n.body, tail, out);
          } else if constexpr (std::is_same_v<T, stmt::Assign>) {
            auto words = value(prepare(n.value), out);
            auto* b = binding(n.name);
            if (!b) {
              error(span, "unbound-var", "unbound variable '" + n.name + "'");
              return 0;
            }
            assign_words(b->names, std::move(words), span, out);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::Store>) {
            Expr addr = prepare(n.address);
            auto words = value(prepare(n.value), out);
            VExpr a = word(addr, out);
            check_local(addr, words.size() * sh_.cfg.word_bytes(), span);
            align(a, span, out);
            for (std::size_t i = 0; i < words.size(); ++i)
              push(out, vs::HeapWrite{slot_index(a, i), std::move(words[i])}, span);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::StoreByte>) {
            Expr addr = prepare(n.address);
            VExpr a = word(addr, out);
            VExpr v = word(prepare(n.value), out);
            check_local(addr, 1, span);
            VExpr w = read_slot(a, 0, span, out);
            VExpr p = vir::vapp("pow256", {vir::vbin(vir::VOp::Mod, a, vir::vint(word_bytes()))});
            VExpr old_byte = vir::vbin(vir::VOp::Mod, vir::vbin(vir::VOp::Div, w, p), vir::vint(256));
            VExpr cleared = vir::vbin(vir::VOp::Sub, w, vir::vbin(vir::VOp::Mul, std::move(old_byte), p));
            VExpr merged = vir::vbin(vir::VOp::Add, std::move(cleared),
                                     vir::vbin(vir::VOp::Mul, vir::vbin(vir::VOp::Mod, std::move(v), vir::vint(256)), p));
            VExpr t = arith_assign(std::move(merged), span, out);
            push(out, vs::HeapWrite{slot_index(a, 0), std::move(t)}, span);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::If>) {
            VExpr c = cond(prepare(n.cond), out);
            std::vector<VStmt> then_body, else_body;
            int e = lower(*n.then_branch, tail, then_body);
            e |= lower(*n.else_branch, tail, else_body);
            if (then_body.empty() && else_body.empty()) return e;
            push(out, vs::If{std::move(c), std::move(then_body), std::move(else_body)}, span);
            return e;
          } else if constexpr (std::is_same_v<T, stmt::While>) {
            return lower_while(n, span, out);
          } else if constexpr (std::is_same_v<T, stmt::Break>) {
            auto& top = loops_.back();
            if (!top.brk) {
              top.brk = names_.numbered("brk");
              declare(*top.brk, span, "Bool");
            }
            push(out, vs::Assign{*top.brk, vir::vbool(true)}, span);
            return kBreak;
          } else if constexpr (std::is_same_v<T, stmt::Continue>) {
            auto& top = loops_.back();
            if (!top.cont) {
              top.cont = names_.numbered("cont");
              declare(*top.cont, span, "Bool");
            }
            push(out, vs::Assign{*top.cont, vir::vbool(true)}, span);
            return kContinue;
          } else if constexpr (std::is_same_v<T, stmt::Return>) {
            auto words = value(prepare(n.value), out);
            assign_words(ret_names_, std::move(words), span, out);
            if (tail) return 0;
            if (!ret_flag_) {
              ret_flag_ = names_.fresh("ret$done");
              declare(*ret_flag_, span, "Bool");
            }
            push(out, vs::Assign{*ret_flag_, vir::vbool(true)}, span);
            return kReturn;
          } else if constexpr (std::is_same_v<T, stmt::Raise>) {
            error(span, "raise-unsupported", "raise '" + n.exception + "' cannot appear in a verified function");
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::Call>) {
            auto callee = callee_name(n.callee, span);
            if (!callee) return 0;
            auto args = call_args(n.args, out);
            auto targets = call_targets(*callee, n.target, span);
            push(out, vs::Call{std::move(targets), method_name(*callee), std::move(args), vir::CallKind::Method, {}, 0}, span);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::DecCall>) {
            auto callee = callee_name(n.callee, span);
            if (!callee) return 0;
            auto args = call_args(n.args, out);
            Binding b{n.shape, names_.fresh_flat(n.name, shape_size(n.shape))};
            for (const auto& name : b.names) declare(name, span);
            push(out, vs::Call{b.names, method_name(*callee), std::move(args), vir::CallKind::Method, {}, 0}, span);
            return scoped(n.name, std::move(b), *n.body, tail, out);
          } else if constexpr (std::is_same_v<T, stmt::ShMemStore>) {
            Expr addr = prepare(n.address);
            const DispatchEntry* entry = dispatch(addr, n.size_bits, true, span);
            if (!entry) return 0;
            VExpr a = word(addr, out);
            VExpr v = word(prepare(n.value), out);
            if (n.size_bits < width()) {
              if (wrap()) {
                std::string t = temp(span);
                push(out,
                     vs::Assign{t, vir::vbin(vir::VOp::Mod, std::move(v), vir::vint(vir::pow2(n.size_bits))),
                                vir::AssignKind::Arith},
                     span);
                v = vir::vref(t);
              } else if (auto* lit = v.as<vir::Int>(); !lit || lit->value < 0 || lit->value >= vir::pow2(n.size_bits)) {
                push(out, vs::Assert{bounded(n.size_bits, v), vir::AssertKind::Bounds}, span);
              }
            }
            vs::Call call{{}, entry->store_method, model_args(entry->store_method, {std::move(a), std::move(v)}),
                          vir::CallKind::SharedStore, entry->decl.name, n.size_bits};
            push(out, std::move(call), span);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
            Expr addr = prepare(n.address);
            const DispatchEntry* entry = dispatch(addr, n.size_bits, false, span);
            if (!entry) return 0;
            auto* b = binding(n.target);
            if (!b) {
              error(span, "unbound-var", "unbound variable '" + n.target + "'");
              return 0;
            }
            VExpr a = word(addr, out);
            vs::Call call{{b->names.front()}, entry->load_method, model_args(entry->load_method, {std::move(a)}),
                          vir::CallKind::SharedLoad, entry->decl.name, n.size_bits};
            push(out, std::move(call), span);
            push(out, vs::Assume{bounded(n.size_bits, vir::vref(b->names.front()))}, span);
            return 0;
          } else if constexpr (std::is_same_v<T, stmt::ExtCall>) {
            std::string method = "ffi_" + n.name;
            if (sh_.cfg.model_methods && !sh_.cfg.model_methods->has(method)) {
              error(span, "undeclared-ffi-method",
                    "foreign call '@" + n.name + "' has no model method '" + method + "'");
              return 0;
            }
            std::vector<VExpr> args{vir::vref("heap"), vir::vref("device")};
            for (const Expr* e : {&n.in_ptr, &n.in_len, &n.out_ptr, &n.out_len}) args.push_back(word(prepare(*e), out));
            vs::Call call{{}, method, std::move(args), vir::CallKind::Foreign, n.name, 0};
            push(out, std::move(call), span);
            return 0;
          } else {
            const Annotation& a = n.annotation;
            if (!a.expr()) return 0;
            if (a.kind == AnnotKind::Assert) {
              push(out, vs::Assert{annot_bool(*a.expr()), vir::AssertKind::User}, span);
            } else if (a.kind == AnnotKind::Fold || a.kind == AnnotKind::Unfold) {
              push(out, vs::Fold{a.kind == AnnotKind::Unfold, annot(prepare(*a.expr())).e}, span);
            }
            return 0;
          }
        },
        s.node);
  }

  int scoped(const std::string& name, Binding b, const Stmt& body, bool tail, std::vector<VStmt>& out) {
    auto saved_env = env_;
    auto saved_consts = consts_;
    consts_.erase(name);
    env_[name] = std::move(b);
    int e = lower(body, tail, out);
    env_ = std::move(saved_env);
    consts_ = std::move(saved_consts);
    return e;
  }

  int lower_while(const stmt::While& n, const Span& span, std::vector<VStmt>& out) {
    const Stmt* body = &*n.body;
    auto invariants = peel_invariants(body);
    std::vector<VStmt> cond_stmts;
    VExpr c = cond(prepare(n.cond), cond_stmts);
    for (const auto& s : cond_stmts) out.push_back(s);

    std::vector<vs::Invariant> invs;
    for (const auto& a : invariants) invs.push_back({annot_bool(*a.expr()), a.span});

    loops_.push_back({});
    std::vector<VStmt> inner;
    int eb = lower(*body, false, inner);
    LoopFrame frame = loops_.back();

    std::vector<VStmt> loop_body;
    if (frame.cont) push(loop_body, vs::Assign{*frame.cont, vir::vbool(false)}, span);
    for (auto& s : inner) loop_body.push_back(std::move(s));
    if (!cond_stmts.empty()) {
      VExpr g = guard(eb & (kBreak | kReturn));
      if (g.is<vir::Bool>()) {
        for (auto& s : cond_stmts) loop_body.push_back(std::move(s));
      } else {
        push(loop_body, vs::If{std::move(g), std::move(cond_stmts), {}}, span);
      }
    }
    VExpr loop_cond = vir::vand(std::move(c), guard(eb & (kBreak | kReturn)));
    loops_.pop_back();

    if (frame.brk) push(out, vs::Assign{*frame.brk, vir::vbool(false)}, span);
    push(out, vs::While{std::move(loop_cond), std::move(invs), std::move(loop_body)}, span);
    return eb & kReturn;
  }

  Shared sh_;
  ConstEnv consts_;
  NameSupply names_;
  std::map<std::string, Binding> env_;
  std::vector<vir::VDecl> locals_;
  std::vector<LoopFrame> loops_;
  std::optional<std::string> ret_flag_;
  std::vector<std::string> ret_names_;
  const Function* fn_ = nullptr;
  Span cur_span_;
  bool free_vars_ = false;
  const std::map<std::string, Binding>* contract_env_ = nullptr;
  const Binding* contract_ret_ = nullptr;
};

}  // namespace

UnrollResult unroll_expr(const Expr& e, const EncodingConfig& cfg) {
  static const Program empty;
  DispatchTable table;
  std::map<std::string, Shape, std::less<>> shapes;
  ConstEnv consts;
  std::vector<Diagnostic> diags;
  std::vector<ResidualBitop> residual;
  std::set<std::string> helpers;
  Encoder enc({empty, cfg, table, shapes, consts, diags, residual, helpers});
  enc.allow_free_variables();
  UnrollResult r = enc.unroll(e);
  r.residual = std::move(residual);
  return r;
}

TranspileResult transpile_program(const Program& program, const EncodingConfig& cfg,
                                  const std::string& source_name) {
  TranspileResult r;
  r.doc.source_name = source_name;
  r.doc.word_width = cfg.word_width;
  r.doc.wrap = cfg.overflow == OverflowPolicy::Wrap;
  r.doc.rewrite_bitops = cfg.rewrite_bitops;
  if (!cfg.device_model.empty()) r.doc.imports.push_back(cfg.device_model);
  if (!cfg.neighbour_model.empty()) r.doc.imports.push_back(cfg.neighbour_model);

  if (cfg.word_width != 32 && cfg.word_width != 64) {
    r.diagnostics.push_back({{}, "word-width", "word width must be 32 or 64"});
    return r;
  }
  ConstEnv consts;
  for (const auto& c : program.constants) {
    if (auto v = eval_const(c.value, consts, cfg.word_width)) {
      consts[c.name] = *v;
      r.doc.defines.push_back({c.name, BigInt(*v), c.span});
    }
  }
  DispatchTable table = build_dispatch_table(program, consts, cfg.word_width);
  auto shapes = infer_return_shapes(program);
  for (const auto& f : program.functions) {
    Encoder enc({program, cfg, table, shapes, consts, r.diagnostics, r.residual.entries, r.doc.helpers});
    r.doc.methods.push_back(enc.function(f));
  }
  return r;
}

}  // namespace panverif
