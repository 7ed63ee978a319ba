#include "panverif/validate.hpp"

#include <set>

#include "panverif/word.hpp"

namespace panverif {
namespace {

using Env = std::map<std::string, Shape, std::less<>>;
using ShapeMap = std::map<std::string, Shape, std::less<>>;

bool is_invariant(const Stmt& s) {
  auto* a = s.as<stmt::Annot>();
  return a && a->annotation.kind == AnnotKind::Invariant;
}

class Checker {
 public:
  Checker(const Program& p, const ConstEnv& consts, const ShapeMap& returns, bool report)
      : p_(p), width_(p.word_width), consts_(consts), returns_(returns), report_(report) {}

  std::vector<Diagnostic> diags;

  // Shape of the first return statement seen by the last check_function.
  std::optional<Shape> first_return;

  void check_function(const Function& f) {
    first_return.reset();
    Env env;
    std::set<std::string> seen;
    for (const auto& param : f.params) {
      if (!seen.insert(param.name).second)
        error(param.span, "duplicate-param",
              "parameter '" + param.name + "' is declared twice in '" + f.name + "'");
      env[param.name] = param.shape;
    }
    for (const auto& a : f.contract) {
      switch (a.kind) {
        case AnnotKind::Requires:
          annot(*a.expr(), env, false);
          break;
        case AnnotKind::Ensures:
          annot(*a.expr(), env, true);
          break;
        case AnnotKind::Region: {
          const auto& r = std::get<LocalRegionDecl>(a.payload);
          annot(r.range.lo, env, false);
          if (r.range.hi) annot(*r.range.hi, env, false);
          break;
        }
        default:
          error(a.span, "misplaced-annotation",
                "'" + std::string(to_string(a.kind)) + "' cannot be part of a function contract");
      }
    }
    stmt(f.body, env, 0, false);
  }

 private:
  void error(const Span& span, std::string code, std::string message) {
    if (report_) diags.push_back(Diagnostic{span, std::move(code), std::move(message)});
  }

  const Shape* lookup(const Env& env, std::string_view name) const {
    auto it = env.find(name);
    return it == env.end() ? nullptr : &it->second;
  }

  std::optional<Shape> var_shape(const Expr& e, std::string_view name, const Env& env,
                                 bool annot_mode, bool allow_retval) {
    if (auto* s = lookup(env, name)) return *s;
    if (consts_.count(name) || p_.find_constant(name)) return Shape::word();
    if (annot_mode && (name == "device" || name == "heap" || (allow_retval && name == "retval")))
      return Shape::word();
    error(e.span, "unbound-var", "unbound variable '" + std::string(name) + "'");
    return std::nullopt;
  }

  bool require_word(const Expr& e, const Env& env, bool annot_mode = false,
                    bool allow_retval = false) {
    auto sh = expr(e, env, annot_mode, allow_retval);
    if (!sh) return false;
    if (!sh->is_word()) {
      error(e.span, "shape-mismatch", "expected a word but this has shape " + to_string(*sh));
      return false;
    }
    return true;
  }

  void annot(const Expr& e, const Env& env, bool allow_retval) { expr(e, env, true, allow_retval); }

  std::optional<Shape> expr(const Expr& e, const Env& env, bool annot_mode = false,
                            bool allow_retval = false) {
    if (!annot_mode && e.is_annotation_only()) {
      error(e.span, "annotation-syntax-in-code",
            "annotation-only expression used in executable code");
      return std::nullopt;
    }
    auto word = [&](bool ok) -> std::optional<Shape> {
      if (!ok) return std::nullopt;
      return Shape::word();
    };
    return std::visit(
        [&](const auto& n) -> std::optional<Shape> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, expr::Const>) {
            if (n.value > word_mask(width_)) {
              error(e.span, "literal-range", "literal does not fit in the word width");
              return std::nullopt;
            }
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::Var>) {
            return var_shape(e, n.name, env, annot_mode, allow_retval);
          } else if constexpr (std::is_same_v<T, expr::Label>) {
            if (!p_.find_function(n.name)) {
              error(e.span, "unknown-function", "unknown function '" + n.name + "'");
              return std::nullopt;
            }
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::Struct>) {
            if (n.elements.empty()) {
              error(e.span, "empty-struct", "struct literal needs at least one element");
              return std::nullopt;
            }
            std::vector<Shape> elems;
            bool ok = true;
            for (const auto& el : n.elements) {
              auto sh = expr(el, env, annot_mode, allow_retval);
              if (sh)
                elems.push_back(*sh);
              else
                ok = false;
            }
            if (!ok) return std::nullopt;
            return Shape::composite(std::move(elems));
          } else if constexpr (std::is_same_v<T, expr::Field>) {
            auto base = expr(*n.base, env, annot_mode, allow_retval);
            if (!base) return std::nullopt;
            if (base->is_word() || base->elements().size() <= n.index) {
              error(e.span, "field-out-of-range",
                    "field " + std::to_string(n.index) + " is out of range for shape " +
                        to_string(*base));
              return std::nullopt;
            }
            return base->elements()[n.index];
          } else if constexpr (std::is_same_v<T, expr::Load>) {
            if (!require_word(*n.address, env, annot_mode, allow_retval)) return std::nullopt;
            return n.shape;
          } else if constexpr (std::is_same_v<T, expr::LoadByte>) {
            return word(require_word(*n.address, env, annot_mode, allow_retval));
          } else if constexpr (std::is_same_v<T, expr::Op>) {
            bool ok = true;
            bool binary_only = !is_associative(n.op);
            if (n.args.size() < 2 || (binary_only && n.args.size() != 2)) {
              error(e.span, "op-arity",
                    "operator '" + std::string(to_string(n.op)) + "' has " +
                        std::to_string(n.args.size()) + " operands");
              ok = false;
            }
            for (const auto& a : n.args) ok = require_word(a, env, annot_mode, allow_retval) && ok;
            return word(ok);
          } else if constexpr (std::is_same_v<T, expr::Cmp>) {
            bool a = require_word(*n.lhs, env, annot_mode, allow_retval);
            bool b = require_word(*n.rhs, env, annot_mode, allow_retval);
            return word(a && b);
          } else if constexpr (std::is_same_v<T, expr::Shift>) {
            bool ok = require_word(*n.operand, env, annot_mode, allow_retval);
            if (n.amount >= width_) {
              error(e.span, "shift-amount", "shift amount " + std::to_string(n.amount) +
                                                " is not below the word width");
              ok = false;
            }
            return word(ok);
          } else if constexpr (std::is_same_v<T, expr::BaseAddr> ||
                               std::is_same_v<T, expr::BytesInWord>) {
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::App>) {
            for (const auto& a : n.args) expr(a, env, true, allow_retval);
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::Old>) {
            return expr(*n.inner, env, true, allow_retval);
          } else if constexpr (std::is_same_v<T, expr::Logic>) {
            expr(*n.lhs, env, true, allow_retval);
            expr(*n.rhs, env, true, allow_retval);
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::Not>) {
            expr(*n.inner, env, true, allow_retval);
            return Shape::word();
          } else if constexpr (std::is_same_v<T, expr::Member>) {
            // Members name model-side state; only the base is resolved here.
            if (auto* v = n.base->template as<expr::Var>()) {
              if (lookup(env, v->name) || consts_.count(v->name) ||
                  is_reserved_annotation_name(v->name))
                return Shape::word();
            }
            expr(*n.base, env, true, allow_retval);
            return Shape::word();
          } else {
            static_assert(std::is_same_v<T, expr::Index>);
            expr(*n.base, env, true, allow_retval);
            expr(*n.index, env, true, allow_retval);
            return Shape::word();
          }
        },
        e.node);
  }

  // Checks a call's callee and arguments; returns the callee's result shape
  // when it is statically known.
  std::optional<Shape> call(const Span& span, const Expr& callee, const std::vector<Expr>& args,
                            const Env& env) {
    std::vector<std::optional<Shape>> arg_shapes;
    for (const auto& a : args) arg_shapes.push_back(expr(a, env));
    auto* label = callee.as<expr::Label>();
    if (!label) {
      require_word(callee, env);
      return std::nullopt;
    }
    const Function* f = p_.find_function(label->name);
    if (!f) {
      error(callee.span, "unknown-function", "unknown function '" + label->name + "'");
      return std::nullopt;
    }
    if (f->params.size() != args.size()) {
      error(span, "arity-mismatch",
            "'" + f->name + "' takes " + std::to_string(f->params.size()) + " arguments, given " +
                std::to_string(args.size()));
    } else {
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (arg_shapes[i] && !(*arg_shapes[i] == f->params[i].shape))
          error(args[i].span, "shape-mismatch",
                "argument " + std::to_string(i + 1) + " of '" + f->name + "' has shape " +
                    to_string(*arg_shapes[i]) + ", expected " + to_string(f->params[i].shape));
      }
    }
    auto it = returns_.find(f->name);
    if (it == returns_.end()) return std::nullopt;
    return it->second;
  }

  void assign_target(const Span& span, const std::string& name, const std::optional<Shape>& shape,
                     const Env& env) {
    const Shape* target = lookup(env, name);
    if (!target) {
      if (consts_.count(name) || p_.find_constant(name))
        error(span, "assign-to-const", "cannot assign to constant '" + name + "'");
      else
        error(span, "unbound-var", "unbound variable '" + name + "'");
      return;
    }
    if (shape && !(*shape == *target))
      error(span, "shape-mismatch",
            "'" + name + "' has shape " + to_string(*target) + " but is assigned a value of shape " +
                to_string(*shape));
  }

  void opsize(const Span& span, unsigned bits) {
    if ((bits != 8 && bits != 16 && bits != 32 && bits != 64) || bits > width_)
      error(span, "opsize",
            "shared access size " + std::to_string(bits) + " is not supported at word width " +
                std::to_string(width_));
  }

  void stmt(const Stmt& s, const Env& env, int loops, bool loop_head) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::Skip> || std::is_same_v<T, stmt::Tick>) {
          } else if constexpr (std::is_same_v<T, stmt::Break>) {
            if (loops == 0) error(s.span, "break-outside-loop", "break outside loop");
          } else if constexpr (std::is_same_v<T, stmt::Continue>) {
            if (loops == 0) error(s.span, "continue-outside-loop", "continue outside loop");
          } else if constexpr (std::is_same_v<T, stmt::Dec>) {
            auto sh = expr(n.init, env);
            Env inner = env;
            inner[n.name] = sh.value_or(Shape::word());
            stmt(*n.body, inner, loops, false);
          } else if constexpr (std::is_same_v<T, stmt::Assign>) {
            assign_target(s.span, n.name, expr(n.value, env), env);
          } else if constexpr (std::is_same_v<T, stmt::Store>) {
            require_word(n.address, env);
            expr(n.value, env);
          } else if constexpr (std::is_same_v<T, stmt::StoreByte>) {
            require_word(n.address, env);
            require_word(n.value, env);
          } else if constexpr (std::is_same_v<T, stmt::Seq>) {
            stmt(*n.first, env, loops, loop_head);
            stmt(*n.second, env, loops, loop_head && is_invariant(*n.first));
          } else if constexpr (std::is_same_v<T, stmt::If>) {
            require_word(n.cond, env);
            stmt(*n.then_branch, env, loops, false);
            stmt(*n.else_branch, env, loops, false);
          } else if constexpr (std::is_same_v<T, stmt::While>) {
            require_word(n.cond, env);
            stmt(*n.body, env, loops + 1, true);
          } else if constexpr (std::is_same_v<T, stmt::Call>) {
            auto result = call(s.span, n.callee, n.args, env);
            if (n.target) assign_target(s.span, *n.target, result, env);
          } else if constexpr (std::is_same_v<T, stmt::Raise>) {
            expr(n.value, env);
          } else if constexpr (std::is_same_v<T, stmt::Return>) {
            auto sh = expr(n.value, env);
            if (!sh) return;
            if (!first_return) {
              first_return = *sh;
            } else if (!(*first_return == *sh)) {
              error(s.span, "return-shape",
                    "returns shape " + to_string(*sh) + " but an earlier return has shape " +
                        to_string(*first_return));
            }
          } else if constexpr (std::is_same_v<T, stmt::ShMemStore>) {
            opsize(s.span, n.size_bits);
            require_word(n.address, env);
            require_word(n.value, env);
          } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
            opsize(s.span, n.size_bits);
            require_word(n.address, env);
            assign_target(s.span, n.target, Shape::word(), env);
          } else if constexpr (std::is_same_v<T, stmt::DecCall>) {
            auto result = call(s.span, n.callee, n.args, env);
            if (result && !(*result == n.shape))
              error(s.span, "shape-mismatch",
                    "'" + n.name + "' is declared with shape " + to_string(n.shape) +
                        " but the call returns shape " + to_string(*result));
            Env inner = env;
            inner[n.name] = n.shape;
            stmt(*n.body, inner, loops, false);
          } else if constexpr (std::is_same_v<T, stmt::ExtCall>) {
            require_word(n.in_ptr, env);
            require_word(n.in_len, env);
            require_word(n.out_ptr, env);
            require_word(n.out_len, env);
          } else {
            static_assert(std::is_same_v<T, stmt::Annot>);
            const Annotation& a = n.annotation;
            switch (a.kind) {
              case AnnotKind::Invariant:
                if (!loop_head)
                  error(a.span, "misplaced-annotation",
                        "invariant must come first in a while body");
                annot(*a.expr(), env, false);
                break;
              case AnnotKind::Assert:
              case AnnotKind::Fold:
              case AnnotKind::Unfold:
                annot(*a.expr(), env, false);
                break;
              default:
                error(a.span, "misplaced-annotation",
                      "'" + std::string(to_string(a.kind)) +
                          "' is only allowed at top level or in a function contract");
            }
          }
        },
        s.node);
  }

  const Program& p_;
  unsigned width_;
  const ConstEnv& consts_;
  const ShapeMap& returns_;
  bool report_;
};

ShapeMap infer_returns(const Program& p, const ConstEnv& consts) {
  ShapeMap returns;
  for (std::size_t round = 0; round <= p.functions.size(); ++round) {
    bool changed = false;
    for (const auto& f : p.functions) {
      Checker c(p, consts, returns, false);
      c.check_function(f);
      Shape sh = c.first_return.value_or(Shape::word());
      auto it = returns.find(f.name);
      if (it == returns.end()) {
        returns.emplace(f.name, sh);
        changed = true;
      } else if (!(it->second == sh)) {
        it->second = sh;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return returns;
}

}  // namespace

bool is_reserved_annotation_name(std::string_view name) {
  return name == "device" || name == "heap" || name == "retval";
}

std::map<std::string, Shape, std::less<>> infer_return_shapes(const Program& program) {
  return infer_returns(program, constant_env(program));
}

std::vector<Diagnostic> validate_program(const Program& p) {
  std::vector<Diagnostic> diags;
  auto error = [&](const Span& span, std::string code, std::string message) {
    diags.push_back(Diagnostic{span, std::move(code), std::move(message)});
  };
  if (p.word_width != 32 && p.word_width != 64)
    error({}, "word-width", "word width must be 32 or 64");

  ConstEnv consts;
  for (const auto& c : p.constants) {
    if (consts.count(c.name)) {
      error(c.span, "duplicate-const", "constant '" + c.name + "' is defined twice");
      continue;
    }
    auto v = eval_const(c.value, consts, p.word_width);
    if (!v) {
      error(c.span, "non-constant",
            "constant '" + c.name + "' does not fold to a word from literals and earlier constants");
      continue;
    }
    consts[c.name] = *v;
  }

  struct Folded {
    const SharedRegionDecl* decl;
    Word lo, hi;
  };
  std::vector<Folded> folded;
  std::set<std::string> region_names;
  for (const auto& s : p.shared) {
    if (!region_names.insert(s.name).second)
      error(s.span, "duplicate-region", "shared region '" + s.name + "' is declared twice");
    if (s.width_bits > p.word_width)
      error(s.span, "shared-width",
            "shared region '" + s.name + "' is wider than the machine word");
    auto lo = eval_const(s.range.lo, consts, p.word_width);
    auto hi = eval_const(s.range.upper(), consts, p.word_width);
    if (!lo || !hi) {
      error(s.span, "non-constant-range",
            "range of shared region '" + s.name + "' does not fold to constants");
      continue;
    }
    if (*lo > *hi) {
      error(s.span, "empty-range", "shared region '" + s.name + "' has lower bound above upper");
      continue;
    }
    for (const auto& other : folded) {
      if (*lo <= other.hi && other.lo <= *hi)
        error(s.span, "overlapping-shared-regions",
              "overlapping shared regions '" + other.decl->name + "' and '" + s.name + "'");
    }
    folded.push_back({&s, *lo, *hi});
  }

  std::set<std::string> fn_names;
  for (const auto& f : p.functions) {
    if (!fn_names.insert(f.name).second)
      error(f.span, "duplicate-function", "function '" + f.name + "' is defined twice");
  }

  ShapeMap returns = infer_returns(p, consts);
  for (const auto& f : p.functions) {
    Checker c(p, consts, returns, true);
    c.check_function(f);
    diags.insert(diags.end(), c.diags.begin(), c.diags.end());
  }
  return diags;
}

}  // namespace panverif
