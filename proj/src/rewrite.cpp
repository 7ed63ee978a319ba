#include <algorithm>
#include <functional>
#include <regex>

#include "panverif/transpile.hpp"

namespace panverif {

using nlohmann::json;
using vir::BigInt;

bool ModelMethods::takes_heap(std::string_view name) const {
  auto it = methods.find(name);
  if (it == methods.end()) return true;
  return !it->second.empty() && it->second.front() == "heap";
}

void ModelMethods::merge(const ModelMethods& other) {
  for (const auto& [k, v] : other.methods) methods[k] = v;
}

ModelMethods scan_model_methods(const std::string& text) {
  ModelMethods out;
  static const std::regex header(R"(\bmethod\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\(([^)]*)\))");
  static const std::regex param(R"(([A-Za-z_$][A-Za-z0-9_$]*)\s*:)");
  for (std::sregex_iterator it(text.begin(), text.end(), header), end; it != end; ++it) {
    std::vector<std::string> params;
    std::string list = (*it)[2];
    for (std::sregex_iterator p(list.begin(), list.end(), param); p != end; ++p)
      params.push_back((*p)[1]);
    out.methods[(*it)[1]] = std::move(params);
  }
  return out;
}

const DispatchEntry* DispatchTable::lookup(Word lo, Word hi) const {
  const DispatchEntry* found = nullptr;
  for (const auto& e : entries) {
    if (e.lo <= lo && hi <= e.hi) {
      if (found) return nullptr;
      found = &e;
    }
  }
  return found;
}

DispatchTable build_dispatch_table(const Program& program, const ConstEnv& env, unsigned width) {
  DispatchTable t;
  for (const auto& s : program.shared) {
    auto lo = eval_const(s.range.lo, env, width);
    auto hi = eval_const(s.range.upper(), env, width);
    if (!lo || !hi || *lo > *hi) continue;
    t.entries.push_back({s, *lo, *hi, s.store_method(), s.load_method()});
  }
  return t;
}

json ResidualReport::to_json() const {
  json items = json::array();
  for (const auto& r : entries) {
    items.push_back(json{{"function", r.function},
                         {"op", r.op},
                         {"helper", r.helper},
                         {"file", r.span.file_name()},
                         {"line", r.span.line},
                         {"col", r.span.col}});
  }
  return json{{"residual_bitops", items}, {"count", entries.size()}};
}

namespace {

template <class F>
Expr map_children(const Expr& e, F&& f) {
  Expr out = e;
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, expr::Struct> || std::is_same_v<T, expr::Op> ||
                      std::is_same_v<T, expr::App>) {
          auto& list = [&]() -> std::vector<Expr>& {
            if constexpr (std::is_same_v<T, expr::Struct>)
              return n.elements;
            else
              return n.args;
          }();
          for (auto& x : list) x = f(x);
        } else if constexpr (std::is_same_v<T, expr::Field>) {
          *n.base = f(*n.base);
        } else if constexpr (std::is_same_v<T, expr::Load> || std::is_same_v<T, expr::LoadByte>) {
          *n.address = f(*n.address);
        } else if constexpr (std::is_same_v<T, expr::Cmp> || std::is_same_v<T, expr::Logic>) {
          *n.lhs = f(*n.lhs);
          *n.rhs = f(*n.rhs);
        } else if constexpr (std::is_same_v<T, expr::Shift>) {
          *n.operand = f(*n.operand);
        } else if constexpr (std::is_same_v<T, expr::Old> || std::is_same_v<T, expr::Not>) {
          *n.inner = f(*n.inner);
        } else if constexpr (std::is_same_v<T, expr::Member>) {
          *n.base = f(*n.base);
        } else if constexpr (std::is_same_v<T, expr::Index>) {
          *n.base = f(*n.base);
          *n.index = f(*n.index);
        }
      },
      out.node);
  return out;
}

bool foldable_form(const Expr& e) {
  return e.is<expr::Const>() || e.is<expr::Var>() || e.is<expr::Op>() || e.is<expr::Cmp>() ||
         e.is<expr::Shift>() || e.is<expr::BaseAddr>() || e.is<expr::BytesInWord>();
}

// log2 of m + 1 when m is 2^k - 1 with 0 < k < width, else 0
unsigned low_mask_bits(Word m, unsigned width) {
  if (m == 0 || (m & (m + 1)) != 0) return 0;
  unsigned k = 0;
  while (k < 64 && ((m >> k) & 1)) ++k;
  return k < width ? k : 0;
}

}  // namespace

Expr fold_constants(const Expr& e, const ConstEnv& env, unsigned width, std::optional<Word> base_addr) {
  if (foldable_form(e) && !e.is<expr::Const>()) {
    if (auto v = eval_const(e, env, width, base_addr)) return make_const(*v, e.span);
  }
  return map_children(e, [&](const Expr& c) { return fold_constants(c, env, width, base_addr); });
}

namespace {

// memory reads and division by a non-literal can fail at run time, so they
// must not be dropped
bool may_fail(const Expr& e) {
  bool found = false;
  std::function<Expr(const Expr&)> walk = [&](const Expr& x) {
    if (x.is<expr::Load>() || x.is<expr::LoadByte>()) found = true;
    if (auto* op = x.as<expr::Op>(); op && (op->op == BinOp::Div || op->op == BinOp::Mod)) {
      for (std::size_t i = 1; i < op->args.size(); ++i) {
        auto* c = op->args[i].as<expr::Const>();
        if (!c || c->value == 0) found = true;
      }
    }
    map_children(x, walk);
    return x;
  };
  walk(e);
  return found;
}

}  // namespace

Expr rewrite_bitop(const Expr& e, unsigned width) {
  Expr r = map_children(e, [&](const Expr& c) { return rewrite_bitop(c, width); });
  if (auto* op = r.as<expr::Op>(); op && op->op == BinOp::And) {
    std::vector<Expr> rest;
    std::vector<Word> masks;
    for (const auto& a : op->args) {
      if (auto* c = a.as<expr::Const>())
        masks.push_back(c->value);
      else
        rest.push_back(a);
    }
    if (masks.size() == 1 && masks[0] == 0) {
      if (std::none_of(rest.begin(), rest.end(), may_fail)) return make_const(0, r.span);
      Expr x = rest.size() == 1 ? rest[0] : make_op(BinOp::And, rest, r.span);
      return make_op(BinOp::Mod, {std::move(x), make_const(1, r.span)}, r.span);
    }
    if (masks.size() == 1 && !rest.empty()) {
      if (unsigned k = low_mask_bits(masks[0], width)) {
        Expr x = rest.size() == 1 ? rest[0] : make_op(BinOp::And, rest, r.span);
        return make_op(BinOp::Mod, {std::move(x), make_const(Word{1} << k, r.span)}, r.span);
      }
    }
    return r;
  }
  if (auto* s = r.as<expr::Shift>()) {
    if (s->kind == ShiftKind::Lsr)
      return make_op(BinOp::Div, {*s->operand, make_const(Word{1} << s->amount, r.span)}, r.span);
    if (s->kind == ShiftKind::Lsl) {
      if (s->amount == 0) return make_op(BinOp::Mul, {*s->operand, make_const(1, r.span)}, r.span);
      Expr low = make_op(BinOp::Mod, {*s->operand, make_const(Word{1} << (width - s->amount), r.span)},
                         r.span);
      return make_op(BinOp::Mul, {std::move(low), make_const(Word{1} << s->amount, r.span)}, r.span);
    }
  }
  return r;
}

bool has_bitops(const Expr& e) {
  bool found = false;
  std::function<Expr(const Expr&)> walk = [&](const Expr& x) {
    if (auto* op = x.as<expr::Op>();
        op && (op->op == BinOp::And || op->op == BinOp::Or || op->op == BinOp::Xor))
      found = true;
    if (x.is<expr::Shift>()) found = true;
    map_children(x, walk);
    return x;
  };
  walk(e);
  return found;
}

std::pair<Word, Word> value_interval(const Expr& e, unsigned width, Word base_addr) {
  const Word mask = word_mask(width);
  using I = std::pair<BigInt, BigInt>;
  const I full{0, BigInt(mask)};
  std::function<I(const Expr&)> iv = [&](const Expr& x) -> I {
    auto clamp = [&](I r) { return r.second > BigInt(mask) || r.first < 0 ? full : r; };
    if (auto* c = x.as<expr::Const>()) return {c->value, c->value};
    if (x.is<expr::BaseAddr>()) return {base_addr, base_addr};
    if (x.is<expr::BytesInWord>()) return {width / 8, width / 8};
    if (x.is<expr::Cmp>()) return {0, 1};
    if (x.is<expr::LoadByte>()) return {0, 255};
    if (auto* s = x.as<expr::Shift>()) {
      I a = iv(*s->operand);
      if (s->kind == ShiftKind::Lsr) return {a.first >> s->amount, a.second >> s->amount};
      if (s->kind == ShiftKind::Lsl) return clamp({a.first << s->amount, a.second << s->amount});
      return full;
    }
    if (auto* op = x.as<expr::Op>()) {
      I acc = iv(op->args.front());
      for (std::size_t i = 1; i < op->args.size(); ++i) {
        I b = iv(op->args[i]);
        switch (op->op) {
          case BinOp::Add: acc = clamp({acc.first + b.first, acc.second + b.second}); break;
          case BinOp::Sub: acc = clamp({acc.first - b.second, acc.second - b.first}); break;
          case BinOp::Mul: acc = clamp({acc.first * b.first, acc.second * b.second}); break;
          case BinOp::Div:
            if (b.first == 0) return full;
            acc = {acc.first / b.second, acc.second / b.first};
            break;
          case BinOp::Mod:
            if (b.first == 0) return full;
            if (acc.second < b.first) break;
            acc = {0, b.second - 1};
            break;
          case BinOp::And: acc = {0, std::min(acc.second, b.second)}; break;
          default: return full;
        }
      }
      return acc;
    }
    return full;
  };
  I r = iv(e);
  return {static_cast<Word>(r.first), static_cast<Word>(r.second)};
}

nlohmann::json source_map_json(const vir::RenderedDoc& rendered) {
  json m = json::object();
  for (std::size_t i = 0; i < rendered.line_spans.size(); ++i) {
    const Span& s = rendered.line_spans[i];
    m[std::to_string(i + 1)] =
        s.valid() ? json{{"file", s.file_name()}, {"line", s.line}, {"col", s.col}} : json(nullptr);
  }
  return m;
}

}  // namespace panverif
