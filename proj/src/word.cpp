#include "panverif/word.hpp"

namespace panverif {

std::optional<Word> apply_binop(BinOp op, Word a, Word b, unsigned width) {
  const Word mask = word_mask(width);
  a &= mask;
  b &= mask;
  switch (op) {
    case BinOp::Add: return (a + b) & mask;
    case BinOp::Sub: return (a - b) & mask;
    case BinOp::Mul: return (a * b) & mask;
    case BinOp::Div:
      if (b == 0) return std::nullopt;
      return a / b;
    case BinOp::Mod:
      if (b == 0) return std::nullopt;
      return a % b;
    case BinOp::And: return a & b;
    case BinOp::Or: return a | b;
    case BinOp::Xor: return a ^ b;
  }
  return std::nullopt;
}

Word apply_shift(ShiftKind kind, Word value, unsigned amount, unsigned width) {
  const Word mask = word_mask(width);
  value &= mask;
  if (amount >= width) return kind == ShiftKind::Asr && (value >> (width - 1)) ? mask : 0;
  switch (kind) {
    case ShiftKind::Lsl: return (value << amount) & mask;
    case ShiftKind::Lsr: return value >> amount;
    case ShiftKind::Asr: {
      Word r = value >> amount;
      if (amount > 0 && (value >> (width - 1)) & 1) r |= (mask << (width - amount)) & mask;
      return r;
    }
  }
  return 0;
}

bool apply_cmp(CmpOp op, Word a, Word b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

std::optional<Word> eval_const(const Expr& e, const ConstEnv& env, unsigned width,
                               std::optional<Word> base_addr) {
  auto rec = [&](const Expr& x) { return eval_const(x, env, width, base_addr); };
  if (auto* c = e.as<expr::Const>()) return c->value & word_mask(width);
  if (auto* v = e.as<expr::Var>()) {
    auto it = env.find(v->name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }
  if (e.is<expr::BytesInWord>()) return Word{width / 8};
  if (e.is<expr::BaseAddr>()) return base_addr;
  if (auto* op = e.as<expr::Op>()) {
    if (op->args.empty()) return std::nullopt;
    auto acc = rec(op->args[0]);
    for (std::size_t i = 1; acc && i < op->args.size(); ++i) {
      auto rhs = rec(op->args[i]);
      if (!rhs) return std::nullopt;
      acc = apply_binop(op->op, *acc, *rhs, width);
    }
    return acc;
  }
  if (auto* c = e.as<expr::Cmp>()) {
    auto a = rec(*c->lhs);
    auto b = rec(*c->rhs);
    if (!a || !b) return std::nullopt;
    return Word{apply_cmp(c->op, *a, *b) ? 1u : 0u};
  }
  if (auto* s = e.as<expr::Shift>()) {
    auto a = rec(*s->operand);
    if (!a) return std::nullopt;
    return apply_shift(s->kind, *a, s->amount, width);
  }
  return std::nullopt;
}

ConstEnv constant_env(const Program& program) {
  ConstEnv env;
  for (const auto& c : program.constants) {
    if (env.count(c.name)) continue;
    if (auto v = eval_const(c.value, env, program.word_width)) env[c.name] = *v;
  }
  return env;
}

}  // namespace panverif
