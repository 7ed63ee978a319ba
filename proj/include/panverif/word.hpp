#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panverif/ast.hpp"

namespace panverif {

// Machine-word arithmetic modulo 2^width. Comparisons are unsigned.

/// nullopt on division or modulus by zero.
std::optional<Word> apply_binop(BinOp op, Word a, Word b, unsigned width);
Word apply_shift(ShiftKind kind, Word value, unsigned amount, unsigned width);
bool apply_cmp(CmpOp op, Word a, Word b);

using ConstEnv = std::map<std::string, Word, std::less<>>;

/// Folds an expression built from literals, named constants and word
/// operators. `base_addr` lets `@base` fold too; `@biw` always folds.
std::optional<Word> eval_const(const Expr& e, const ConstEnv& env, unsigned width,
                               std::optional<Word> base_addr = std::nullopt);

/// Top-level constants evaluated in declaration order. A constant that does
/// not fold (or repeats an earlier name) is left out.
ConstEnv constant_env(const Program& program);

}  // namespace panverif
