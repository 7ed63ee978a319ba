#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "panverif/ast.hpp"
#include "panverif/diagnostic.hpp"
#include "panverif/verif.hpp"
#include "panverif/word.hpp"

namespace panverif {

enum class OverflowPolicy { Fail, Wrap };

/// Method signatures found in a model file: name -> parameter names.
struct ModelMethods {
  std::map<std::string, std::vector<std::string>, std::less<>> methods;

  bool has(std::string_view name) const { return methods.count(name) != 0; }
  bool takes_heap(std::string_view name) const;
  void merge(const ModelMethods& other);
};

/// Scans verification-language text for `method name(params)` headers.
ModelMethods scan_model_methods(const std::string& text);

struct EncodingConfig {
  unsigned word_width = 64;
  OverflowPolicy overflow = OverflowPolicy::Fail;
  bool rewrite_bitops = true;
  /// Value `@base` folds to; matches the interpreter's default memory base.
  Word base_addr = 0x10000;
  std::string device_model;
  std::string neighbour_model;
  /// When set, shared dispatch and foreign calls are checked against it.
  std::optional<ModelMethods> model_methods;

  unsigned word_bytes() const { return word_width / 8; }
};

struct DispatchEntry {
  SharedRegionDecl decl;
  Word lo = 0;
  Word hi = 0;
  std::string store_method;
  std::string load_method;
};

struct DispatchTable {
  std::vector<DispatchEntry> entries;

  /// The entry whose range contains all of [lo, hi], if exactly one does.
  const DispatchEntry* lookup(Word lo, Word hi) const;
};

DispatchTable build_dispatch_table(const Program& program, const ConstEnv& env, unsigned width);

struct ResidualBitop {
  std::string function;
  std::string op;
  std::string helper;
  Span span;
};

struct ResidualReport {
  std::vector<ResidualBitop> entries;
  nlohmann::json to_json() const;
};

/// Reduces constant subtrees (named constants included) to literals modulo
/// 2^width. Anything that does not fold is rebuilt with folded children.
Expr fold_constants(const Expr& e, const ConstEnv& env, unsigned width,
                    std::optional<Word> base_addr = std::nullopt);

/// x & (2^k - 1) -> x % 2^k, x & 0 -> 0, x >> k -> x / 2^k and
/// x << k -> (x % 2^(width-k)) * 2^k. Other bitwise operators are left alone.
Expr rewrite_bitop(const Expr& e, unsigned width);

/// True if the expression still contains &, |, ^ or a shift.
bool has_bitops(const Expr& e);

/// Inclusive range of values the expression can take, computed over the
/// folded expression with unknowns spanning the whole word.
std::pair<Word, Word> value_interval(const Expr& e, unsigned width, Word base_addr);

struct UnrollResult {
  std::vector<vir::VStmt> stmts;
  vir::VExpr atom;
  std::vector<std::string> temps;
  std::vector<ResidualBitop> residual;
};

/// Three-address form of a word-shaped, annotation-free code expression.
/// Variables keep their names; memory reads go through the heap encoding.
UnrollResult unroll_expr(const Expr& e, const EncodingConfig& cfg);

struct TranspileResult {
  vir::VerifDoc doc;
  ResidualReport residual;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Expects a validated program.
TranspileResult transpile_program(const Program& program, const EncodingConfig& cfg,
                                  const std::string& source_name = "");

/// `{"<line>": {"file", "line", "col"} | null, ...}` over every output line.
nlohmann::json source_map_json(const vir::RenderedDoc& rendered);

}  // namespace panverif
