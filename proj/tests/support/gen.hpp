#pragma once

// Random Pancake expressions and programs for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/interp.hpp"

namespace panverif::testing {

using Rng = std::mt19937_64;

/// Biased towards boundary values: 0, 1, 2^k, 2^k - 1, all ones.
Word interesting_word(Rng& rng, unsigned width);

/// Word-valued code expression over `vars` built from constants, @base,
/// @biw, all binary operators, comparisons and shifts.
Expr random_word_expr(Rng& rng, const std::vector<std::string>& vars, unsigned width, int depth);

struct GenOptions {
  unsigned width = 64;
  int functions = 4;
  int block_len = 4;
  int max_depth = 3;
  int max_params = 3;
  bool memory = true;
  bool misaligned = false;
  bool shared = true;
  bool ffi = true;
  bool raise = false;
  bool ticks = true;
  /// Loops on arbitrary conditions and calls to any function (including
  /// recursion); otherwise loops are counted and calls go to later functions.
  bool unbounded = false;
  bool annotations = true;
};

/// Shared regions used by generated programs.
inline constexpr Word kGenDevBase = 0x40000000;   // rw u32, 4 registers
inline constexpr Word kGenStatAddr = 0x40001000;  // ro u64

/// Text of a validated-by-construction program. Functions are named f0, f1...
std::string random_program_text(Rng& rng, const GenOptions& opts);

/// A deterministic environment driven by a seed: load replies and foreign
/// call output bytes are hashes of (seed, request count).
class SeededOracle : public EnvOracle {
 public:
  explicit SeededOracle(std::uint64_t seed, bool reject_some = false)
      : seed_(seed), reject_some_(reject_some) {}
  IoReply respond(const IoRequest& request) override;

 private:
  std::uint64_t next();
  std::uint64_t seed_;
  std::uint64_t count_ = 0;
  bool reject_some_;
};

}  // namespace panverif::testing
