#pragma once

// Runs one function on the reference interpreter and on its transpiled
// encoding with the same inputs, memory and environment, and classifies the
// pair of outcomes.

#include <string>
#include <vector>

#include "panverif/interp.hpp"
#include "panverif/transpile.hpp"
#include "vir_interp.hpp"

namespace panverif::testing {

enum class DiffVerdict {
  Agree,
  /// Fail mode only: the encoding stopped at a bounds assertion, i.e. the
  /// backend would report an overflow the interpreter wrapped.
  OverflowFlagged,
  /// The interpreter ran out of fuel first; its trace is a prefix of the
  /// encoding's (fuel is charged differently on the two sides).
  Inconclusive,
  Mismatch,
};

struct DiffResult {
  DiffVerdict verdict = DiffVerdict::Agree;
  std::string detail;
};

struct DiffCase {
  std::string function;
  std::vector<Word> args;  // one per flattened parameter word
  std::uint64_t oracle_seed = 0;
  std::uint64_t memory_seed = 0;
  std::uint64_t fuel = 100000;
};

DiffResult differential(const Program& program, const vir::VerifDoc& doc, OverflowPolicy policy,
                        const DiffCase& c);

}  // namespace panverif::testing
