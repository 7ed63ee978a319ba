#pragma once

// Tokeniser for Pancake concrete syntax. Private to the parser.

#include <cstddef>
#include <string>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/diagnostic.hpp"
#include "panverif/source.hpp"

namespace panverif::detail {

enum class Tok {
  End,
  Ident,
  Int,
  Punct,
  ShMemStore,  // !st8 .. !st64
  ShMemLoad,   // !ld8 .. !ld64
  AnnotOpen,   // /@
  AnnotClose,  // @/
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Word value = 0;          // Int
  unsigned size_bits = 0;  // ShMemStore / ShMemLoad
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by Tok::End
  std::vector<Diagnostic> diagnostics;
};

LexResult lex(const SourceFile& source);

}  // namespace panverif::detail
