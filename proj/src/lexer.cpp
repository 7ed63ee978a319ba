#include "lexer.hpp"

#include <array>
#include <cctype>
#include <string_view>

namespace panverif::detail {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Longest first.
constexpr std::array<std::string_view, 34> kPuncts = {
    "==>", ">>>", "..", "<=", ">=", "==", "!=", "<<", ">>", "&&", "||", "(", ")", "{", "}", "[",
    "]",   "<",   ">",  "=",  "+",  "-",  "*",  "/",  "%",  "&",  "|",  "^", "!", ",", ";", ".",
    "@",   ":"};

class Lexer {
 public:
  explicit Lexer(const SourceFile& source) : src_(source), text_(source.text()) {}

  LexResult run() {
    std::size_t annot_open = 0;
    bool in_annot = false;
    while (true) {
      skip_trivia();
      if (pos_ >= text_.size()) break;
      std::size_t start = pos_;
      char c = text_[pos_];

      if (starts_with("/@")) {
        if (in_annot) error(start, start + 2, "nested annotation delimiter '/@'");
        in_annot = true;
        annot_open = start;
        pos_ += 2;
        push(Tok::AnnotOpen, start, "/@");
        continue;
      }
      if (starts_with("@/")) {
        if (!in_annot) error(start, start + 2, "unbalanced annotation delimiter '@/'");
        in_annot = false;
        pos_ += 2;
        push(Tok::AnnotClose, start, "@/");
        continue;
      }
      if (c == '!' && lex_shmem(start)) continue;
      if (ident_start(c)) {
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        push(Tok::Ident, start, text_.substr(start, pos_ - start));
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_int(start);
        continue;
      }
      bool matched = false;
      for (auto p : kPuncts) {
        if (starts_with(p)) {
          pos_ += p.size();
          push(Tok::Punct, start, std::string(p));
          matched = true;
          break;
        }
      }
      if (!matched) {
        ++pos_;
        error(start, pos_, std::string("unexpected character '") + c + "'");
      }
    }
    if (in_annot) error(annot_open, annot_open + 2, "unterminated annotation: missing '@/'");
    Token end;
    end.kind = Tok::End;
    end.begin = end.end = text_.size();
    out_.tokens.push_back(end);
    return std::move(out_);
  }

 private:
  bool starts_with(std::string_view s) const { return text_.compare(pos_, s.size(), s) == 0; }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (starts_with("//")) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (starts_with("/*")) {
        std::size_t start = pos_;
        auto close = text_.find("*/", pos_ + 2);
        if (close == std::string::npos) {
          error(start, start + 2, "unterminated block comment");
          pos_ = text_.size();
        } else {
          pos_ = close + 2;
        }
      } else {
        break;
      }
    }
  }

  bool lex_shmem(std::size_t start) {
    std::size_t p = start + 1;
    std::size_t q = p;
    while (q < text_.size() && ident_char(text_[q])) ++q;
    std::string_view word(text_.data() + p, q - p);
    for (unsigned bits : {8u, 16u, 32u, 64u}) {
      for (auto [prefix, kind] : {std::pair{"st", Tok::ShMemStore}, {"ld", Tok::ShMemLoad}}) {
        if (word == std::string(prefix) + std::to_string(bits)) {
          pos_ = q;
          push(kind, start, text_.substr(start, q - start));
          out_.tokens.back().size_bits = bits;
          return true;
        }
      }
    }
    return false;
  }

  void lex_int(std::size_t start) {
    unsigned base = 10;
    if (starts_with("0x") || starts_with("0X")) {
      base = 16;
      pos_ += 2;
    } else if (starts_with("0b") || starts_with("0B")) {
      base = 2;
      pos_ += 2;
    }
    std::size_t digits_start = pos_;
    Word value = 0;
    bool overflow = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      unsigned digit;
      if (c >= '0' && c <= '9') {
        digit = static_cast<unsigned>(c - '0');
      } else if (base == 16 && std::isxdigit(static_cast<unsigned char>(c))) {
        digit = static_cast<unsigned>(std::tolower(c) - 'a' + 10);
      } else if (c == '_') {
        ++pos_;
        continue;
      } else {
        break;
      }
      if (digit >= base) break;
      if (value > (~Word{0} - digit) / base) overflow = true;
      value = value * base + digit;
      ++pos_;
    }
    if (pos_ < text_.size() && ident_char(text_[pos_])) {
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      error(start, pos_, "malformed integer literal");
      return;
    }
    if (pos_ == digits_start) {
      error(start, pos_, "malformed integer literal");
      return;
    }
    if (overflow) {
      error(start, pos_, "integer literal does not fit in 64 bits");
      return;
    }
    push(Tok::Int, start, text_.substr(start, pos_ - start));
    out_.tokens.back().value = value;
  }

  void push(Tok kind, std::size_t start, std::string text) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.begin = start;
    t.end = pos_;
    out_.tokens.push_back(std::move(t));
  }

  void error(std::size_t begin, std::size_t end, std::string message) {
    Span span;
    span.file = src_.shared_path();
    std::tie(span.line, span.col) = src_.location(begin);
    std::tie(span.end_line, span.end_col) = src_.location(end);
    out_.diagnostics.push_back(Diagnostic{span, "lex-error", std::move(message)});
  }

  const SourceFile& src_;
  const std::string& text_;
  std::size_t pos_ = 0;
  LexResult out_;
};

}  // namespace

LexResult lex(const SourceFile& source) { return Lexer(source).run(); }

}  // namespace panverif::detail
