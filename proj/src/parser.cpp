#include "panverif/parser.hpp"

#include <set>
#include <string>

#include "lexer.hpp"

namespace panverif {
namespace {

using detail::Tok;
using detail::Token;

const std::set<std::string, std::less<>> kKeywords = {
    "var",  "if",   "else", "while", "break", "continue", "return", "raise", "tick", "fun",
    "export", "const", "skip", "st", "stb", "lds", "ldb", "true", "false"};

struct ParseError {
  Diagnostic diagnostic;
};

class Parser {
 public:
  Parser(const SourceFile& src, std::vector<Token> tokens, unsigned width)
      : src_(src), toks_(std::move(tokens)), width_(width) {}

  Program program() {
    Program prog;
    prog.word_width = width_;
    std::vector<Annotation> pending;
    while (!at(Tok::End)) {
      if (at(Tok::AnnotOpen)) {
        Annotation a = annotation();
        if (a.kind == AnnotKind::Shared) {
          prog.shared.push_back(std::get<SharedRegionDecl>(a.payload));
        } else if (a.kind == AnnotKind::Requires || a.kind == AnnotKind::Ensures ||
                   a.kind == AnnotKind::Region) {
          pending.push_back(std::move(a));
        } else {
          fail_at(a.span, "misplaced-annotation",
                  "'" + std::string(to_string(a.kind)) + "' annotation is not allowed at top level");
        }
      } else if (at_ident("const")) {
        prog.constants.push_back(const_decl());
      } else if (at_ident("fun") || at_ident("export")) {
        Function f = function();
        f.contract.insert(f.contract.begin(), std::make_move_iterator(pending.begin()),
                          std::make_move_iterator(pending.end()));
        pending.clear();
        prog.functions.push_back(std::move(f));
      } else {
        fail("expected 'fun', 'export', 'const' or an annotation, found " + describe(peek()));
      }
    }
    if (!pending.empty())
      fail_at(pending.front().span, "misplaced-annotation",
              "contract annotation is not followed by a function");
    return prog;
  }

  Expr standalone_expression(bool annotation) {
    in_annot_ = annotation;
    Expr e = expression();
    if (!at(Tok::End)) fail("unexpected " + describe(peek()) + " after expression");
    return e;
  }

 private:
  // -------------------------------------------------------------------------
  // Token plumbing

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool at_ident(std::string_view name, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == name;
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    last_end_ = t.end;
    return t;
  }

  // Splits a multi-character '<' / '>' token so that nested struct literals
  // such as `<<a, b>, c>` can open and close.
  bool take_angle(char c) {
    const Token& t = peek();
    if (t.kind != Tok::Punct || t.text.empty() || t.text[0] != c) return false;
    if (t.text.size() == 1) {
      advance();
      return true;
    }
    if (t.text.find_first_not_of(c) != std::string::npos) return false;
    Token rest = t;
    rest.text = t.text.substr(1);
    rest.begin = t.begin + 1;
    last_end_ = t.begin + 1;
    toks_[pos_] = rest;
    return true;
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail("expected '" + std::string(p) + "', found " + describe(peek()));
    advance();
  }

  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail(std::string("expected ") + what + ", found " + describe(t));
    if (kKeywords.count(t.text)) fail("'" + t.text + "' is a keyword and cannot be used as " + what);
    advance();
    return t.text;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of file";
      case Tok::AnnotOpen: return "'/@'";
      case Tok::AnnotClose: return "'@/'";
      default: return "'" + t.text + "'";
    }
  }

  Span span_from(std::size_t begin) const { return make_span(begin, last_end_); }
  Span make_span(std::size_t begin, std::size_t end) const {
    Span s;
    s.file = src_.shared_path();
    std::tie(s.line, s.col) = src_.location(begin);
    std::tie(s.end_line, s.end_col) = src_.location(end);
    return s;
  }

  [[noreturn]] void fail(std::string message) {
    const Token& t = peek();
    fail_at(make_span(t.begin, t.end), "syntax-error", std::move(message));
  }
  [[noreturn]] void fail_at(Span span, std::string code, std::string message) {
    throw ParseError{Diagnostic{std::move(span), std::move(code), std::move(message)}};
  }

  // -------------------------------------------------------------------------
  // Declarations

  ConstDecl const_decl() {
    std::size_t begin = peek().begin;
    advance();
    ConstDecl c;
    c.name = ident("a constant name");
    expect_punct("=");
    c.value = expression();
    expect_punct(";");
    c.span = span_from(begin);
    return c;
  }

  Function function() {
    std::size_t begin = peek().begin;
    Function f;
    if (at_ident("export")) {
      advance();
      f.exported = true;
    }
    if (!at_ident("fun")) fail("expected 'fun', found " + describe(peek()));
    advance();
    f.name = ident("a function name");
    expect_punct("(");
    if (!at_punct(")")) {
      while (true) {
        std::size_t pbegin = peek().begin;
        Param p;
        if (at(Tok::Int) || at_punct("{")) p.shape = shape();
        p.name = ident("a parameter name");
        p.span = span_from(pbegin);
        f.params.push_back(std::move(p));
        if (!at_punct(",")) break;
        advance();
      }
    }
    expect_punct(")");

    std::size_t body_begin = peek().begin;
    expect_punct("{");
    while (at(Tok::AnnotOpen)) {
      std::size_t save = pos_;
      std::size_t save_end = last_end_;
      advance();
      bool contract = at_ident("requires") || at_ident("ensures") || at_ident("region");
      pos_ = save;
      last_end_ = save_end;
      if (!contract) break;
      f.contract.push_back(annotation());
    }
    std::vector<Stmt> items = block_items();
    expect_punct("}");
    f.body = make_block(std::move(items), span_from(body_begin));
    f.span = span_from(begin);
    return f;
  }

  Shape shape() {
    if (at(Tok::Int)) {
      Word n = peek().value;
      if (n == 0 || n > 4096) fail("shape size must be between 1 and 4096");
      advance();
      if (n == 1) return Shape::word();
      return Shape::composite(std::vector<Shape>(n, Shape::word()));
    }
    if (at_punct("{")) {
      advance();
      std::vector<Shape> elems;
      while (true) {
        elems.push_back(shape());
        if (!at_punct(",")) break;
        advance();
      }
      expect_punct("}");
      return Shape::composite(std::move(elems));
    }
    fail("expected a shape, found " + describe(peek()));
  }

  // -------------------------------------------------------------------------
  // Annotations

  Annotation annotation() {
    std::size_t begin = peek().begin;
    advance();  // '/@'
    const Token& kt = peek();
    if (kt.kind != Tok::Ident) fail("expected an annotation kind, found " + describe(kt));
    auto kind = annot_kind_from_string(kt.text);
    if (!kind)
      fail_at(make_span(kt.begin, kt.end), "unknown-annotation",
              "unknown annotation kind '" + kt.text + "'");
    advance();
    Annotation a;
    a.kind = *kind;
    bool saved = in_annot_;
    switch (*kind) {
      case AnnotKind::Shared: {
        SharedRegionDecl d;
        d.access = access();
        const Token& wt = peek();
        if (wt.kind != Tok::Ident || (wt.text != "u8" && wt.text != "u16" && wt.text != "u32" &&
                                      wt.text != "u64"))
          fail("expected an access width (u8, u16, u32 or u64), found " + describe(wt));
        d.width_bits = static_cast<unsigned>(std::stoul(wt.text.substr(1)));
        advance();
        d.name = ident("a region name");
        d.range = range();
        d.span = span_from(begin);
        a.payload = std::move(d);
        break;
      }
      case AnnotKind::Region: {
        LocalRegionDecl d;
        d.access = access();
        d.name = ident("a region name");
        d.range = range();
        d.span = span_from(begin);
        a.payload = std::move(d);
        break;
      }
      default: {
        in_annot_ = true;
        Expr e = expression();
        in_annot_ = saved;
        if ((a.kind == AnnotKind::Fold || a.kind == AnnotKind::Unfold) && !e.is<expr::App>())
          fail_at(e.span, "syntax-error",
                  std::string(to_string(a.kind)) + " expects a predicate application");
        a.payload = std::move(e);
        break;
      }
    }
    if (!at(Tok::AnnotClose)) fail("expected '@/', found " + describe(peek()));
    advance();
    a.span = span_from(begin);
    // Region and shared payloads carry the full annotation span.
    if (auto* s = std::get_if<SharedRegionDecl>(&a.payload)) s->span = a.span;
    if (auto* r = std::get_if<LocalRegionDecl>(&a.payload)) r->span = a.span;
    return a;
  }

  Access access() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      if (t.text == "ro") return advance(), Access::ReadOnly;
      if (t.text == "wo") return advance(), Access::WriteOnly;
      if (t.text == "rw") return advance(), Access::ReadWrite;
    }
    fail("expected an access mode (ro, wo or rw), found " + describe(t));
  }

  AddressRange range() {
    std::size_t begin = peek().begin;
    if (!at_punct("[")) fail("expected '[' to start an address range, found " + describe(peek()));
    advance();
    try {
      AddressRange r{expression(), std::nullopt};
      if (at_punct("..")) {
        advance();
        r.hi = expression();
      }
      if (!at_punct("]")) fail("expected ']' or '..'");
      advance();
      return r;
    } catch (ParseError& e) {
      e.diagnostic.code = "malformed-range";
      e.diagnostic.message = "malformed address range: " + e.diagnostic.message;
      (void)begin;
      throw;
    }
  }

  // -------------------------------------------------------------------------
  // Statements

  // Items up to (not including) the closing '}'. A `var` declaration takes
  // the remaining items of the block as its body.
  std::vector<Stmt> block_items() {
    std::vector<Stmt> items;
    while (!at_punct("}")) {
      if (at(Tok::End)) fail("expected '}', found end of file");
      if (at_ident("var")) {
        items.push_back(var_decl());
        break;
      }
      items.push_back(statement());
    }
    return items;
  }

  Stmt var_decl() {
    std::size_t begin = peek().begin;
    advance();
    std::optional<Shape> sh;
    if (at(Tok::Int) || at_punct("{")) sh = shape();
    std::string name = ident("a variable name");
    expect_punct("=");
    Stmt s;
    if (call_ahead()) {
      stmt::DecCall dc{name, sh.value_or(Shape::word()), make_const(0), {}, make_skip()};
      call_tail(dc.callee, dc.args);
      expect_punct(";");
      s.span = span_from(begin);
      std::size_t body_begin = peek().begin;
      auto rest = block_items();
      dc.body = make_block(std::move(rest), make_span(body_begin, peek().begin));
      s.node = std::move(dc);
    } else {
      Expr init = expression();
      expect_punct(";");
      s.span = span_from(begin);
      std::size_t body_begin = peek().begin;
      auto rest = block_items();
      s.node = stmt::Dec{name, std::move(init), make_block(std::move(rest),
                                                           make_span(body_begin, peek().begin))};
    }
    return s;
  }

  // `f(` or `*` at the current position starts a call right-hand side.
  bool call_ahead() const {
    if (at_punct("*")) return true;
    return peek().kind == Tok::Ident && !kKeywords.count(peek().text) && at_punct("(", 1);
  }

  void call_tail(Expr& callee, std::vector<Expr>& args) {
    std::size_t begin = peek().begin;
    if (at_punct("*")) {
      advance();
      if (at_punct("(")) {
        advance();
        callee = expression();
        expect_punct(")");
      } else {
        std::string n = ident("a function pointer variable");
        callee = make_var(n, span_from(begin + 1));
      }
    } else {
      std::string n = ident("a function name");
      callee = make_label(n, span_from(begin));
    }
    expect_punct("(");
    if (!at_punct(")")) {
      while (true) {
        args.push_back(expression());
        if (!at_punct(",")) break;
        advance();
      }
    }
    expect_punct(")");
  }

  Stmt block_stmt() {
    std::size_t begin = peek().begin;
    expect_punct("{");
    auto items = block_items();
    expect_punct("}");
    return make_block(std::move(items), span_from(begin));
  }

  Stmt statement() {
    std::size_t begin = peek().begin;
    Stmt s;
    const Token& t = peek();
    if (t.kind == Tok::AnnotOpen) {
      s.node = stmt::Annot{annotation()};
    } else if (t.kind == Tok::ShMemStore) {
      unsigned bits = t.size_bits;
      advance();
      Expr a = expression();
      expect_punct(",");
      Expr v = expression();
      expect_punct(";");
      s.node = stmt::ShMemStore{bits, std::move(a), std::move(v)};
    } else if (t.kind == Tok::ShMemLoad) {
      unsigned bits = t.size_bits;
      advance();
      std::string target = ident("a variable name");
      expect_punct(",");
      Expr a = expression();
      expect_punct(";");
      s.node = stmt::ShMemLoad{bits, std::move(target), std::move(a)};
    } else if (at_punct("{")) {
      return block_stmt();
    } else if (at_punct("@")) {
      advance();
      std::string name = ident("a foreign function name");
      expect_punct("(");
      std::vector<Expr> args;
      while (true) {
        args.push_back(expression());
        if (!at_punct(",")) break;
        advance();
      }
      expect_punct(")");
      expect_punct(";");
      if (args.size() != 4)
        fail_at(span_from(begin), "syntax-error",
                "foreign call '@" + name + "' takes exactly 4 arguments");
      s.node = stmt::ExtCall{name, std::move(args[0]), std::move(args[1]), std::move(args[2]),
                             std::move(args[3])};
    } else if (at_punct("*")) {
      stmt::Call c{std::nullopt, make_const(0), {}};
      call_tail(c.callee, c.args);
      expect_punct(";");
      s.node = std::move(c);
    } else if (t.kind == Tok::Ident) {
      if (t.text == "skip") {
        advance();
        expect_punct(";");
        s.node = stmt::Skip{};
      } else if (t.text == "break") {
        advance();
        expect_punct(";");
        s.node = stmt::Break{};
      } else if (t.text == "continue") {
        advance();
        expect_punct(";");
        s.node = stmt::Continue{};
      } else if (t.text == "tick") {
        advance();
        expect_punct(";");
        s.node = stmt::Tick{};
      } else if (t.text == "return") {
        advance();
        Expr v = expression();
        expect_punct(";");
        s.node = stmt::Return{std::move(v)};
      } else if (t.text == "raise") {
        advance();
        std::string exn = ident("an exception name");
        Expr v = expression();
        expect_punct(";");
        s.node = stmt::Raise{exn, std::move(v)};
      } else if (t.text == "st" || t.text == "stb") {
        bool byte = t.text == "stb";
        advance();
        Expr a = expression();
        expect_punct(",");
        Expr v = expression();
        expect_punct(";");
        if (byte)
          s.node = stmt::StoreByte{std::move(a), std::move(v)};
        else
          s.node = stmt::Store{std::move(a), std::move(v)};
      } else if (t.text == "if") {
        advance();
        expect_punct("(");
        Expr c = expression();
        expect_punct(")");
        Stmt then_branch = block_stmt();
        Stmt else_branch = make_skip();
        if (at_ident("else")) {
          advance();
          else_branch = at_ident("if") ? statement() : block_stmt();
        }
        s.node = stmt::If{std::move(c), std::move(then_branch), std::move(else_branch)};
      } else if (t.text == "while") {
        advance();
        expect_punct("(");
        Expr c = expression();
        expect_punct(")");
        Stmt body = block_stmt();
        s.node = stmt::While{std::move(c), std::move(body)};
      } else if (t.text == "var") {
        fail("unexpected 'var'");
      } else if (at_punct("(", 1)) {
        stmt::Call c{std::nullopt, make_const(0), {}};
        call_tail(c.callee, c.args);
        expect_punct(";");
        s.node = std::move(c);
      } else if (at_punct("=", 1)) {
        std::string name = ident("a variable name");
        advance();  // '='
        if (call_ahead()) {
          stmt::Call c{name, make_const(0), {}};
          call_tail(c.callee, c.args);
          s.node = std::move(c);
        } else {
          s.node = stmt::Assign{name, expression()};
        }
        expect_punct(";");
      } else {
        fail("expected a statement, found " + describe(t));
      }
    } else {
      fail("expected a statement, found " + describe(t));
    }
    s.span = span_from(begin);
    return s;
  }

  // -------------------------------------------------------------------------
  // Expressions, C precedence from loosest to tightest.

  Expr expression() { return implies(); }

  Expr implies() {
    std::size_t begin = peek().begin;
    Expr lhs = logic_or();
    if (at_punct("==>")) {
      require_annot("'==>'");
      advance();
      Expr rhs = implies();
      return Expr{expr::Logic{LogicOp::Implies, std::move(lhs), std::move(rhs)}, span_from(begin)};
    }
    return lhs;
  }

  Expr logic_or() {
    std::size_t begin = peek().begin;
    Expr lhs = logic_and();
    while (at_punct("||")) {
      require_annot("'||'");
      advance();
      Expr rhs = logic_and();
      lhs = Expr{expr::Logic{LogicOp::Or, std::move(lhs), std::move(rhs)}, span_from(begin)};
    }
    return lhs;
  }

  Expr logic_and() {
    std::size_t begin = peek().begin;
    Expr lhs = bit_or();
    while (at_punct("&&")) {
      require_annot("'&&'");
      advance();
      Expr rhs = bit_or();
      lhs = Expr{expr::Logic{LogicOp::And, std::move(lhs), std::move(rhs)}, span_from(begin)};
    }
    return lhs;
  }

  template <class Next>
  Expr binary_level(std::initializer_list<std::pair<const char*, BinOp>> ops, Next next) {
    std::size_t begin = peek().begin;
    Expr lhs = (this->*next)();
    bool fresh = false;
    while (true) {
      const std::pair<const char*, BinOp>* hit = nullptr;
      for (const auto& o : ops)
        if (at_punct(o.first)) hit = &o;
      if (!hit) break;
      advance();
      Expr rhs = (this->*next)();
      BinOp op = hit->second;
      auto* chain = lhs.as<expr::Op>();
      if (fresh && is_associative(op) && chain && chain->op == op) {
        chain->args.push_back(std::move(rhs));
        lhs.span = span_from(begin);
      } else {
        std::vector<Expr> args;
        args.push_back(std::move(lhs));
        args.push_back(std::move(rhs));
        lhs = make_op(op, std::move(args), span_from(begin));
        fresh = true;
      }
    }
    return lhs;
  }

  Expr bit_or() { return binary_level({{"|", BinOp::Or}}, &Parser::bit_xor); }
  Expr bit_xor() { return binary_level({{"^", BinOp::Xor}}, &Parser::bit_and); }
  Expr bit_and() { return binary_level({{"&", BinOp::And}}, &Parser::equality); }

  Expr equality() {
    std::size_t begin = peek().begin;
    Expr lhs = relational();
    while (at_punct("==") || at_punct("!=")) {
      CmpOp op = at_punct("==") ? CmpOp::Eq : CmpOp::Ne;
      advance();
      Expr rhs = relational();
      lhs = make_cmp(op, std::move(lhs), std::move(rhs), span_from(begin));
    }
    return lhs;
  }

  Expr relational() {
    std::size_t begin = peek().begin;
    Expr lhs = shift();
    while (at_punct("<") || at_punct("<=") || at_punct(">") || at_punct(">=")) {
      const std::string& p = peek().text;
      CmpOp op = p == "<" ? CmpOp::Lt : p == "<=" ? CmpOp::Le : p == ">" ? CmpOp::Gt : CmpOp::Ge;
      advance();
      Expr rhs = shift();
      lhs = make_cmp(op, std::move(lhs), std::move(rhs), span_from(begin));
    }
    return lhs;
  }

  Expr shift() {
    std::size_t begin = peek().begin;
    Expr lhs = additive();
    while (at_punct("<<") || at_punct(">>") || at_punct(">>>")) {
      const std::string& p = peek().text;
      ShiftKind k = p == "<<" ? ShiftKind::Lsl : p == ">>" ? ShiftKind::Lsr : ShiftKind::Asr;
      advance();
      if (!at(Tok::Int)) fail("shift amount must be an integer literal, found " + describe(peek()));
      Word amount = peek().value;
      if (amount >= width_)
        fail("shift amount " + std::to_string(amount) + " is not below the word width");
      advance();
      lhs = make_shift(k, std::move(lhs), static_cast<std::uint32_t>(amount), span_from(begin));
    }
    return lhs;
  }

  Expr additive() {
    return binary_level({{"+", BinOp::Add}, {"-", BinOp::Sub}}, &Parser::multiplicative);
  }
  Expr multiplicative() {
    return binary_level({{"*", BinOp::Mul}, {"/", BinOp::Div}, {"%", BinOp::Mod}}, &Parser::unary);
  }

  Expr unary() {
    std::size_t begin = peek().begin;
    if (at_punct("!")) {
      advance();
      Expr inner = unary();
      if (in_annot_) return Expr{expr::Not{std::move(inner)}, span_from(begin)};
      return make_cmp(CmpOp::Eq, std::move(inner), make_const(0), span_from(begin));
    }
    if (at_ident("lds")) {
      advance();
      Shape sh = shape();
      Expr addr = unary();
      return make_load(std::move(sh), std::move(addr), span_from(begin));
    }
    if (at_ident("ldb")) {
      advance();
      Expr addr = unary();
      return make_load_byte(std::move(addr), span_from(begin));
    }
    return postfix();
  }

  Expr postfix() {
    std::size_t begin = peek().begin;
    Expr e = primary();
    while (true) {
      if (at_punct(".")) {
        advance();
        if (at(Tok::Int)) {
          Word idx = peek().value;
          advance();
          e = make_field(static_cast<std::uint32_t>(idx), std::move(e), span_from(begin));
        } else if (peek().kind == Tok::Ident) {
          require_annot("member access");
          std::string name = advance().text;
          e = Expr{expr::Member{std::move(e), name}, span_from(begin)};
        } else {
          fail("expected a field index after '.', found " + describe(peek()));
        }
      } else if (at_punct("[") && in_annot_) {
        advance();
        Expr idx = expression();
        expect_punct("]");
        e = Expr{expr::Index{std::move(e), std::move(idx)}, span_from(begin)};
      } else {
        break;
      }
    }
    return e;
  }

  Expr primary() {
    std::size_t begin = peek().begin;
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      if (t.value > word_mask(width_))
        fail("integer literal " + t.text + " does not fit in a " + std::to_string(width_) +
             "-bit word");
      Word v = t.value;
      advance();
      return make_const(v, span_from(begin));
    }
    if (at_punct("(")) {
      advance();
      Expr e = expression();
      expect_punct(")");
      return e;
    }
    if (take_angle('<')) {
      std::vector<Expr> elems;
      while (true) {
        elems.push_back(additive());
        if (!at_punct(",")) break;
        advance();
      }
      if (!take_angle('>')) fail("expected '>' to close struct literal, found " + describe(peek()));
      return make_struct(std::move(elems), span_from(begin));
    }
    if (at_punct("&")) {
      advance();
      std::string name = ident("a function name");
      return make_label(name, span_from(begin));
    }
    if (at_punct("@")) {
      advance();
      if (at_ident("base")) {
        advance();
        return Expr{expr::BaseAddr{}, span_from(begin)};
      }
      if (at_ident("biw")) {
        advance();
        return Expr{expr::BytesInWord{}, span_from(begin)};
      }
      fail("expected 'base' or 'biw' after '@', found " + describe(peek()));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") {
        Word v = t.text == "true" ? 1 : 0;
        advance();
        return make_const(v, span_from(begin));
      }
      if (in_annot_ && t.text == "old" && at_punct("(", 1)) {
        advance();
        advance();
        Expr inner = expression();
        expect_punct(")");
        return Expr{expr::Old{std::move(inner)}, span_from(begin)};
      }
      std::string name = ident("an expression");
      if (at_punct("(")) {
        if (!in_annot_) fail("function calls are statements and cannot appear in expressions");
        advance();
        std::vector<Expr> args;
        if (!at_punct(")")) {
          while (true) {
            args.push_back(expression());
            if (!at_punct(",")) break;
            advance();
          }
        }
        expect_punct(")");
        return make_app(name, std::move(args), span_from(begin));
      }
      return make_var(name, span_from(begin));
    }
    fail("expected an expression, found " + describe(t));
  }

  void require_annot(const std::string& what) {
    if (!in_annot_) fail(what + " is only allowed inside annotations");
  }

  const SourceFile& src_;
  std::vector<Token> toks_;
  unsigned width_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  bool in_annot_ = false;
};

}  // namespace

ParseResult parse_program(const SourceFile& source, unsigned word_width) {
  auto lexed = detail::lex(source);
  ParseResult result;
  result.diagnostics = std::move(lexed.diagnostics);
  if (!result.diagnostics.empty()) return result;
  Parser parser(source, std::move(lexed.tokens), word_width);
  try {
    result.program = parser.program();
  } catch (const ParseError& e) {
    result.diagnostics.push_back(e.diagnostic);
  }
  return result;
}

ExprParseResult parse_expression(const SourceFile& source, unsigned word_width, bool annotation) {
  auto lexed = detail::lex(source);
  ExprParseResult result;
  result.diagnostics = std::move(lexed.diagnostics);
  if (!result.diagnostics.empty()) return result;
  Parser parser(source, std::move(lexed.tokens), word_width);
  try {
    result.expr = parser.standalone_expression(annotation);
  } catch (const ParseError& e) {
    result.diagnostics.push_back(e.diagnostic);
  }
  return result;
}

}  // namespace panverif
