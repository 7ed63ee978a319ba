#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gen.hpp"
#include "oracles.hpp"
#include "panverif/interp.hpp"
#include "panverif/parser.hpp"
#include "panverif/transpile.hpp"
#include "panverif/validate.hpp"
#include "vir_interp.hpp"

using namespace panverif;
using namespace panverif::testing;

namespace {

Program program(const std::string& text, unsigned width = 64) {
  auto r = parse_program(SourceFile("t.pnk", text), width);
  INFO(format(r.diagnostics));
  REQUIRE(r.ok());
  auto v = validate_program(*r.program);
  INFO(format(v));
  REQUIRE(v.empty());
  return *r.program;
}

TranspileResult transpile(const std::string& text, EncodingConfig cfg = {}) {
  cfg.word_width = cfg.word_width ? cfg.word_width : 64;
  return transpile_program(program(text, cfg.word_width), cfg, "t.pnk");
}

TranspileResult transpile_ok(const std::string& text, EncodingConfig cfg = {}) {
  auto r = transpile(text, cfg);
  INFO(format(r.diagnostics));
  REQUIRE(r.ok());
  return r;
}

std::vector<std::string> lines_of(const std::vector<vir::VStmt>& stmts) {
  vir::VerifDoc doc;
  vir::VerifMethod m;
  m.name = "probe";
  m.body = stmts;
  doc.methods.push_back(m);
  std::string text = vir::render(doc).text;
  auto open = text.find("method probe");
  std::istringstream in(text.substr(text.find("{\n", open) + 2));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line) && line != "}") out.push_back(line.substr(2));
  return out;
}

std::vector<std::string> body_lines(const vir::VerifDoc& doc, const std::string& method) {
  const auto* m = doc.find_method(method);
  REQUIRE(m);
  return lines_of(m->body);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Expr x() { return make_var("x"); }

}  // namespace

TEST_CASE("constant folding reduces modulo the word size and nothing more") {
  ConstEnv env;
  CHECK(fold_constants(make_op(BinOp::Add, {make_const(4096), make_const(4)}), env, 64) == make_const(4100));
  CHECK(fold_constants(make_op(BinOp::Mul, {make_const(Word{1} << 63), make_const(2)}), env, 64) == make_const(0));
  Expr x0 = make_op(BinOp::Add, {x(), make_const(0)});
  CHECK(fold_constants(x0, env, 64) == x0);
  env["N"] = 7;
  CHECK(fold_constants(make_op(BinOp::Add, {x(), make_op(BinOp::Mul, {make_var("N"), make_const(2)})}), env, 64) ==
        make_op(BinOp::Add, {x(), make_const(14)}));
  CHECK(fold_constants(Expr{expr::BaseAddr{}, {}}, env, 64, Word{0x10000}) == make_const(0x10000));
}

TEST_CASE("bitop rewriting patterns") {
  CHECK(rewrite_bitop(make_op(BinOp::And, {x(), make_const(255)}), 64) ==
        make_op(BinOp::Mod, {x(), make_const(256)}));
  CHECK(rewrite_bitop(make_op(BinOp::And, {make_const(255), x()}), 64) ==
        make_op(BinOp::Mod, {x(), make_const(256)}));
  CHECK(rewrite_bitop(make_op(BinOp::And, {x(), make_const(0)}), 64) == make_const(0));
  CHECK(rewrite_bitop(make_shift(ShiftKind::Lsr, x(), 3), 64) == make_op(BinOp::Div, {x(), make_const(8)}));
  CHECK(rewrite_bitop(make_shift(ShiftKind::Lsl, x(), 4), 32) ==
        make_op(BinOp::Mul, {make_op(BinOp::Mod, {x(), make_const(Word{1} << 28)}), make_const(16)}));
  Expr stays = make_op(BinOp::Or, {x(), make_const(1)});
  CHECK(rewrite_bitop(stays, 64) == stays);
  CHECK(has_bitops(stays));
  Expr not_mask = make_op(BinOp::And, {x(), make_const(6)});
  CHECK(rewrite_bitop(not_mask, 64) == not_mask);
  CHECK(rewrite_bitop(make_shift(ShiftKind::Asr, x(), 2), 64).is<expr::Shift>());
  CHECK_FALSE(has_bitops(rewrite_bitop(make_op(BinOp::And, {x(), make_const(0xffff)}), 64)));
}

TEST_CASE("rewritten forms agree with bitvectors for k = 8 over all 16-bit inputs") {
  Expr masked = rewrite_bitop(make_op(BinOp::And, {x(), make_const(255)}), 64);
  Expr shifted = rewrite_bitop(make_shift(ShiftKind::Lsr, x(), 8), 64);
  for (Word v = 0; v < 65536; ++v) {
    VarMap vars{{"x", v}};
    auto a = int_eval(masked, vars);
    auto b = int_eval(shifted, vars);
    REQUIRE(a);
    REQUIRE(b);
    REQUIRE(*a == (Bitvec::of(v, 64) & Bitvec::of(255, 64)).value());
    REQUIRE(*b == Bitvec::of(v, 64).lshr(8).value());
  }
}

TEST_CASE("three-address unrolling asserts bounds after every arithmetic step") {
  Expr e = make_op(BinOp::Mul, {make_op(BinOp::Add, {make_var("a"), make_var("b")}), make_var("c")});
  auto r = unroll_expr(e, EncodingConfig{});
  CHECK(lines_of(r.stmts) == std::vector<std::string>{"t$1 := a + b", "assert bounded64(t$1)",
                                                      "t$2 := t$1 * c", "assert bounded64(t$2)"});
  CHECK(r.atom == vir::vref("t$2"));
  CHECK(r.temps == std::vector<std::string>{"t$1", "t$2"});

  auto lit = unroll_expr(make_const(5), EncodingConfig{});
  CHECK(lit.stmts.empty());
  CHECK(lit.atom == vir::vint(5));

  EncodingConfig wrap;
  wrap.overflow = OverflowPolicy::Wrap;
  wrap.word_width = 32;
  CHECK(lines_of(unroll_expr(e, wrap).stmts) ==
        std::vector<std::string>{"t$1 := (a + b) % 4294967296", "t$2 := t$1 * c % 4294967296"});
}

TEST_CASE("residual bitops become uninterpreted calls with a bounds assumption") {
  auto r = unroll_expr(make_op(BinOp::Or, {x(), make_var("y")}), EncodingConfig{});
  CHECK(lines_of(r.stmts) == std::vector<std::string>{"t$1 := bw_or64(x, y)", "assume bounded64(t$1)"});
  REQUIRE(r.residual.size() == 1);
  CHECK(r.residual[0].helper == "bw_or64");

  EncodingConfig off;
  off.rewrite_bitops = false;
  auto kept = unroll_expr(make_op(BinOp::And, {x(), make_const(255)}), off);
  CHECK(kept.residual.size() == 1);
}

TEST_CASE("word loads become aligned slot reads") {
  EncodingConfig cfg;
  auto r = unroll_expr(make_load(Shape::word(), make_const(64)), cfg);
  auto lines = lines_of(r.stmts);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "assert 64 % 8 == 0");
  CHECK(lines[1] == "t$1 := slot(heap, 8).val");
  CHECK(lines[2] == "assume bounded64(t$1)");

  auto b = unroll_expr(make_load_byte(make_const(9)), cfg);
  auto blines = lines_of(b.stmts);
  CHECK(std::find(blines.begin(), blines.end(), "t$1 := slot(heap, 1).val") != blines.end());
  REQUIRE(blines.size() == 4);
  CHECK(blines[2] == "t$2 := t$1 \\ pow256(9 % 8) % 256");
}

TEST_CASE("byte loads match the interpreter on concrete memory") {
  std::mt19937_64 rng(9);
  Program p = program("fun f(k) { /@ region rw m[0..15] @/ return ldb (k % 16); }");
  EncodingConfig cfg;
  cfg.base_addr = 0;
  auto t = transpile_program(p, cfg, "t.pnk");
  REQUIRE(t.ok());
  InterpConfig icfg;
  icfg.memory_base = 0;
  icfg.memory_size = 16;
  VirConfig vcfg;
  vcfg.memory_base = 0;
  vcfg.memory_size = 16;
  for (int round = 0; round < 20; ++round) {
    Interpreter in(p, icfg);
    VirMachine vm(t.doc, vcfg);
    for (std::size_t i = 0; i < 16; ++i) in.memory()[i] = vm.memory[i] = static_cast<std::uint8_t>(rng());
    for (Word k = 0; k < 16; ++k) {
      PermissiveOracle o1, o2;
      auto a = in.run("f", {Value::word(k)}, o1, 100);
      auto b = vm.run("f", {vir::BigInt(k)}, o2);
      REQUIRE(a.returned());
      INFO(b.summary());
      REQUIRE(b.returned());
      CHECK(flatten(*a.value()) == std::get<std::vector<vir::BigInt>>(b.outcome));
    }
  }
}

TEST_CASE("region annotations become quantified permissions") {
  auto r = transpile_ok("fun f() { /@ region rw buf[0..4095] @/ /@ region ro tbl[@base..@base + 63] @/ return 0; }");
  const auto* m = r.doc.find_method("f");
  REQUIRE(m);
  REQUIRE(m->requires_.size() == 2);
  CHECK(vir::render_expr(m->requires_[0].cond) ==
        "forall i$: Int :: { slot(heap, i$) } 0 <= i$ && i$ <= 511 ==> acc(slot(heap, i$).val, write)");
  CHECK(vir::render_expr(m->requires_[1].cond) ==
        "forall i$: Int :: { slot(heap, i$) } 8192 <= i$ && i$ <= 8199 ==> acc(slot(heap, i$).val, 1/2)");
  CHECK(m->ensures.size() == 3);
}

TEST_CASE("constant local accesses outside the declared regions are diagnosed") {
  auto r = transpile("fun f() { /@ region rw buf[@base..@base + 63] @/ st @base + 64, 1; return 0; }");
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].code == "outside-regions");
  CHECK(transpile("fun f(a) { /@ region rw buf[@base..@base + 63] @/ st @base + a, 1; return 0; }").ok());
}

TEST_CASE("shared accesses dispatch to model methods") {
  auto r = transpile_ok(R"(
/@ shared rw u64 rx_free[0x50000000..0x5000003f] @/
fun f(i) {
  var v = 0;
  !ld64 v, 0x50000000 + (i % 8) * 8;
  !st64 0x50000008, v;
  return v;
})");
  auto lines = body_lines(r.doc, "f");
  CHECK(std::find(lines.begin(), lines.end(), "v := load_rx_free(heap, device, t$3)") != lines.end());
  CHECK(std::find(lines.begin(), lines.end(), "store_rx_free(heap, device, 1342177288, v)") != lines.end());
}

TEST_CASE("shared dispatch diagnostics") {
  auto undeclared = transpile("fun f() { !st32 0x1234, 1; return 0; }");
  REQUIRE(undeclared.diagnostics.size() == 1);
  CHECK(undeclared.diagnostics[0].code == "undeclared-shared-region");
  CHECK(undeclared.diagnostics[0].message.find("undeclared shared region") != std::string::npos);
  CHECK(undeclared.diagnostics[0].span.line == 1);

  const char* decls = "/@ shared ro u32 R[0x1000] @/\n/@ shared rw u32 Q[0x2000..0x200f] @/\n";
  CHECK(transpile(std::string(decls) + "fun f() { !st32 0x1000, 1; return 0; }").diagnostics.at(0).code ==
        "shared-mode-violation");
  CHECK(transpile(std::string(decls) + "fun f() { var x = 0; !ld64 x, 0x1000; return x; }").diagnostics.at(0).code ==
        "shared-width-mismatch");
  CHECK(transpile(std::string(decls) + "fun f(i) { !st32 0x2000 + i, 1; return 0; }").diagnostics.at(0).code ==
        "unresolved-shared-address");

  EncodingConfig cfg;
  cfg.model_methods = scan_model_methods("method load_R(device: Ref, addr: Int) returns (r: Int)\n");
  CHECK(transpile(std::string(decls) + "fun f() { var x = 0; !ld32 x, 0x1000; return x; }", cfg).ok());
  CHECK(transpile(std::string(decls) + "fun f() { !st32 0x2000, 1; return 0; }", cfg).diagnostics.at(0).code ==
        "undeclared-model-method");
}

TEST_CASE("model signatures decide whether the heap is passed") {
  const char* text = "/@ shared rw u32 A[0x1000] @/\n/@ shared rw u32 B[0x2000] @/\n"
                     "fun f() { !st32 0x1000, 1; !st32 0x2000, 2; return 0; }";
  EncodingConfig cfg;
  cfg.model_methods = scan_model_methods(
      "method store_A(device: Ref, addr: Int, value: Int)\n"
      "method store_B(heap: IArray, device: Ref, addr: Int, value: Int)\n");
  auto lines = body_lines(transpile_ok(text, cfg).doc, "f");
  CHECK(lines == std::vector<std::string>{"store_A(device, 4096, 1)", "store_B(heap, device, 8192, 2)", "ret := 0"});
}

TEST_CASE("minimal function") {
  auto r = transpile_ok("fun f() { return 0; }");
  const auto* m = r.doc.find_method("f");
  REQUIRE(m);
  CHECK(m->requires_.empty());
  REQUIRE(m->ensures.size() == 1);
  CHECK(vir::render_expr(m->ensures[0].cond) == "bounded64(ret)");
  CHECK(body_lines(r.doc, "f") == std::vector<std::string>{"ret := 0"});
}

TEST_CASE("program without functions") {
  EncodingConfig cfg;
  cfg.device_model = "dev.vpr";
  auto r = transpile_ok("const A = 1;", cfg);
  CHECK(r.doc.methods.empty());
  auto text = vir::render(r.doc).text;
  CHECK(text.find("import \"dev.vpr\"") != std::string::npos);
  CHECK(text.find("method ") == std::string::npos);
}

TEST_CASE("break and continue lower to flags") {
  auto r = transpile_ok(R"(
fun f(n) {
  var i = 0;
  var s = 0;
  while (i < 100) {
    i = i + 1;
    if (i == n) { break; }
    if (i % 2 == 0) { continue; }
    s = s + i;
  }
  return s;
})");
  auto text = vir::render(r.doc).text;
  CHECK(text.find("brk$1 := true") != std::string::npos);
  CHECK(text.find("cont$1 := true") != std::string::npos);
  CHECK(text.find("&& !brk$1") != std::string::npos);
}

TEST_CASE("break loops agree with the interpreter on random inputs") {
  std::string text = R"(
fun f(n, m) {
  var i = 0;
  var s = 0;
  while (i < 40) {
    i = i + 1;
    if (i == n % 50) { break; }
    if (i % (m % 5 + 1) == 0) { continue; }
    s = s + i * 3;
    if (s > 200) { return s; }
  }
  return s + i;
})";
  Program p = program(text);
  EncodingConfig cfg;
  cfg.overflow = OverflowPolicy::Wrap;
  auto t = transpile_program(p, cfg, "t.pnk");
  REQUIRE(t.ok());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Word a = interesting_word(rng, 64), b = interesting_word(rng, 64);
    PermissiveOracle o1, o2;
    auto ref = run_function(p, "f", {Value::word(a), Value::word(b)}, o1, 10000);
    VirMachine vm(t.doc);
    auto got = vm.run("f", {a, b}, o2);
    REQUIRE(ref.returned());
    INFO(got.summary());
    REQUIRE(got.returned());
    CHECK(flatten(*ref.value()) == std::get<std::vector<vir::BigInt>>(got.outcome));
  }
}

TEST_CASE("aggregates flatten into one local per word") {
  auto r = transpile_ok(R"(
fun pair(a) { return <a, <a + 1, 7>>; }
fun f({1, 1} p) {
  var {1, {1, 1}} q = pair(p.1);
  return q.1.0 + p.0;
})");
  const auto* pair = r.doc.find_method("pair");
  REQUIRE(pair);
  CHECK(pair->returns.size() == 3);
  const auto* f = r.doc.find_method("f");
  REQUIRE(f);
  REQUIRE(f->params.size() == 2);
  CHECK(f->params[0].name == "p$0");
  auto lines = body_lines(r.doc, "f");
  CHECK(lines.at(0) == "q$0, q$1, q$2 := pair(heap, device, p$1)");

  VirMachine vm(r.doc);
  PermissiveOracle o;
  auto res = vm.run("f", {3, 4}, o);
  INFO(res.summary());
  REQUIRE(res.returned());
  CHECK(std::get<std::vector<vir::BigInt>>(res.outcome) == std::vector<vir::BigInt>{8});
}

TEST_CASE("unsupported constructs are diagnosed") {
  CHECK(transpile("fun f() { raise Overflow 1; }").diagnostics.at(0).code == "raise-unsupported");
  EncodingConfig cfg;
  cfg.model_methods = ModelMethods{};
  CHECK(transpile("fun f() { @notify(0, 0, 0, 0); return 0; }", cfg).diagnostics.at(0).code ==
        "undeclared-ffi-method");
  CHECK(transpile("fun f(p) { var x = *p(); return x; }").diagnostics.at(0).code == "indirect-call");
  CHECK(transpile("fun g() { return 0; } fun f() { var x = &g; return x; }").diagnostics.at(0).code == "code-label");
}

TEST_CASE("annotations pass through as contracts, invariants and checks") {
  auto r = transpile_ok(R"(
fun f(a) {
  /@ requires a < 10 @/
  /@ ensures retval == old(a) + 1 @/
  var i = 0;
  while (i < a) {
    /@ invariant i <= a && valid_device() @/
    i = i + 1;
  }
  /@ assert i == a @/
  /@ unfold full(device.ring[i]) @/
  return i + 1;
})");
  const auto* m = r.doc.find_method("f");
  REQUIRE(m);
  CHECK(vir::render_expr(m->requires_.at(1).cond) == "a < 10");
  CHECK(vir::render_expr(m->ensures.at(0).cond) == "ret == old(a) + 1");
  auto text = vir::render(r.doc).text;
  CHECK(text.find("invariant i <= a && valid_device(device)") != std::string::npos);
  CHECK(text.find("assert i == a") != std::string::npos);
  CHECK(text.find("unfold full(device.ring[i])") != std::string::npos);
}

TEST_CASE("extra assertions change nothing else") {
  std::string base = R"(
fun f(a) {
  var x = a * 2;
  if (x > 4) { x = x - 1; }
  return x;
})";
  std::string annotated = R"(
fun f(a) {
  /@ assert true @/
  var x = a * 2;
  if (x > 4) { /@ assert true @/ x = x - 1; }
  return x;
})";
  auto a = transpile_ok(base);
  auto b = transpile_ok(annotated);
  auto strip = [](std::vector<vir::VStmt> body, auto& self) -> std::vector<vir::VStmt> {
    std::vector<vir::VStmt> out;
    for (auto& s : body) {
      if (auto* as = s.as<vir::vs::Assert>(); as && as->kind == vir::AssertKind::User && as->cond == vir::vbool(true))
        continue;
      if (auto* i = std::get_if<vir::vs::If>(&s.node)) {
        i->then_body = self(i->then_body, self);
        i->else_body = self(i->else_body, self);
      }
      out.push_back(std::move(s));
    }
    return out;
  };
  auto mb = *b.doc.find_method("f");
  CHECK(mb.body != a.doc.find_method("f")->body);
  mb.body = strip(mb.body, strip);
  CHECK(mb == *a.doc.find_method("f"));
}

TEST_CASE("listing 1 matches the reviewed golden document") {
  auto parsed = parse_program(SourceFile::load("samples/corpus/listing1.pnk"));
  REQUIRE(parsed.ok());
  EncodingConfig cfg;
  cfg.device_model = "listing1_device.vpr";
  cfg.model_methods = scan_model_methods(read_file("samples/corpus/listing1_device.vpr"));
  auto r = transpile_program(*parsed.program, cfg, "listing1.pnk");
  INFO(format(r.diagnostics));
  REQUIRE(r.ok());
  CHECK(vir::render(r.doc).text == read_file("samples/golden/listing1.vpr"));
  CHECK(r.residual.entries.size() == 2);
}

TEST_CASE("every mapped output line points into the source") {
  std::string text = read_file("samples/corpus/listing1.pnk");
  auto parsed = parse_program(SourceFile("listing1.pnk", text));
  REQUIRE(parsed.ok());
  auto r = transpile_program(*parsed.program, EncodingConfig{}, "listing1.pnk");
  auto rendered = vir::render(r.doc);
  std::size_t n_lines = static_cast<std::size_t>(std::count(rendered.text.begin(), rendered.text.end(), '\n'));
  CHECK(rendered.line_spans.size() == n_lines);
  std::size_t src_lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
  std::size_t mapped = 0;
  for (const auto& s : rendered.line_spans) {
    if (!s.valid()) continue;
    ++mapped;
    CHECK(s.line <= src_lines);
    CHECK(s.file_name() == "listing1.pnk");
  }
  CHECK(mapped > 40);
  auto [first, last] = rendered.method_lines.at("handle_irq");
  std::istringstream in(rendered.text);
  std::string line;
  for (std::size_t l = 1; std::getline(in, line); ++l) {
    if (l < first || l > last) continue;
    bool brace = line.find_first_not_of(" {}") == std::string::npos;
    CHECK(rendered.line_spans[l - 1].valid() != brace);
  }
  auto js = source_map_json(rendered);
  CHECK(js.size() == n_lines);
}
