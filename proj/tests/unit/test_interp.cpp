#include <doctest.h>

#include <functional>

#include "panverif/interp.hpp"
#include "panverif/parser.hpp"
#include "panverif/validate.hpp"

using namespace panverif;

namespace {

Program program(const std::string& text, unsigned width = 64) {
  auto r = parse_program(SourceFile("i.pnk", text), width);
  INFO(format(r.diagnostics));
  REQUIRE(r.ok());
  auto v = validate_program(*r.program);
  INFO(format(v));
  REQUIRE(v.empty());
  return *r.program;
}

Program listing1() {
  auto r = parse_program(SourceFile::load("samples/corpus/listing1.pnk"));
  REQUIRE(r.ok());
  return *r.program;
}

class FnOracle : public EnvOracle {
 public:
  explicit FnOracle(std::function<IoReply(const IoRequest&)> f) : f_(std::move(f)) {}
  IoReply respond(const IoRequest& r) override { return f_(r); }

 private:
  std::function<IoReply(const IoRequest&)> f_;
};

const Word kEirAddr = 0x30be0000 + 4;
const Word kIrqMask = 0xa000000;

}  // namespace

TEST_CASE("minimal function returns zero with an empty trace") {
  PermissiveOracle o;
  auto r = run_function(program("fun f() { return 0; }"), "f", {}, o, 10);
  REQUIRE(r.returned());
  CHECK(*r.value() == Value::word(0));
  CHECK(r.trace.empty());
}

TEST_CASE("arithmetic wraps modulo the word size") {
  MachineState st;
  Program p = program("");
  auto v = eval_expr(p, st, make_op(BinOp::Add, {make_const(~Word{0}), make_const(1)}));
  CHECK(std::get<Value>(v) == Value::word(0));
  Program p32 = program("", 32);
  v = eval_expr(p32, st, make_op(BinOp::Mul, {make_const(0x80000000), make_const(2)}));
  CHECK(std::get<Value>(v) == Value::word(0));
  v = eval_expr(p, st, make_field(1, make_struct({make_const(7), make_const(9)})));
  CHECK(std::get<Value>(v) == Value::word(9));
  v = eval_expr(p, st, make_op(BinOp::Div, {make_const(7), make_const(0)}));
  CHECK(std::get<Failed>(v).kind == FailureKind::DivByZero);
  v = eval_expr(p, st, make_var("nope"));
  CHECK(std::get<Failed>(v).kind == FailureKind::UnboundVar);
}

TEST_CASE("fuel runs out in an endless loop") {
  PermissiveOracle o;
  auto r = run_function(program("fun f() { while (true) { skip; } return 0; }"), "f", {}, o, 5);
  CHECK(std::holds_alternative<OutOfFuel>(r.outcome));
}

TEST_CASE("local memory: alignment, range, bytes and multi-word loads") {
  PermissiveOracle o;
  Program p = program(R"(
fun words() {
    st @base + 8, <0x1122334455667788, 5>;
    var 2 pair = lds 2 (@base + 8);
    return pair.0 + ldb (@base + 9) + pair.1;
}
fun misaligned() { st @base + 4, 1; return 0; }
fun outside() { return lds 1 0; }
fun bytes() { stb @base + 3, 0x1ff; return ldb (@base + 3); }
)");
  auto r = run_function(p, "words", {}, o, 10);
  REQUIRE(r.returned());
  CHECK(*r.value() == Value::word(0x1122334455667788 + 0x77 + 5));
  r = run_function(p, "misaligned", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::MisalignedAccess);
  r = run_function(p, "outside", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::OutOfRangeAccess);
  r = run_function(p, "bytes", {}, o, 10);
  CHECK(*r.value() == Value::word(0xff));
}

TEST_CASE("plain loads cannot reach shared regions") {
  PermissiveOracle o;
  Program p = program(R"(
/@ shared ro u32 R[0x2000] @/
fun f() { return lds 1 0x2000; }
fun g() { !st32 0x2000, 1; return 0; }
fun h() { var x = 0; !ld32 x, 0x3000; return x; }
fun k() { var x = 0; !ld16 x, 0x2000; return x; }
)");
  auto r = run_function(p, "f", {}, o, 10);
  auto& f = std::get<Failed>(r.outcome);
  CHECK(f.kind == FailureKind::OutOfRangeAccess);
  CHECK(f.detail.find("shared region 'R'") != std::string::npos);
  r = run_function(p, "g", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::UndeclaredSharedRegion);
  r = run_function(p, "h", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::UndeclaredSharedRegion);
  r = run_function(p, "k", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::UndeclaredSharedRegion);
}

TEST_CASE("handler trace alternates loads and stores of the interrupt register") {
  Program p = listing1();
  int loads = 0;
  FnOracle o([&](const IoRequest& req) {
    IoReply reply;
    if (auto* l = std::get_if<LoadRequest>(&req)) {
      CHECK(l->address == kEirAddr);
      reply.value = loads++ == 0 ? 0x2000000 : 0;
    }
    return reply;
  });
  auto r = run_function(p, "handle_irq", {}, o, 100);
  REQUIRE(r.returned());
  CHECK(*r.value() == Value::word(0));
  REQUIRE(r.trace.size() == 4);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    if (i % 2 == 0) {
      auto& ev = std::get<SharedLoadEv>(r.trace[i]);
      CHECK(ev.address == kEirAddr);
    } else {
      auto& ev = std::get<SharedStoreEv>(r.trace[i]);
      CHECK(ev.address == kEirAddr);
      CHECK(ev.value == kIrqMask);
      CHECK(ev.size_bits == 32);
    }
  }
}

TEST_CASE("oracle replies are checked against the access size") {
  Program p = listing1();
  // the permissive oracle masks to the access size, so hand-roll a bad one
  FnOracle bad([](const IoRequest&) {
    IoReply r;
    r.value = 0x1'0000'0000;
    return r;
  });
  auto r = run_function(p, "handle_irq", {}, bad, 100);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::EnvRejected);
  FnOracle reject([](const IoRequest& req) {
    IoReply r;
    if (std::holds_alternative<StoreRequest>(req)) r.rejection = "no";
    return r;
  });
  r = run_function(p, "handle_irq", {}, reject, 100);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::EnvRejected);
  CHECK(r.trace.size() == 1);
}

TEST_CASE("script replay") {
  Program p = listing1();
  auto script = parse_script(
      "# one quiet interrupt\n"
      "load 0x30be0004 32 -> 0\n"
      "store 30be0004 32 0xa000000\n");
  auto rr = replay_script(p, "handle_irq", {}, script, 100);
  REQUIRE(std::holds_alternative<RunResult>(rr));
  CHECK(std::get<RunResult>(rr).returned());

  auto wrong = parse_script("load 0x30be0004 32 -> 0\nstore 0x30be0004 32 0x0\n");
  rr = replay_script(p, "handle_irq", {}, wrong, 100);
  REQUIRE(std::holds_alternative<ScriptMismatch>(rr));
  CHECK(std::get<ScriptMismatch>(rr).position == 1);

  auto short_script = parse_script("load 0x30be0004 32 -> 0\n");
  rr = replay_script(p, "handle_irq", {}, short_script, 100);
  REQUIRE(std::holds_alternative<ScriptMismatch>(rr));
  CHECK(std::get<ScriptMismatch>(rr).expected == "<end of script>");

  Program quiet = program("fun f() { return 0; }");
  rr = replay_script(quiet, "f", {}, {}, 10);
  CHECK(std::get<RunResult>(rr).returned());
  rr = replay_script(quiet, "f", {}, short_script, 10);
  CHECK(std::get<ScriptMismatch>(rr).actual == "<end of run>");

  CHECK_THROWS(parse_script("load zz 32 -> 0"));
  CHECK_THROWS(parse_script("poke 1 2"));
  auto ffi = parse_script("ffi notify - -> 0a0b");
  CHECK(format_script_entry(ffi[0]) == "ffi notify - -> 0a0b");
}

TEST_CASE("calls, raise and nested control flow") {
  PermissiveOracle o;
  Program p = program(R"(
fun sum(n) {
    var i = 0;
    var acc = 0;
    while (1) {
        i = i + 1;
        if (i > n) { break; }
        if (i % 2 == 0) { continue; }
        acc = acc + i;
    }
    return acc;
}
fun pair(a) { return <a, a + 1>; }
fun caller() {
    var 2 p = pair(4);
    var s = 0;
    s = sum(p.1);
    var f = &sum;
    s = *f(s);
    return s;
}
fun boom(x) { if (x) { raise Bad x; } return 1; }
fun deep(n) { var r = deep(n + 1); return r; }
fun io() { @notify(0, 0, @base, 2); return lds 1 @base; }
)");
  auto r = run_function(p, "sum", {Value::word(5)}, o, 100);
  CHECK(*r.value() == Value::word(1 + 3 + 5));
  r = run_function(p, "caller", {}, o, 100);
  // sum(5) = 9, sum(9) = 1+3+5+7+9
  CHECK(*r.value() == Value::word(25));
  r = run_function(p, "boom", {Value::word(3)}, o, 10);
  CHECK(r.outcome == decltype(r.outcome){Raised{"Bad", Value::word(3)}});
  r = run_function(p, "deep", {Value::word(0)}, o, 100000);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::StackExhausted);
  r = run_function(p, "sum", {}, o, 10);
  CHECK(std::get<Failed>(r.outcome).kind == FailureKind::ShapeMismatch);
  FnOracle ffi([](const IoRequest&) {
    IoReply reply;
    reply.bytes = {0x34, 0x12};
    return reply;
  });
  r = run_function(p, "io", {}, ffi, 10);
  CHECK(*r.value() == Value::word(0x1234));
  REQUIRE(r.trace.size() == 1);
  CHECK(to_string(r.trace[0]) == "ffi notify - -> 3412");
}

TEST_CASE("memory persists across runs and accesses are attributed") {
  Program p = program(R"(
fun bump() { st @base, lds 1 @base + 1; return lds 1 @base; }
fun outer() { var x = bump(); return x; }
)");
  Interpreter interp(p);
  interp.set_access_logging(true);
  PermissiveOracle o;
  interp.run("bump", {}, o, 10);
  auto r = interp.run("outer", {}, o, 10);
  CHECK(*r.value() == Value::word(2));
  REQUIRE(!interp.access_log().empty());
  CHECK(interp.access_log().back().function == "bump");
}
