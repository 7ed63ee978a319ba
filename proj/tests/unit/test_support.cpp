#include <doctest.h>

#include "differential.hpp"
#include "gen.hpp"
#include "oracles.hpp"
#include "panverif/parser.hpp"
#include "panverif/transpile.hpp"
#include "panverif/validate.hpp"

using namespace panverif;
using namespace panverif::testing;

TEST_CASE("word oracle basics") {
  VarMap vars{{"x", 5}};
  CHECK(*word_eval(make_op(BinOp::Add, {make_const(~Word{0}), make_const(1)}), vars, 64) == 0);
  CHECK(*word_eval(make_op(BinOp::Sub, {make_const(0), make_const(1)}), vars, 32) == 0xffffffffULL);
  CHECK(*word_eval(make_shift(ShiftKind::Asr, make_const(0x80000000), 4), vars, 32) == 0xf8000000ULL);
  CHECK(*word_eval(make_shift(ShiftKind::Asr, make_const(0x80000000), 4), vars, 64) == 0x8000000ULL);
  CHECK_FALSE(word_eval(make_op(BinOp::Div, {make_var("x"), make_const(0)}), vars, 64));
  CHECK(Bitvec::of(0xabcd, 16).shl(4).value() == 0xbcd0);
}

TEST_CASE("generated programs parse, validate and round-trip through the transpiler") {
  for (unsigned width : {32u, 64u}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      Rng rng(seed);
      GenOptions o;
      o.width = width;
      std::string text = random_program_text(rng, o);
      auto r = parse_program(SourceFile("gen.pnk", text), width);
      INFO(text);
      INFO(format(r.diagnostics));
      REQUIRE(r.ok());
      auto v = validate_program(*r.program);
      INFO(format(v));
      REQUIRE(v.empty());
      EncodingConfig cfg;
      cfg.word_width = width;
      auto t = transpile_program(*r.program, cfg, "gen.pnk");
      INFO(format(t.diagnostics));
      CHECK(t.ok());
    }
  }
}

TEST_CASE("seeded oracle is deterministic") {
  SeededOracle a(3), b(3);
  for (int i = 0; i < 10; ++i) {
    auto x = a.respond(LoadRequest{0x1000, 32, "r"});
    auto y = b.respond(LoadRequest{0x1000, 32, "r"});
    CHECK(x.value == y.value);
    CHECK(x.value < (Word{1} << 32));
  }
}

TEST_CASE("encodings of generated programs agree with the interpreter") {
  int agree = 0, flagged = 0;
  for (unsigned width : {32u, 64u}) {
    for (OverflowPolicy policy : {OverflowPolicy::Wrap, OverflowPolicy::Fail}) {
      for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed * 7 + width);
        GenOptions o;
        o.width = width;
        o.misaligned = seed % 3 == 0; o.unbounded = seed % 2 == 0; o.block_len = 5;
        std::string text = random_program_text(rng, o);
        auto parsed = parse_program(SourceFile("gen.pnk", text), width);
        REQUIRE(parsed.ok());
        EncodingConfig cfg;
        cfg.word_width = width;
        cfg.overflow = policy;
        auto t = transpile_program(*parsed.program, cfg, "gen.pnk");
        INFO(text);
        INFO(format(t.diagnostics));
        REQUIRE(t.ok());
        for (const auto& f : parsed.program->functions) {
          for (int i = 0; i < 5; ++i) {
            DiffCase c{f.name, {}, rng(), rng(), 100000};
            for (std::size_t k = 0; k < f.params.size(); ++k) c.args.push_back(interesting_word(rng, width));
            auto d = differential(*parsed.program, t.doc, policy, c);
            INFO(text);
            INFO(vir::render(t.doc, f.name).text);
            INFO(d.detail);
            REQUIRE(d.verdict != DiffVerdict::Mismatch);
            if (d.verdict == DiffVerdict::Agree) ++agree;
            if (d.verdict == DiffVerdict::OverflowFlagged) ++flagged;
          }
        }
      }
    }
  }
  MESSAGE("agree " << agree << ", overflow flagged " << flagged);
  CHECK(agree > flagged);
}
