#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "corpus.hpp"
#include "differential.hpp"
#include "gen.hpp"
#include "oracles.hpp"
#include "panverif/cli.hpp"
#include "panverif/harness/explore.hpp"
#include "panverif/harness/mutants.hpp"
#include "panverif/interp.hpp"
#include "panverif/parser.hpp"
#include "panverif/printer.hpp"
#include "panverif/transpile.hpp"
#include "panverif/validate.hpp"
#include "structure.hpp"

using namespace panverif;
using namespace panverif::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string secs(double s) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << s << " s";
  return o.str();
}

Outcome round_trip() {
  Clock clock;
  auto corpus = load_corpus();
  bool listing1 = false;
  std::size_t programs = 0;
  for (const auto& e : corpus) {
    listing1 = listing1 || e.file == "listing1.pnk";
    auto first = parse_program(SourceFile(e.file, e.text));
    if (!first.ok()) return {false, e.file + " does not parse"};
    std::string printed = print_program(*first.program);
    auto second = parse_program(SourceFile(e.file, printed));
    if (!second.ok()) return {false, e.file + ": printed form does not parse: " + format(second.diagnostics)};
    if (!(*second.program == *first.program)) return {false, e.file + ": reparsed program differs"};
    if (print_program(*second.program) != printed) return {false, e.file + ": printing is not idempotent"};
    ++programs;
  }
  double t = clock.seconds();
  std::string d = std::to_string(programs) + " programs in " + secs(t);
  if (programs < 10) return {false, d + ", need at least 10"};
  if (!listing1) return {false, d + ", listing1.pnk missing"};
  return {t < 5.0, d};
}

Outcome word_semantics() {
  std::size_t checked = 0;
  for (unsigned width : {32u, 64u}) {
    Program p;
    p.word_width = width;
    Rng rng(width);
    std::vector<std::string> names{"a", "b", "c"};
    for (int i = 0; i < 10000; ++i) {
      Expr e = random_word_expr(rng, names, width, 4);
      MachineState st;
      st.memory_base = 0x10000;
      VarMap vars;
      for (const auto& n : names) {
        Word w = interesting_word(rng, width);
        st.locals[n] = Value::word(w);
        vars[n] = w;
      }
      auto got = eval_expr(p, st, e);
      auto want = word_eval(e, vars, width, 0x10000);
      auto* v = std::get_if<Value>(&got);
      bool same = want ? (v && v->is_word() && BigInt(v->as_word()) == *want) : !v;
      if (!same) return {false, "width " + std::to_string(width) + ": " + print_expr(e)};
      ++checked;
    }
    Word ones = width == 64 ? ~Word{0} : 0xffffffffULL;
    Expr forced = make_op(BinOp::Add, {make_const(ones), make_const(1)});
    auto got = eval_expr(p, MachineState{}, forced);
    auto* v = std::get_if<Value>(&got);
    if (!v || v->as_word() != 0 || *word_eval(forced, {}, width) != 0)
      return {false, "(2^" + std::to_string(width) + "-1)+1 is not 0"};
  }
  return {true, std::to_string(checked) + " expressions, 0 mismatches, (2^w-1)+1 = 0 at both widths"};
}

Outcome bitop_rewrites() {
  Clock clock;
  Expr x = make_var("x");
  if (!(rewrite_bitop(make_op(BinOp::And, {x, make_const(255)}), 64) == make_op(BinOp::Mod, {x, make_const(256)})))
    return {false, "x & 255 is not rewritten to x % 256"};
  std::size_t checked = 0;
  for (unsigned width : {32u, 64u}) {
    for (unsigned k = 1; k <= 15; ++k) {
      Expr forms[3] = {rewrite_bitop(make_op(BinOp::And, {x, make_const((Word{1} << k) - 1)}), width),
                       rewrite_bitop(make_shift(ShiftKind::Lsr, x, k), width),
                       rewrite_bitop(make_shift(ShiftKind::Lsl, x, k), width)};
      for (const auto& f : forms)
        if (has_bitops(f)) return {false, "k = " + std::to_string(k) + ": " + print_expr(f) + " keeps a bitop"};
      for (Word v = 0; v < 0x10000; ++v) {
        VarMap vars{{"x", v}};
        Bitvec bv = Bitvec::of(v, width);
        std::uint64_t want[3] = {(bv & Bitvec::of((Word{1} << k) - 1, width)).value(), bv.lshr(k).value(),
                                 bv.shl(k).value()};
        for (int i = 0; i < 3; ++i) {
          auto got = int_eval(forms[i], vars);
          if (!got || *got != want[i])
            return {false, "k = " + std::to_string(k) + ", x = " + std::to_string(v) + ": " + print_expr(forms[i])};
          ++checked;
        }
      }
    }
  }
  double t = clock.seconds();
  return {t < 10.0, std::to_string(checked) + " checks, 0 mismatches in " + secs(t)};
}

Outcome encoding_structure() {
  std::size_t temporaries = 0, shared = 0;
  for (const auto& e : load_corpus()) {
    auto t = transpile_program(e.program, corpus_config(e), e.file);
    if (!t.ok()) return {false, e.file + ": " + format(t.diagnostics)};
    auto bad = unchecked_arithmetic(t.doc, OverflowPolicy::Fail);
    if (!bad.empty()) return {false, e.file + ": " + bad.front()};
    temporaries += count_arith_temporaries(t.doc);
    auto c = shared_census(e.program, t.doc);
    if (c.encoded_stores != c.source_stores || c.encoded_loads != c.source_loads)
      return {false, e.file + ": shared accesses not all dispatched"};
    shared += c.source_stores + c.source_loads;
    if (e.file == "listing1.pnk") {
      std::string text = vir::render(t.doc).text;
      for (const char* needle : {"store_EIR(", "load_EIR(", "requires valid_device(device)",
                                 "ensures valid_device(device)"})
        if (text.find(needle) == std::string::npos) return {false, std::string("listing 1 lacks ") + needle};
      if (text != read_file("samples/golden/listing1.vpr")) return {false, "listing 1 differs from the golden file"};
    }
  }
  return {temporaries > 0 && shared > 0, std::to_string(temporaries) + " checked temporaries, " +
                                             std::to_string(shared) + " shared accesses dispatched, golden match"};
}

bool has_loop_exit(const Stmt& s) {
  if (s.is<stmt::Break>() || s.is<stmt::Continue>()) return true;
  if (auto* q = s.as<stmt::Seq>()) return has_loop_exit(*q->first) || has_loop_exit(*q->second);
  if (auto* f = s.as<stmt::If>()) return has_loop_exit(*f->then_branch) || has_loop_exit(*f->else_branch);
  if (auto* w = s.as<stmt::While>()) return has_loop_exit(*w->body);
  if (auto* d = s.as<stmt::Dec>()) return has_loop_exit(*d->body);
  if (auto* d = s.as<stmt::DecCall>()) return has_loop_exit(*d->body);
  return false;
}

Outcome differential_semantics() {
  std::size_t agree = 0, runs = 0, inconclusive = 0, exit_agree = 0;
  for (const auto& e : load_corpus()) {
    for (OverflowPolicy policy : {OverflowPolicy::Wrap, OverflowPolicy::Fail}) {
      auto t = transpile_program(e.program, corpus_config(e, policy), e.file);
      if (!t.ok()) return {false, e.file + ": " + format(t.diagnostics)};
      Rng rng(std::hash<std::string>{}(e.file) ^ static_cast<std::uint64_t>(policy));
      for (const auto& f : e.program.functions) {
        std::size_t words = 0;
        for (const auto& p : f.params) words += shape_size(p.shape);
        for (int i = 0; i < 50; ++i) {
          DiffCase c{f.name, {}, rng(), rng(), 100000};
          for (std::size_t k = 0; k < words; ++k) c.args.push_back(rng() % 0x100000000);
          auto d = differential(e.program, t.doc, policy, c);
          ++runs;
          if (d.verdict == DiffVerdict::Mismatch) return {false, e.file + " " + f.name + ": " + d.detail};
          if (policy == OverflowPolicy::Wrap && d.verdict == DiffVerdict::OverflowFlagged)
            return {false, e.file + " " + f.name + ": overflow flagged in wrap mode"};
          agree += d.verdict == DiffVerdict::Agree;
          exit_agree += d.verdict == DiffVerdict::Agree && has_loop_exit(f.body);
          inconclusive += d.verdict == DiffVerdict::Inconclusive;
        }
      }
    }
  }
  return {agree * 2 > runs && exit_agree > 0,
          std::to_string(runs) + " runs: " + std::to_string(agree) + " agree (" + std::to_string(exit_agree) +
              " through break/continue loops), " +
                                std::to_string(inconclusive) + " inconclusive, " +
                                std::to_string(runs - agree - inconclusive) + " overflow flagged, 0 mismatches"};
}

Outcome protocol_properties() {
  Clock clock;
  using namespace panverif::harness;
  std::string source = read_file("samples/minidriver.pnk");
  Program driver = parse_driver(source);
  HarnessConfig cfg;
  ExploreReport clean = explore_serial(driver, cfg, {6, 2});
  if (!clean.ok()) return {false, "correct driver: " + clean.summary()};
  std::size_t caught = 0;
  auto mutants = load_mutants("samples/mutants");
  for (const auto& m : mutants) {
    ExploreReport r = explore_parallel(parse_driver(apply_mutant(source, m), m.name + ".pnk"), cfg, {6, 2});
    bool all = !m.expect.empty();
    for (const auto& checker : m.expect) all = all && r.findings_by_checker.count(checker);
    if (!all) return {false, m.name + " escaped: " + r.summary()};
    ++caught;
  }
  double t = clock.seconds();
  return {caught >= 5 && t < 60.0, std::to_string(clean.schedules) + " schedules clean, " + std::to_string(caught) +
                                       "/" + std::to_string(mutants.size()) + " mutants caught in " + secs(t)};
}

Outcome scale_substitute() {
  Rng rng(1000);
  GenOptions o;
  o.functions = 4;
  std::string text;
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  while (lines(text) < 1000) {
    o.functions += 4;
    o.block_len = 6;
    text = random_program_text(rng, o);
  }
  Clock clock;
  auto parsed = parse_program(SourceFile("big.pnk", text));
  if (!parsed.ok()) return {false, "generated program does not parse"};
  if (!validate_program(*parsed.program).empty()) return {false, "generated program does not validate"};
  auto t = transpile_program(*parsed.program, {}, "big.pnk");
  double took = clock.seconds();
  if (!t.ok()) return {false, format(t.diagnostics)};
  std::string detail = std::to_string(lines(text)) + " lines, " + std::to_string(t.doc.methods.size()) +
                       " methods transpiled in " + secs(took);
  if (took >= 1.0) return {false, detail};

  fs::path dir = fs::temp_directory_path() / "panverif-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path log = dir / "calls.log";
  std::ostringstream out, err;
  int code = cli_main({"verify", "samples/corpus/listing1.pnk", "--device-model", "samples/corpus/listing1_device.vpr",
                       "--backend-cmd", std::string(STUB_BACKEND_PATH) + " --log " + log.string(), "--function",
                       "handle_irq", "--out", (dir / "l1.vpr").string()},
                      out, err);
  if (code != 0 || out.str().find("handle_irq: verified") == std::string::npos ||
      out.str().find("1/1 methods verified") == std::string::npos)
    return {false, detail + "; verify --function failed: " + out.str() + err.str()};
  if (read_file(log) != (dir / "l1.handle_irq.vpr").string() + "\n")
    return {false, detail + "; backend did not receive the single-function document"};
  return {true, detail + "; verify --function handle_irq ran the backend once"};
}

bool prefix_of(const std::vector<Event>& a, const std::vector<Event>& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

Outcome fuel_and_determinism() {
  Rng rng(8);
  std::size_t triples = 0, exhausted = 0;
  for (std::uint64_t seed = 0; triples < 1000; ++seed) {
    GenOptions o;
    o.width = seed % 2 ? 32 : 64;
    o.unbounded = seed % 3 != 0;
    o.raise = seed % 5 == 0;
    std::string text = random_program_text(rng, o);
    auto parsed = parse_program(SourceFile("gen.pnk", text), o.width);
    if (!parsed.ok()) return {false, "generated program does not parse"};
    const Program& p = *parsed.program;
    for (const auto& f : p.functions) {
      std::vector<Value> args;
      for (const auto& prm : f.params)
        args.push_back(prm.shape == Shape::word() ? Value::word(interesting_word(rng, o.width)) : zero_value(prm.shape));
      std::uint64_t oracle_seed = rng();
      std::uint64_t fuel = rng() % 300;
      std::uint64_t more = fuel + 1 + rng() % 3000;
      auto run = [&](std::uint64_t fu) {
        SeededOracle oracle(oracle_seed, seed % 4 == 0);
        return run_function(p, f.name, args, oracle, fu);
      };
      RunResult a = run(fuel), b = run(fuel), c = run(more);
      if (!(a == b)) return {false, "seed " + std::to_string(seed) + " " + f.name + ": two runs differ"};
      if (std::holds_alternative<OutOfFuel>(a.outcome)) {
        ++exhausted;
        if (!prefix_of(a.trace, c.trace))
          return {false, "seed " + std::to_string(seed) + " " + f.name + ": trace is not a prefix with more fuel"};
      } else if (!(a == c)) {
        return {false, "seed " + std::to_string(seed) + " " + f.name + ": outcome changed with more fuel"};
      }
      if (++triples == 1000) break;
    }
  }
  return {exhausted > 0 && exhausted < triples,
          std::to_string(triples) + " triples, " + std::to_string(exhausted) + " ran out of fuel at the lower bound"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {1, "grammar round-trip", round_trip},
      {2, "word semantics oracle", word_semantics},
      {3, "bitop rewrite soundness", bitop_rewrites},
      {4, "encoding structure", encoding_structure},
      {5, "differential semantics", differential_semantics},
      {6, "protocol properties", protocol_properties},
      {7, "scale substitute", scale_substitute},
      {8, "fuel monotonicity and determinism", fuel_and_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
