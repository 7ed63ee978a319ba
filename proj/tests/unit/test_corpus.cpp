#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "differential.hpp"
#include "gen.hpp"
#include "panverif/parser.hpp"
#include "panverif/printer.hpp"
#include "panverif/transpile.hpp"
#include "structure.hpp"

using namespace panverif;
using namespace panverif::testing;

namespace {

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> c = load_corpus();
  return c;
}

TranspileResult transpile_entry(const CorpusEntry& e, OverflowPolicy policy) {
  auto t = transpile_program(e.program, corpus_config(e, policy), e.file);
  INFO(e.file);
  INFO(format(t.diagnostics));
  REQUIRE(t.ok());
  return t;
}

Word bounded_word(Rng& rng) {
  switch (rng() % 4) {
    case 0: return rng() % 16;
    case 1: return rng() % 0x10000;
    case 2: return rng() % 0x100000000;
    default: return interesting_word(rng, 64);
  }
}

}  // namespace

TEST_CASE("corpus is complete") {
  CHECK(corpus().size() >= 10);
  bool listing1 = false;
  for (const auto& e : corpus()) listing1 = listing1 || e.file == "listing1.pnk";
  CHECK(listing1);
}

TEST_CASE("corpus programs survive printing and reparsing") {
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& e : corpus()) sources.emplace_back(e.file, e.text);
  sources.emplace_back("minidriver.pnk", read_file("samples/minidriver.pnk"));
  for (const auto& [file, text] : sources) {
    INFO(file);
    auto first = parse_program(SourceFile(file, text));
    REQUIRE(first.ok());
    std::string printed = print_program(*first.program);
    auto second = parse_program(SourceFile(file, printed));
    INFO(printed);
    INFO(format(second.diagnostics));
    REQUIRE(second.ok());
    CHECK(*second.program == *first.program);
    CHECK(print_program(*second.program) == printed);
  }
}

TEST_CASE("every arithmetic operation in the corpus becomes a checked temporary") {
  std::size_t temporaries = 0;
  for (const auto& e : corpus()) {
    for (OverflowPolicy policy : {OverflowPolicy::Fail, OverflowPolicy::Wrap}) {
      auto t = transpile_entry(e, policy);
      auto bad = unchecked_arithmetic(t.doc, policy);
      std::string all;
      for (const auto& b : bad) all += b + "\n";
      INFO(e.file);
      INFO(all);
      CHECK(bad.empty());
      temporaries += count_arith_temporaries(t.doc);
    }
  }
  CHECK(temporaries > 50);
}

TEST_CASE("every shared access in the corpus becomes a model method call") {
  std::size_t total = 0;
  for (const auto& e : corpus()) {
    auto t = transpile_entry(e, OverflowPolicy::Fail);
    auto c = shared_census(e.program, t.doc);
    INFO(e.file);
    CHECK(c.encoded_stores == c.source_stores);
    CHECK(c.encoded_loads == c.source_loads);
    total += c.source_stores + c.source_loads;
  }
  CHECK(total >= 10);
}

TEST_CASE("the scanner catches an unchecked temporary") {
  const auto& e = corpus().at(1);
  auto t = transpile_entry(e, OverflowPolicy::Fail);
  bool dropped = false;
  for (auto& m : t.doc.methods) {
    for (std::size_t i = 0; i + 1 < m.body.size() && !dropped; ++i) {
      auto* a = std::get_if<vir::vs::Assign>(&m.body[i].node);
      if (a && a->kind == vir::AssignKind::Arith) {
        m.body.erase(m.body.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        dropped = true;
      }
    }
  }
  REQUIRE(dropped);
  CHECK(unchecked_arithmetic(t.doc, OverflowPolicy::Fail).size() == 1);
  CHECK(unchecked_arithmetic(t.doc, OverflowPolicy::Wrap).size() >= 1);
}

TEST_CASE("corpus encodings agree with the interpreter") {
  std::size_t agree = 0, runs = 0;
  for (OverflowPolicy policy : {OverflowPolicy::Wrap, OverflowPolicy::Fail}) {
    for (const auto& e : corpus()) {
      auto t = transpile_entry(e, policy);
      Rng rng(std::hash<std::string>{}(e.file) + static_cast<int>(policy));
      for (const auto& f : e.program.functions) {
        std::size_t words = 0;
        for (const auto& p : f.params) words += shape_size(p.shape);
        for (int i = 0; i < 50; ++i) {
          DiffCase c{f.name, {}, rng(), rng(), 100000};
          for (std::size_t k = 0; k < words; ++k) c.args.push_back(bounded_word(rng));
          auto d = differential(e.program, t.doc, policy, c);
          ++runs;
          INFO(e.file << " " << f.name);
          INFO(d.detail);
          REQUIRE(d.verdict != DiffVerdict::Mismatch);
          if (policy == OverflowPolicy::Wrap) CHECK(d.verdict != DiffVerdict::OverflowFlagged);
          agree += d.verdict == DiffVerdict::Agree;
        }
      }
    }
  }
  MESSAGE(agree << " of " << runs << " runs agree");
  CHECK(agree * 2 > runs);
}
