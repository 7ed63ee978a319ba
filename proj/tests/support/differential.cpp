#include "differential.hpp"

#include <random>

#include "gen.hpp"

namespace panverif::testing {

namespace {

std::string expected_kind(FailureKind k) {
  switch (k) {
    case FailureKind::MisalignedAccess: return "assert-alignment";
    case FailureKind::OutOfRangeAccess: return "no-permission";
    case FailureKind::DivByZero: return "div-by-zero";
    case FailureKind::EnvRejected: return "env-rejected";
    case FailureKind::StackExhausted: return "stack";
    default: return "?";
  }
}

Value rebuild(const Shape& shape, const std::vector<Word>& words, std::size_t& at) {
  if (shape.is_word()) return Value::word(at < words.size() ? words[at++] : 0);
  std::vector<Value> elems;
  for (const auto& s : shape.elements()) elems.push_back(rebuild(s, words, at));
  return Value::aggregate(std::move(elems));
}

}  // namespace

DiffResult differential(const Program& program, const vir::VerifDoc& doc, OverflowPolicy policy,
                        const DiffCase& c) {
  const Function* f = program.find_function(c.function);
  if (!f) return {DiffVerdict::Mismatch, "no function " + c.function};
  std::vector<Value> args;
  std::size_t at = 0;
  for (const auto& p : f->params) args.push_back(rebuild(p.shape, c.args, at));
  std::vector<vir::BigInt> vargs(c.args.begin(), c.args.end());

  Interpreter in(program);
  VirConfig vcfg;
  vcfg.memory_base = in.memory_base();
  vcfg.memory_size = in.memory().size();
  VirMachine vm(doc, vcfg);
  std::mt19937_64 mrng(c.memory_seed);
  for (std::size_t i = 0; i < in.memory().size(); ++i) in.memory()[i] = vm.memory[i] = static_cast<std::uint8_t>(mrng());

  SeededOracle o1(c.oracle_seed), o2(c.oracle_seed);
  RunResult ref = in.run(c.function, args, o1, c.fuel);
  VirResult got = vm.run(c.function, vargs, o2);

  auto describe = [&] { return "interp: " + ref.summary() + " | encoding: " + got.summary(); };
  auto prefix_of = [](const std::vector<Event>& a, const std::vector<Event>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
  };

  if (auto* vf = got.failure(); vf && vf->kind == "assert-bounds" && policy == OverflowPolicy::Fail) {
    if (!prefix_of(got.trace, ref.trace)) return {DiffVerdict::Mismatch, "trace before overflow: " + describe()};
    return {DiffVerdict::OverflowFlagged, describe()};
  }
  if (auto* v = ref.value()) {
    if (!got.returned()) return {DiffVerdict::Mismatch, describe()};
    if (flatten(*v) != std::get<std::vector<vir::BigInt>>(got.outcome)) return {DiffVerdict::Mismatch, describe()};
    if (ref.trace != got.trace) return {DiffVerdict::Mismatch, "trace: " + describe()};
    if (in.memory() != vm.memory) return {DiffVerdict::Mismatch, "memory: " + describe()};
    return {};
  }
  if (std::holds_alternative<OutOfFuel>(ref.outcome)) {
    if (auto* vf = got.failure(); vf && vf->kind == "out-of-fuel") return {};
    if (prefix_of(ref.trace, got.trace)) return {DiffVerdict::Inconclusive, describe()};
    return {DiffVerdict::Mismatch, describe()};
  }
  if (auto* rf = std::get_if<Failed>(&ref.outcome)) {
    auto* vf = got.failure();
    if (!vf || vf->kind != expected_kind(rf->kind)) return {DiffVerdict::Mismatch, describe()};
    if (ref.trace != got.trace) return {DiffVerdict::Mismatch, "trace: " + describe()};
    return {};
  }
  return {DiffVerdict::Mismatch, describe()};
}

}  // namespace panverif::testing
