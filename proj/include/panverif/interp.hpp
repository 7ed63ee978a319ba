#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/word.hpp"

namespace panverif {

// ---------------------------------------------------------------------------
// Values

struct Value {
  struct CodeLabel {
    std::string name;
    friend bool operator==(const CodeLabel&, const CodeLabel&) = default;
  };
  std::variant<Word, CodeLabel, std::vector<Value>> v;

  static Value word(Word w) { return Value{w}; }
  static Value label(std::string name) { return Value{CodeLabel{std::move(name)}}; }
  static Value aggregate(std::vector<Value> elems) { return Value{std::move(elems)}; }

  bool is_word() const { return std::holds_alternative<Word>(v); }
  Word as_word() const { return std::get<Word>(v); }
  const CodeLabel* as_label() const { return std::get_if<CodeLabel>(&v); }
  const std::vector<Value>* as_aggregate() const { return std::get_if<std::vector<Value>>(&v); }

  Shape shape() const;
  std::string to_string() const;
  friend bool operator==(const Value&, const Value&) = default;
};

/// A value of the given shape with every word zero.
Value zero_value(const Shape& shape);

// ---------------------------------------------------------------------------
// Observable events and the environment

struct SharedLoadEv {
  Word address = 0;
  unsigned size_bits = 0;
  Word value = 0;
  friend bool operator==(const SharedLoadEv&, const SharedLoadEv&) = default;
};
struct SharedStoreEv {
  Word address = 0;
  unsigned size_bits = 0;
  Word value = 0;
  friend bool operator==(const SharedStoreEv&, const SharedStoreEv&) = default;
};
struct FfiEv {
  std::string name;
  std::vector<std::uint8_t> in;
  std::vector<std::uint8_t> out;
  friend bool operator==(const FfiEv&, const FfiEv&) = default;
};
using Event = std::variant<SharedLoadEv, SharedStoreEv, FfiEv>;
std::string to_string(const Event& e);

struct LoadRequest {
  Word address = 0;
  unsigned size_bits = 0;
  std::string region;
};
struct StoreRequest {
  Word address = 0;
  unsigned size_bits = 0;
  Word value = 0;
  std::string region;
};
struct FfiRequest {
  std::string name;
  std::vector<std::uint8_t> in;
  std::size_t out_len = 0;
};
using IoRequest = std::variant<LoadRequest, StoreRequest, FfiRequest>;
std::string to_string(const IoRequest& r);

struct IoReply {
  Word value = 0;                   // loads
  std::vector<std::uint8_t> bytes;  // foreign calls
  /// Set when the environment refuses the request (a model precondition
  /// was violated); the run stops with an env-rejected failure.
  std::optional<std::string> rejection;
};

/// Deterministic model of the outside world. Implementations keep their own
/// state and must answer identically when replayed from the same state.
class EnvOracle {
 public:
  virtual ~EnvOracle() = default;
  virtual IoReply respond(const IoRequest& request) = 0;
};

/// Loads return `load_value`, stores are accepted, foreign calls return zero
/// bytes.
class PermissiveOracle : public EnvOracle {
 public:
  explicit PermissiveOracle(Word load_value = 0) : load_value_(load_value) {}
  IoReply respond(const IoRequest& request) override;

 private:
  Word load_value_;
};

// ---------------------------------------------------------------------------
// Results

enum class FailureKind {
  UnboundVar,
  MisalignedAccess,
  OutOfRangeAccess,
  ShapeMismatch,
  UndeclaredSharedRegion,
  DivByZero,
  EnvRejected,
  StackExhausted,
  InvalidControl,
};
std::string_view to_string(FailureKind kind);

struct Returned {
  Value value;
  friend bool operator==(const Returned&, const Returned&) = default;
};
struct Raised {
  std::string exception;
  Value value;
  friend bool operator==(const Raised&, const Raised&) = default;
};
struct Failed {
  FailureKind kind = FailureKind::ShapeMismatch;
  Span span;
  std::string detail;
  friend bool operator==(const Failed& a, const Failed& b) {
    return a.kind == b.kind && same_location(a.span, b.span) && a.detail == b.detail;
  }
};
struct OutOfFuel {
  friend bool operator==(const OutOfFuel&, const OutOfFuel&) = default;
};

struct RunResult {
  std::variant<Returned, Raised, Failed, OutOfFuel> outcome;
  std::vector<Event> trace;

  bool returned() const { return std::holds_alternative<Returned>(outcome); }
  const Value* value() const {
    auto* r = std::get_if<Returned>(&outcome);
    return r ? &r->value : nullptr;
  }
  std::string summary() const;
  friend bool operator==(const RunResult&, const RunResult&) = default;
};

// ---------------------------------------------------------------------------
// Machine

struct InterpConfig {
  Word memory_base = 0x10000;
  std::size_t memory_size = 0x10000;  // bytes, a multiple of the word size
  unsigned max_call_depth = 200;
};

struct MachineState {
  std::map<std::string, Value, std::less<>> locals;
  std::vector<std::uint8_t> memory;
  Word memory_base = 0;
  std::uint64_t fuel = 0;
  std::vector<Event> trace;
};

/// One memory or shared access, attributed to the innermost running function.
struct AccessRecord {
  std::string function;
  Word address = 0;
  unsigned size_bytes = 0;
  bool shared = false;
  bool write = false;
};

class Interpreter {
 public:
  explicit Interpreter(const Program& program, InterpConfig config = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  /// Runs `entry`. Local memory persists across runs on the same
  /// interpreter, so a driver's state survives between handler invocations.
  RunResult run(std::string_view entry, const std::vector<Value>& args, EnvOracle& oracle,
                std::uint64_t fuel);

  std::vector<std::uint8_t>& memory();
  const std::vector<std::uint8_t>& memory() const;
  Word memory_base() const;

  void set_access_logging(bool on);
  const std::vector<AccessRecord>& access_log() const;
  void clear_access_log();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run_function(const Program& program, std::string_view entry,
                       const std::vector<Value>& args, EnvOracle& oracle, std::uint64_t fuel,
                       InterpConfig config = {});

using EvalResult = std::variant<Value, Failed>;

/// Evaluates a code expression against explicit state. Programs constants
/// are visible; memory reads use `state.memory` at `state.memory_base`.
EvalResult eval_expr(const Program& program, const MachineState& state, const Expr& e);

// ---------------------------------------------------------------------------
// Scripted replay

struct ScriptEntry {
  IoRequest expected;
  IoReply reply;
};

struct ScriptMismatch {
  std::size_t position = 0;
  std::string expected;
  std::string actual;
  std::string to_string() const;
};

/// One record per line:
///   load <addr-hex> <opsize> -> <value-hex>
///   store <addr-hex> <opsize> <value-hex>
///   ffi <name> <in-hex> -> <out-hex>        ('-' for no bytes)
/// Blank lines and '#' comments are ignored. Throws std::runtime_error with
/// the line number on malformed input.
std::vector<ScriptEntry> parse_script(const std::string& text);
std::string format_script_entry(const ScriptEntry& e);

using ReplayResult = std::variant<RunResult, ScriptMismatch>;

/// Runs with an oracle that insists on the scripted request sequence. A
/// differing request, a request past the end of the script, or unconsumed
/// script records all produce a ScriptMismatch.
ReplayResult replay_script(const Program& program, std::string_view entry,
                           const std::vector<Value>& args, const std::vector<ScriptEntry>& script,
                           std::uint64_t fuel, InterpConfig config = {});

}  // namespace panverif
