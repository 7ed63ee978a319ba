#include "panverif/interp.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace panverif {

namespace {

std::string hex(Word w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(w));
  return buf;
}

std::string bytes_hex(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) return "-";
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Values, events, results

Shape Value::shape() const {
  if (auto* elems = as_aggregate()) {
    std::vector<Shape> shapes;
    for (const auto& e : *elems) shapes.push_back(e.shape());
    return Shape::composite(std::move(shapes));
  }
  return Shape::word();
}

std::string Value::to_string() const {
  if (is_word()) return std::to_string(as_word());
  if (auto* l = as_label()) return "&" + l->name;
  std::string out = "<";
  const auto& elems = *as_aggregate();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (i) out += ", ";
    out += elems[i].to_string();
  }
  return out + ">";
}

Value zero_value(const Shape& shape) {
  if (shape.is_word()) return Value::word(0);
  std::vector<Value> elems;
  for (const auto& s : shape.elements()) elems.push_back(zero_value(s));
  return Value::aggregate(std::move(elems));
}

std::string to_string(const Event& e) {
  if (auto* l = std::get_if<SharedLoadEv>(&e))
    return "load " + hex(l->address) + " " + std::to_string(l->size_bits) + " -> " + hex(l->value);
  if (auto* s = std::get_if<SharedStoreEv>(&e))
    return "store " + hex(s->address) + " " + std::to_string(s->size_bits) + " " + hex(s->value);
  const auto& f = std::get<FfiEv>(e);
  return "ffi " + f.name + " " + bytes_hex(f.in) + " -> " + bytes_hex(f.out);
}

std::string to_string(const IoRequest& r) {
  if (auto* l = std::get_if<LoadRequest>(&r))
    return "load " + hex(l->address) + " " + std::to_string(l->size_bits);
  if (auto* s = std::get_if<StoreRequest>(&r))
    return "store " + hex(s->address) + " " + std::to_string(s->size_bits) + " " + hex(s->value);
  const auto& f = std::get<FfiRequest>(r);
  return "ffi " + f.name + " " + bytes_hex(f.in);
}

IoReply PermissiveOracle::respond(const IoRequest& request) {
  IoReply reply;
  if (auto* l = std::get_if<LoadRequest>(&request)) reply.value = load_value_ & word_mask(l->size_bits);
  if (auto* f = std::get_if<FfiRequest>(&request)) reply.bytes.assign(f->out_len, 0);
  return reply;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::UnboundVar: return "unbound-var";
    case FailureKind::MisalignedAccess: return "misaligned-access";
    case FailureKind::OutOfRangeAccess: return "out-of-range-access";
    case FailureKind::ShapeMismatch: return "shape-mismatch";
    case FailureKind::UndeclaredSharedRegion: return "undeclared-shared-region";
    case FailureKind::DivByZero: return "div-by-zero";
    case FailureKind::EnvRejected: return "env-rejected";
    case FailureKind::StackExhausted: return "stack-exhausted";
    case FailureKind::InvalidControl: return "invalid-control";
  }
  return "?";
}

std::string RunResult::summary() const {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Returned>) {
          return "returned " + o.value.to_string();
        } else if constexpr (std::is_same_v<T, Raised>) {
          return "raised " + o.exception + " " + o.value.to_string();
        } else if constexpr (std::is_same_v<T, Failed>) {
          std::string where = o.span.valid() ? o.span.to_string() + ": " : std::string();
          return "failed " + where + std::string(to_string(o.kind)) + ": " + o.detail;
        } else {
          return "out of fuel";
        }
      },
      outcome);
}

// ---------------------------------------------------------------------------
// Machine

namespace {

struct SharedRange {
  const SharedRegionDecl* decl;
  Word lo, hi;
};

class Machine {
 public:
  enum class Flow { Normal, Break, Continue, Return, Raise, Fail, OutOfFuel };

  Machine(const Program& p, InterpConfig cfg)
      : p_(p), cfg_(cfg), width_(p.word_width), wb_(p.word_width / 8) {
    ConstEnv env = constant_env(p);
    for (const auto& [name, value] : env) consts_.emplace(name, Value::word(value));
    for (const auto& s : p.shared) {
      auto lo = eval_const(s.range.lo, env, width_);
      auto hi = eval_const(s.range.upper(), env, width_);
      if (lo && hi) shared_.push_back({&s, *lo, *hi});
    }
    st.memory.assign(cfg.memory_size, 0);
    st.memory_base = cfg.memory_base;
  }

  MachineState st;
  EnvOracle* oracle = nullptr;
  bool logging = false;
  std::vector<AccessRecord> log;
  Failed failure;

  RunResult run(std::string_view entry, const std::vector<Value>& args, std::uint64_t fuel) {
    st.fuel = fuel;
    st.trace.clear();
    st.locals.clear();
    depth_ = 0;
    RunResult result;
    const Function* f = p_.find_function(entry);
    std::optional<Value> value;
    Flow flow = f ? invoke(*f, args, Span{}, value)
                  : fail(FailureKind::UnboundVar, Span{},
                         "no function named '" + std::string(entry) + "'");
    switch (flow) {
      case Flow::Normal: result.outcome = Returned{*value}; break;
      case Flow::Raise: result.outcome = Raised{exn_, ret_}; break;
      case Flow::OutOfFuel: result.outcome = OutOfFuel{}; break;
      default: result.outcome = failure; break;
    }
    result.trace = std::move(st.trace);
    st.trace.clear();
    return result;
  }

  std::optional<Value> eval(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::optional<Value> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, expr::Const>) {
            return Value::word(n.value & word_mask(width_));
          } else if constexpr (std::is_same_v<T, expr::Var>) {
            if (auto it = st.locals.find(n.name); it != st.locals.end()) return it->second;
            if (auto it = consts_.find(n.name); it != consts_.end()) return it->second;
            fail(FailureKind::UnboundVar, e.span, "unbound variable '" + n.name + "'");
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, expr::Label>) {
            return Value::label(n.name);
          } else if constexpr (std::is_same_v<T, expr::Struct>) {
            std::vector<Value> elems;
            for (const auto& el : n.elements) {
              auto v = eval(el);
              if (!v) return std::nullopt;
              elems.push_back(std::move(*v));
            }
            return Value::aggregate(std::move(elems));
          } else if constexpr (std::is_same_v<T, expr::Field>) {
            auto base = eval(*n.base);
            if (!base) return std::nullopt;
            auto* elems = base->as_aggregate();
            if (!elems || elems->size() <= n.index) {
              fail(FailureKind::ShapeMismatch, e.span,
                   "field " + std::to_string(n.index) + " of a value of shape " +
                       to_string(base->shape()));
              return std::nullopt;
            }
            return (*elems)[n.index];
          } else if constexpr (std::is_same_v<T, expr::Load>) {
            auto addr = eval_word(*n.address);
            if (!addr) return std::nullopt;
            std::size_t count = shape_size(n.shape);
            if (!check_local(*addr, count * wb_, true, e.span)) return std::nullopt;
            std::vector<Word> words;
            for (std::size_t i = 0; i < count; ++i) words.push_back(read_word(*addr + i * wb_));
            record(*addr, static_cast<unsigned>(count * wb_), false, false);
            std::size_t pos = 0;
            return build(n.shape, words, pos);
          } else if constexpr (std::is_same_v<T, expr::LoadByte>) {
            auto addr = eval_word(*n.address);
            if (!addr) return std::nullopt;
            if (!check_local(*addr, 1, false, e.span)) return std::nullopt;
            record(*addr, 1, false, false);
            return Value::word(st.memory[*addr - st.memory_base]);
          } else if constexpr (std::is_same_v<T, expr::Op>) {
            if (n.args.empty()) {
              fail(FailureKind::ShapeMismatch, e.span, "operator without operands");
              return std::nullopt;
            }
            auto acc = eval_word(n.args[0]);
            if (!acc) return std::nullopt;
            for (std::size_t i = 1; i < n.args.size(); ++i) {
              auto rhs = eval_word(n.args[i]);
              if (!rhs) return std::nullopt;
              acc = apply_binop(n.op, *acc, *rhs, width_);
              if (!acc) {
                fail(FailureKind::DivByZero, e.span, "division by zero");
                return std::nullopt;
              }
            }
            return Value::word(*acc);
          } else if constexpr (std::is_same_v<T, expr::Cmp>) {
            auto a = eval_word(*n.lhs);
            if (!a) return std::nullopt;
            auto b = eval_word(*n.rhs);
            if (!b) return std::nullopt;
            return Value::word(apply_cmp(n.op, *a, *b) ? 1 : 0);
          } else if constexpr (std::is_same_v<T, expr::Shift>) {
            auto a = eval_word(*n.operand);
            if (!a) return std::nullopt;
            return Value::word(apply_shift(n.kind, *a, n.amount, width_));
          } else if constexpr (std::is_same_v<T, expr::BaseAddr>) {
            return Value::word(st.memory_base);
          } else if constexpr (std::is_same_v<T, expr::BytesInWord>) {
            return Value::word(wb_);
          } else {
            fail(FailureKind::ShapeMismatch, e.span, "annotation-only expression in code");
            return std::nullopt;
          }
        },
        e.node);
  }

 private:
  Flow fail(FailureKind kind, const Span& span, std::string detail) {
    failure = Failed{kind, span, std::move(detail)};
    return Flow::Fail;
  }

  bool consume_fuel() {
    if (st.fuel == 0) return false;
    --st.fuel;
    return true;
  }

  std::optional<Word> eval_word(const Expr& e) {
    auto v = eval(e);
    if (!v) return std::nullopt;
    if (!v->is_word()) {
      fail(FailureKind::ShapeMismatch, e.span, "expected a word, found " + v->to_string());
      return std::nullopt;
    }
    return v->as_word();
  }

  const SharedRange* shared_at(Word addr) const {
    for (const auto& r : shared_)
      if (r.lo <= addr && addr <= r.hi) return &r;
    return nullptr;
  }

  bool check_local(Word addr, std::size_t bytes, bool word_access, const Span& span) {
    if (word_access && addr % wb_ != 0) {
      fail(FailureKind::MisalignedAccess, span, "word access at unaligned address " + hex(addr));
      return false;
    }
    const std::size_t size = st.memory.size();
    if (addr < st.memory_base || bytes > size || addr - st.memory_base > size - bytes) {
      if (auto* r = shared_at(addr))
        fail(FailureKind::OutOfRangeAccess, span,
             "address " + hex(addr) + " belongs to shared region '" + r->decl->name +
                 "' and needs a shared-memory operation");
      else
        fail(FailureKind::OutOfRangeAccess, span, "address " + hex(addr) + " is outside local memory");
      return false;
    }
    return true;
  }

  Word read_word(Word addr) const {
    Word w = 0;
    const std::size_t off = addr - st.memory_base;
    for (unsigned i = 0; i < wb_; ++i) w |= Word{st.memory[off + i]} << (8 * i);
    return w;
  }

  void write_word(Word addr, Word w) {
    const std::size_t off = addr - st.memory_base;
    for (unsigned i = 0; i < wb_; ++i) st.memory[off + i] = static_cast<std::uint8_t>(w >> (8 * i));
  }

  void record(Word addr, unsigned bytes, bool shared, bool write) {
    if (logging) log.push_back(AccessRecord{current_fn_, addr, bytes, shared, write});
  }

  static Value build(const Shape& shape, const std::vector<Word>& words, std::size_t& pos) {
    if (shape.is_word()) return Value::word(words[pos++]);
    std::vector<Value> elems;
    for (const auto& s : shape.elements()) elems.push_back(build(s, words, pos));
    return Value::aggregate(std::move(elems));
  }

  bool flatten(const Value& v, std::vector<Word>& out, const Span& span) {
    if (v.is_word()) {
      out.push_back(v.as_word());
      return true;
    }
    if (v.as_label()) {
      fail(FailureKind::ShapeMismatch, span, "code labels cannot be stored in memory");
      return false;
    }
    for (const auto& e : *v.as_aggregate())
      if (!flatten(e, out, span)) return false;
    return true;
  }

  Flow assign(const std::string& name, Value v, const Span& span) {
    auto it = st.locals.find(name);
    if (it == st.locals.end())
      return fail(FailureKind::UnboundVar, span, "assignment to unbound variable '" + name + "'");
    if (!(it->second.shape() == v.shape()))
      return fail(FailureKind::ShapeMismatch, span,
                  "'" + name + "' has shape " + to_string(it->second.shape()) +
                      " but the value has shape " + to_string(v.shape()));
    it->second = std::move(v);
    return Flow::Normal;
  }

  // Binds `name` for the duration of `body`, restoring any shadowed binding.
  Flow scoped(const std::string& name, Value v, const Stmt& body) {
    auto node = st.locals.extract(name);
    st.locals[name] = std::move(v);
    Flow flow = exec(body);
    st.locals.erase(name);
    if (!node.empty()) st.locals.insert(std::move(node));
    return flow;
  }

  Flow invoke(const Function& f, const std::vector<Value>& args, const Span& span,
              std::optional<Value>& result) {
    if (args.size() != f.params.size())
      return fail(FailureKind::ShapeMismatch, span,
                  "'" + f.name + "' expects " + std::to_string(f.params.size()) +
                      " arguments, got " + std::to_string(args.size()));
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!(args[i].shape() == f.params[i].shape))
        return fail(FailureKind::ShapeMismatch, span,
                    "argument '" + f.params[i].name + "' of '" + f.name + "' expects shape " +
                        to_string(f.params[i].shape));
    }
    if (depth_ >= cfg_.max_call_depth)
      return fail(FailureKind::StackExhausted, span, "call depth limit reached in '" + f.name + "'");
    std::map<std::string, Value, std::less<>> frame;
    for (std::size_t i = 0; i < args.size(); ++i) frame[f.params[i].name] = args[i];
    std::swap(frame, st.locals);
    std::string caller = std::move(current_fn_);
    current_fn_ = f.name;
    ++depth_;
    Flow flow = exec(f.body);
    --depth_;
    current_fn_ = std::move(caller);
    std::swap(frame, st.locals);
    switch (flow) {
      case Flow::Normal: result = Value::word(0); return Flow::Normal;
      case Flow::Return: result = ret_; return Flow::Normal;
      case Flow::Break:
      case Flow::Continue:
        return fail(FailureKind::InvalidControl, f.body.span,
                    "break or continue escaped function '" + f.name + "'");
      default: return flow;
    }
  }

  Flow call(const Span& span, const Expr& callee, const std::vector<Expr>& args,
            std::optional<Value>& result) {
    if (!consume_fuel()) return Flow::OutOfFuel;
    auto target = eval(callee);
    if (!target) return Flow::Fail;
    auto* label = target->as_label();
    if (!label) return fail(FailureKind::ShapeMismatch, callee.span, "callee is not a code label");
    const Function* f = p_.find_function(label->name);
    if (!f) return fail(FailureKind::UnboundVar, callee.span, "no function named '" + label->name + "'");
    std::vector<Value> argv;
    for (const auto& a : args) {
      auto v = eval(a);
      if (!v) return Flow::Fail;
      argv.push_back(std::move(*v));
    }
    return invoke(*f, argv, span, result);
  }

  const SharedRange* shared_for(Word addr, unsigned bits, bool store, const Span& span) {
    const SharedRange* r = shared_at(addr);
    if (!r) {
      fail(FailureKind::UndeclaredSharedRegion, span,
           "no shared region covers address " + hex(addr));
      return nullptr;
    }
    if (r->decl->width_bits != bits) {
      fail(FailureKind::UndeclaredSharedRegion, span,
           "shared region '" + r->decl->name + "' is declared u" +
               std::to_string(r->decl->width_bits) + " but accessed with " + std::to_string(bits) +
               " bits");
      return nullptr;
    }
    if (store ? !permits_store(r->decl->access) : !permits_load(r->decl->access)) {
      fail(FailureKind::UndeclaredSharedRegion, span,
           "shared region '" + r->decl->name + "' is " + std::string(to_string(r->decl->access)) +
               " and does not permit " + (store ? "stores" : "loads"));
      return nullptr;
    }
    return r;
  }

  Flow exec(const Stmt& s) {
    return std::visit(
        [&](const auto& n) -> Flow {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::Skip> || std::is_same_v<T, stmt::Annot>) {
            return Flow::Normal;
          } else if constexpr (std::is_same_v<T, stmt::Dec>) {
            auto v = eval(n.init);
            if (!v) return Flow::Fail;
            return scoped(n.name, std::move(*v), *n.body);
          } else if constexpr (std::is_same_v<T, stmt::Assign>) {
            auto v = eval(n.value);
            if (!v) return Flow::Fail;
            return assign(n.name, std::move(*v), s.span);
          } else if constexpr (std::is_same_v<T, stmt::Store>) {
            auto addr = eval_word(n.address);
            if (!addr) return Flow::Fail;
            auto v = eval(n.value);
            if (!v) return Flow::Fail;
            std::vector<Word> words;
            if (!flatten(*v, words, s.span)) return Flow::Fail;
            if (!check_local(*addr, words.size() * wb_, true, s.span)) return Flow::Fail;
            for (std::size_t i = 0; i < words.size(); ++i) write_word(*addr + i * wb_, words[i]);
            record(*addr, static_cast<unsigned>(words.size() * wb_), false, true);
            return Flow::Normal;
          } else if constexpr (std::is_same_v<T, stmt::StoreByte>) {
            auto addr = eval_word(n.address);
            if (!addr) return Flow::Fail;
            auto v = eval_word(n.value);
            if (!v) return Flow::Fail;
            if (!check_local(*addr, 1, false, s.span)) return Flow::Fail;
            st.memory[*addr - st.memory_base] = static_cast<std::uint8_t>(*v);
            record(*addr, 1, false, true);
            return Flow::Normal;
          } else if constexpr (std::is_same_v<T, stmt::Seq>) {
            Flow f = exec(*n.first);
            if (f != Flow::Normal) return f;
            return exec(*n.second);
          } else if constexpr (std::is_same_v<T, stmt::If>) {
            auto c = eval_word(n.cond);
            if (!c) return Flow::Fail;
            return exec(*c ? *n.then_branch : *n.else_branch);
          } else if constexpr (std::is_same_v<T, stmt::While>) {
            while (true) {
              auto c = eval_word(n.cond);
              if (!c) return Flow::Fail;
              if (*c == 0) return Flow::Normal;
              if (!consume_fuel()) return Flow::OutOfFuel;
              Flow f = exec(*n.body);
              if (f == Flow::Break) return Flow::Normal;
              if (f != Flow::Normal && f != Flow::Continue) return f;
            }
          } else if constexpr (std::is_same_v<T, stmt::Break>) {
            return Flow::Break;
          } else if constexpr (std::is_same_v<T, stmt::Continue>) {
            return Flow::Continue;
          } else if constexpr (std::is_same_v<T, stmt::Call>) {
            std::optional<Value> result;
            Flow f = call(s.span, n.callee, n.args, result);
            if (f != Flow::Normal) return f;
            if (n.target) return assign(*n.target, std::move(*result), s.span);
            return Flow::Normal;
          } else if constexpr (std::is_same_v<T, stmt::Raise>) {
            auto v = eval(n.value);
            if (!v) return Flow::Fail;
            exn_ = n.exception;
            ret_ = std::move(*v);
            return Flow::Raise;
          } else if constexpr (std::is_same_v<T, stmt::Return>) {
            auto v = eval(n.value);
            if (!v) return Flow::Fail;
            ret_ = std::move(*v);
            return Flow::Return;
          } else if constexpr (std::is_same_v<T, stmt::Tick>) {
            return consume_fuel() ? Flow::Normal : Flow::OutOfFuel;
          } else if constexpr (std::is_same_v<T, stmt::ShMemStore>) {
            auto addr = eval_word(n.address);
            if (!addr) return Flow::Fail;
            auto v = eval_word(n.value);
            if (!v) return Flow::Fail;
            const SharedRange* r = shared_for(*addr, n.size_bits, true, s.span);
            if (!r) return Flow::Fail;
            Word value = *v & word_mask(n.size_bits);
            IoReply reply = oracle->respond(StoreRequest{*addr, n.size_bits, value, r->decl->name});
            if (reply.rejection)
              return fail(FailureKind::EnvRejected, s.span, *reply.rejection);
            st.trace.push_back(SharedStoreEv{*addr, n.size_bits, value});
            record(*addr, n.size_bits / 8, true, true);
            return Flow::Normal;
          } else if constexpr (std::is_same_v<T, stmt::ShMemLoad>) {
            auto addr = eval_word(n.address);
            if (!addr) return Flow::Fail;
            const SharedRange* r = shared_for(*addr, n.size_bits, false, s.span);
            if (!r) return Flow::Fail;
            IoReply reply = oracle->respond(LoadRequest{*addr, n.size_bits, r->decl->name});
            if (reply.rejection)
              return fail(FailureKind::EnvRejected, s.span, *reply.rejection);
            if (reply.value > word_mask(n.size_bits))
              return fail(FailureKind::EnvRejected, s.span,
                          "environment answered " + hex(reply.value) + " to a " +
                              std::to_string(n.size_bits) + "-bit load");
            st.trace.push_back(SharedLoadEv{*addr, n.size_bits, reply.value});
            record(*addr, n.size_bits / 8, true, false);
            return assign(n.target, Value::word(reply.value), s.span);
          } else if constexpr (std::is_same_v<T, stmt::DecCall>) {
            std::optional<Value> result;
            Flow f = call(s.span, n.callee, n.args, result);
            if (f != Flow::Normal) return f;
            if (!(result->shape() == n.shape))
              return fail(FailureKind::ShapeMismatch, s.span,
                          "'" + n.name + "' is declared with shape " + to_string(n.shape) +
                              " but the call returned shape " + to_string(result->shape()));
            return scoped(n.name, std::move(*result), *n.body);
          } else if constexpr (std::is_same_v<T, stmt::ExtCall>) {
            auto in_ptr = eval_word(n.in_ptr);
            if (!in_ptr) return Flow::Fail;
            auto in_len = eval_word(n.in_len);
            if (!in_len) return Flow::Fail;
            auto out_ptr = eval_word(n.out_ptr);
            if (!out_ptr) return Flow::Fail;
            auto out_len = eval_word(n.out_len);
            if (!out_len) return Flow::Fail;
            FfiRequest req{n.name, {}, static_cast<std::size_t>(*out_len)};
            if (*in_len > 0) {
              if (!check_local(*in_ptr, *in_len, false, s.span)) return Flow::Fail;
              auto off = *in_ptr - st.memory_base;
              req.in.assign(st.memory.begin() + static_cast<std::ptrdiff_t>(off),
                            st.memory.begin() + static_cast<std::ptrdiff_t>(off + *in_len));
            }
            if (*out_len > 0 && !check_local(*out_ptr, *out_len, false, s.span)) return Flow::Fail;
            IoReply reply = oracle->respond(req);
            if (reply.rejection)
              return fail(FailureKind::EnvRejected, s.span, *reply.rejection);
            if (reply.bytes.size() != *out_len)
              return fail(FailureKind::EnvRejected, s.span,
                          "foreign call '" + n.name + "' answered " +
                              std::to_string(reply.bytes.size()) + " bytes, expected " +
                              std::to_string(*out_len));
            for (std::size_t i = 0; i < reply.bytes.size(); ++i)
              st.memory[*out_ptr - st.memory_base + i] = reply.bytes[i];
            st.trace.push_back(FfiEv{n.name, std::move(req.in), reply.bytes});
            return Flow::Normal;
          }
        },
        s.node);
  }

  const Program& p_;
  InterpConfig cfg_;
  unsigned width_;
  unsigned wb_;
  std::map<std::string, Value, std::less<>> consts_;
  std::vector<SharedRange> shared_;
  unsigned depth_ = 0;
  std::string current_fn_;
  Value ret_;
  std::string exn_;
};

}  // namespace

struct Interpreter::Impl {
  Impl(const Program& p, InterpConfig cfg) : machine(p, cfg) {}
  Machine machine;
};

Interpreter::Interpreter(const Program& program, InterpConfig config)
    : impl_(std::make_unique<Impl>(program, config)) {}
Interpreter::~Interpreter() = default;

RunResult Interpreter::run(std::string_view entry, const std::vector<Value>& args,
                           EnvOracle& oracle, std::uint64_t fuel) {
  impl_->machine.oracle = &oracle;
  return impl_->machine.run(entry, args, fuel);
}

std::vector<std::uint8_t>& Interpreter::memory() { return impl_->machine.st.memory; }
const std::vector<std::uint8_t>& Interpreter::memory() const { return impl_->machine.st.memory; }
Word Interpreter::memory_base() const { return impl_->machine.st.memory_base; }
void Interpreter::set_access_logging(bool on) { impl_->machine.logging = on; }
const std::vector<AccessRecord>& Interpreter::access_log() const { return impl_->machine.log; }
void Interpreter::clear_access_log() { impl_->machine.log.clear(); }

RunResult run_function(const Program& program, std::string_view entry,
                       const std::vector<Value>& args, EnvOracle& oracle, std::uint64_t fuel,
                       InterpConfig config) {
  Interpreter interp(program, config);
  return interp.run(entry, args, oracle, fuel);
}

EvalResult eval_expr(const Program& program, const MachineState& state, const Expr& e) {
  InterpConfig cfg;
  cfg.memory_base = state.memory_base;
  cfg.memory_size = 0;
  Machine m(program, cfg);
  m.st = state;
  auto v = m.eval(e);
  if (v) return *v;
  return m.failure;
}

// ---------------------------------------------------------------------------
// Scripts

std::string ScriptMismatch::to_string() const {
  return "script mismatch at record " + std::to_string(position) + ": expected " + expected +
         ", got " + actual;
}

namespace {

Word parse_hex_word(const std::string& text, int line) {
  std::string digits = text;
  if (digits.rfind("0x", 0) == 0 || digits.rfind("0X", 0) == 0) digits = digits.substr(2);
  if (digits.empty() || digits.size() > 16 ||
      digits.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
    throw std::runtime_error("line " + std::to_string(line) + ": bad hex value '" + text + "'");
  return std::stoull(digits, nullptr, 16);
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& text, int line) {
  std::vector<std::uint8_t> out;
  if (text == "-") return out;
  if (text.size() % 2 != 0 || text.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
    throw std::runtime_error("line " + std::to_string(line) + ": bad byte string '" + text + "'");
  for (std::size_t i = 0; i < text.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoul(text.substr(i, 2), nullptr, 16)));
  return out;
}

unsigned parse_opsize(const std::string& text, int line) {
  if (text == "8" || text == "16" || text == "32" || text == "64")
    return static_cast<unsigned>(std::stoul(text));
  throw std::runtime_error("line " + std::to_string(line) + ": bad access size '" + text + "'");
}

bool same_request(const IoRequest& expected, const IoRequest& actual) {
  if (expected.index() != actual.index()) return false;
  if (auto* e = std::get_if<LoadRequest>(&expected)) {
    auto& a = std::get<LoadRequest>(actual);
    return e->address == a.address && e->size_bits == a.size_bits;
  }
  if (auto* e = std::get_if<StoreRequest>(&expected)) {
    auto& a = std::get<StoreRequest>(actual);
    return e->address == a.address && e->size_bits == a.size_bits && e->value == a.value;
  }
  auto& e = std::get<FfiRequest>(expected);
  auto& a = std::get<FfiRequest>(actual);
  return e.name == a.name && e.in == a.in;
}

class ScriptedOracle : public EnvOracle {
 public:
  explicit ScriptedOracle(const std::vector<ScriptEntry>& script) : script_(script) {}

  IoReply respond(const IoRequest& request) override {
    IoReply reject;
    reject.rejection = "script mismatch";
    if (mismatch) return reject;
    if (pos >= script_.size()) {
      mismatch = ScriptMismatch{pos, "<end of script>", to_string(request)};
      return reject;
    }
    if (!same_request(script_[pos].expected, request)) {
      mismatch = ScriptMismatch{pos, to_string(script_[pos].expected), to_string(request)};
      return reject;
    }
    return script_[pos++].reply;
  }

  std::size_t pos = 0;
  std::optional<ScriptMismatch> mismatch;

 private:
  const std::vector<ScriptEntry>& script_;
};

}  // namespace

std::vector<ScriptEntry> parse_script(const std::string& text) {
  std::vector<ScriptEntry> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream words(raw);
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    if (w.empty()) continue;
    ScriptEntry e;
    if (w[0] == "load" && w.size() == 5 && w[3] == "->") {
      unsigned bits = parse_opsize(w[2], line);
      e.expected = LoadRequest{parse_hex_word(w[1], line), bits, {}};
      e.reply.value = parse_hex_word(w[4], line);
    } else if (w[0] == "store" && w.size() == 4) {
      e.expected = StoreRequest{parse_hex_word(w[1], line), parse_opsize(w[2], line),
                                parse_hex_word(w[3], line), {}};
    } else if (w[0] == "ffi" && w.size() == 5 && w[3] == "->") {
      e.reply.bytes = parse_hex_bytes(w[4], line);
      e.expected = FfiRequest{w[1], parse_hex_bytes(w[2], line), e.reply.bytes.size()};
    } else {
      throw std::runtime_error("line " + std::to_string(line) + ": unrecognised record '" + raw +
                               "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_script_entry(const ScriptEntry& e) {
  if (auto* l = std::get_if<LoadRequest>(&e.expected))
    return "load " + hex(l->address) + " " + std::to_string(l->size_bits) + " -> " +
           hex(e.reply.value);
  if (std::holds_alternative<StoreRequest>(e.expected)) return to_string(e.expected);
  const auto& f = std::get<FfiRequest>(e.expected);
  return "ffi " + f.name + " " + bytes_hex(f.in) + " -> " + bytes_hex(e.reply.bytes);
}

ReplayResult replay_script(const Program& program, std::string_view entry,
                           const std::vector<Value>& args, const std::vector<ScriptEntry>& script,
                           std::uint64_t fuel, InterpConfig config) {
  ScriptedOracle oracle(script);
  RunResult result = run_function(program, entry, args, oracle, fuel, config);
  if (oracle.mismatch) return *oracle.mismatch;
  if (oracle.pos < script.size())
    return ScriptMismatch{oracle.pos, format_script_entry(script[oracle.pos]), "<end of run>"};
  return result;
}

}  // namespace panverif
