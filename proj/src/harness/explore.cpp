#include "panverif/harness/explore.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include <omp.h>

namespace panverif::harness {

namespace {

constexpr std::uint32_t kRxBufferLen = 2048;

void record(ExploreReport& rep, const StepResult& r, const Schedule& schedule) {
  if (r.activation) ++rep.activations;
  for (const auto& f : r.verdict.findings) {
    ++rep.findings_by_checker[f.checker];
    auto it = rep.examples.find(f.checker);
    FindingExample candidate{f, schedule};
    if (it == rep.examples.end()) {
      rep.examples.emplace(f.checker, std::move(candidate));
      continue;
    }
    const Schedule& old = it->second.schedule;
    if (schedule.size() < old.size() || (schedule.size() == old.size() && to_string(schedule) < to_string(old)))
      it->second = std::move(candidate);
  }
}

void dfs(DriverHarness& h, const HarnessState& state, Schedule& prefix, std::size_t max_length, ExploreReport& rep) {
  ++rep.schedules;
  if (prefix.size() >= max_length) return;
  for (Step st : kSteps) {
    HarnessState child = state;
    prefix.push_back(st);
    record(rep, h.step(child, st), prefix);
    dfs(h, child, prefix, max_length, rep);
    prefix.pop_back();
  }
}

void enumerate(std::size_t length, Schedule& prefix, std::vector<Schedule>& out) {
  if (prefix.size() == length) {
    out.push_back(prefix);
    return;
  }
  for (Step st : kSteps) {
    prefix.push_back(st);
    enumerate(length, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::string to_string(const Schedule& s) {
  std::string out;
  for (Step st : s) out += static_cast<char>(st);
  return out;
}

std::optional<Schedule> parse_schedule(std::string_view text) {
  Schedule s;
  for (char c : text) {
    auto it = std::find_if(std::begin(kSteps), std::end(kSteps), [c](Step st) { return static_cast<char>(st) == c; });
    if (it == std::end(kSteps)) return std::nullopt;
    s.push_back(*it);
  }
  return s;
}

std::vector<Schedule> parse_schedule_file(const std::string& text) {
  std::vector<Schedule> out;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    line = line.substr(0, line.find('#'));
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    auto s = parse_schedule(line);
    if (!s) throw std::runtime_error("line " + std::to_string(n) + ": bad schedule '" + line + "'");
    out.push_back(std::move(*s));
  }
  return out;
}

DriverHarness::DriverHarness(const Program& program, HarnessConfig cfg)
    : program_(program),
      cfg_(cfg),
      layout_(Layout::from_program(program, cfg.interp.memory_base)),
      interp_(program, cfg.interp) {
  interp_.set_access_logging(true);
}

HarnessState DriverHarness::initial_state() const {
  return {SimWorld(cfg_.ring_capacity, cfg_.queue_capacity), std::vector<std::uint8_t>(cfg_.interp.memory_size, 0)};
}

Activation DriverHarness::activate(HarnessState& state, const std::string& entry, char trigger) {
  Activation a;
  a.entry = entry;
  a.trigger = trigger;
  a.before = state.world;
  interp_.memory() = state.memory;
  interp_.clear_access_log();
  DeviceOracle oracle(state.world, layout_, a);
  a.result = interp_.run(entry, {}, oracle, cfg_.fuel);
  state.memory = interp_.memory();
  a.after = state.world;
  a.accesses = interp_.access_log();
  return a;
}

StepResult DriverHarness::step(HarnessState& state, Step st) {
  SimWorld& w = state.world;
  std::string entry;
  auto device_done = [&](DescriptorRing& ring, std::uint32_t irq) {
    std::size_t slot = ring.hw_next;
    if (ring.states[slot] != SlotState::Hardware) return;
    ring.states[slot] = SlotState::Done;
    ring.flags[slot] = ring.wrap_bits(slot);
    ring.hw_next = (slot + 1) % ring.capacity();
    w.device.eir |= irq;
    entry = "handle_irq";
  };
  auto os_enqueue = [&](QueueId id, std::uint32_t len, const char* provide) {
    SpscQueue& q = w.queue(id);
    if (q.full()) return;
    q.at(q.tail) = {w.next_buffer, len};
    w.next_buffer += 0x800;
    ++q.tail;
    if (q.signal_requested) {
      q.signal_requested = 0;
      entry = provide;
    }
  };
  auto os_consume = [&](QueueId id) {
    SpscQueue& q = w.queue(id);
    if (!q.empty()) ++q.head;
    if (q.empty()) q.signal_requested = 1;
  };
  switch (st) {
    case Step::Packet: {
      DescriptorRing& ring = w.device.rx;
      if (ring.states[ring.hw_next] == SlotState::Hardware) {
        ++w.packets;
        std::uint32_t len = 60 + (w.packets * 389) % 1455;
        ring.lens[ring.hw_next] = std::min(ring.lens[ring.hw_next], len);
      }
      device_done(ring, kEirRxf);
      break;
    }
    case Step::Sent:
      device_done(w.device.tx, kEirTxf);
      break;
    case Step::FreeBuf:
      os_enqueue(QueueId::RxFree, kRxBufferLen, "rx_provide");
      break;
    case Step::Transmit:
      os_enqueue(QueueId::TxActive, 300 + (w.next_buffer / 0x800 * 571) % 1200, "tx_provide");
      break;
    case Step::ConsumeRx:
      os_consume(QueueId::RxActive);
      break;
    case Step::ConsumeTx:
      os_consume(QueueId::TxFree);
      break;
  }
  StepResult r;
  if (entry.empty()) {
    r.verdict = check_queue_bounds(w);
    r.verdict.merge(check_valid_device(w.device));
    return r;
  }
  r.activation = activate(state, entry, static_cast<char>(st));
  r.verdict = check_activation(*r.activation, layout_, cfg_.policy);
  return r;
}

Verdict DriverHarness::run(const Schedule& schedule, std::vector<Activation>* log) {
  HarnessState state = initial_state();
  Verdict v;
  for (Step st : schedule) {
    StepResult r = step(state, st);
    v.merge(r.verdict);
    if (log && r.activation) log->push_back(std::move(*r.activation));
  }
  return v;
}

std::size_t ExploreReport::findings() const {
  std::size_t n = 0;
  for (const auto& [k, c] : findings_by_checker) n += c;
  return n;
}

void ExploreReport::merge(const ExploreReport& other) {
  schedules += other.schedules;
  activations += other.activations;
  for (const auto& [k, c] : other.findings_by_checker) findings_by_checker[k] += c;
  for (const auto& [k, e] : other.examples) {
    auto it = examples.find(k);
    if (it == examples.end()) {
      examples.emplace(k, e);
      continue;
    }
    const Schedule& old = it->second.schedule;
    if (e.schedule.size() < old.size() ||
        (e.schedule.size() == old.size() && to_string(e.schedule) < to_string(old)))
      it->second = e;
  }
}

std::string ExploreReport::summary() const {
  std::ostringstream s;
  s << schedules << " schedules, " << activations << " activations, " << findings() << " findings\n";
  for (const auto& [k, c] : findings_by_checker) {
    const auto& e = examples.at(k);
    s << "  " << k << ": " << c << " (e.g. after '" << to_string(e.schedule) << "': " << e.finding.message
      << ")\n";
  }
  return s.str();
}

ExploreReport explore_serial(const Program& program, const HarnessConfig& cfg, const ExploreOptions& opts) {
  DriverHarness h(program, cfg);
  ExploreReport rep;
  Schedule prefix;
  dfs(h, h.initial_state(), prefix, opts.max_length, rep);
  return rep;
}

ExploreReport explore_parallel(const Program& program, const HarnessConfig& cfg, const ExploreOptions& opts,
                               int threads) {
  std::size_t split = std::min(opts.split_length, opts.max_length);
  ExploreReport rep;
  if (split > 0) {
    DriverHarness h(program, cfg);
    Schedule prefix;
    dfs(h, h.initial_state(), prefix, split - 1, rep);
  }
  std::vector<Schedule> tasks;
  Schedule prefix;
  enumerate(split, prefix, tasks);
  std::vector<ExploreReport> parts(tasks.size());
  bool failed = false;
  std::string error;
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel num_threads(threads)
  {
    std::optional<DriverHarness> h;
    try {
      h.emplace(program, cfg);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        error = e.what();
      }
    }
#pragma omp for schedule(dynamic)
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!h) continue;
      HarnessState state = h->initial_state();
      Schedule s;
      for (std::size_t k = 0; k < tasks[i].size(); ++k) {
        s.push_back(tasks[i][k]);
        StepResult r = h->step(state, tasks[i][k]);
        if (k + 1 == tasks[i].size()) record(parts[i], r, s);
      }
      dfs(*h, state, s, opts.max_length, parts[i]);
    }
  }
  if (failed) throw std::runtime_error(error);
  for (const auto& p : parts) rep.merge(p);
  return rep;
}

ExploreReport explore_random(const Program& program, const HarnessConfig& cfg, std::size_t count,
                             std::size_t length, std::uint64_t seed) {
  DriverHarness h(program, cfg);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kSteps) - 1);
  ExploreReport rep;
  for (std::size_t i = 0; i < count; ++i) {
    HarnessState state = h.initial_state();
    Schedule s;
    for (std::size_t k = 0; k < length; ++k) {
      s.push_back(kSteps[pick(rng)]);
      record(rep, h.step(state, s.back()), s);
    }
    ++rep.schedules;
  }
  return rep;
}

}  // namespace panverif::harness
