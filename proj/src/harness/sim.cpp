#include "panverif/harness/sim.hpp"

#include <sstream>
#include <stdexcept>

#include "panverif/transpile.hpp"

namespace panverif::harness {

DescriptorRing::DescriptorRing(std::size_t capacity)
    : addrs(capacity), lens(capacity), flags(capacity), states(capacity, SlotState::Free) {
  for (std::size_t i = 0; i < capacity; ++i) flags[i] = wrap_bits(i);
}

std::size_t DescriptorRing::occupied() const {
  std::size_t n = 0;
  for (auto s : states) n += s != SlotState::Free;
  return n;
}

std::string DescriptorRing::describe_invalid() const {
  for (std::size_t i = 0; i < capacity(); ++i) {
    std::uint32_t f = flags[i];
    std::ostringstream s;
    s << "slot " << i << ": ";
    if (f & ~(kDescOwn | kDescWrap)) {
      s << "bitfield has stray bits 0x" << std::hex << f;
      return s.str();
    }
    if ((f & kDescWrap) != wrap_bits(i)) return s.str() + "wrap bit " + ((f & kDescWrap) ? "set" : "clear");
    if (((f & kDescOwn) != 0) != (states[i] == SlotState::Hardware))
      return s.str() + "ownership bit disagrees with the hardware";
    if (lens[i] >= 0x10000) return s.str() + "length " + std::to_string(lens[i]) + " exceeds 16 bits";
  }
  return "";
}

bool DescriptorRing::valid() const { return describe_invalid().empty(); }

std::string_view to_string(QueueId q) {
  switch (q) {
    case QueueId::RxFree: return "rx_free";
    case QueueId::RxActive: return "rx_active";
    case QueueId::TxActive: return "tx_active";
    case QueueId::TxFree: return "tx_free";
  }
  return "?";
}

bool driver_consumes(QueueId q) { return q == QueueId::RxFree || q == QueueId::TxActive; }

std::string_view to_string(RingId r) { return r == RingId::Rx ? "rx_ring" : "tx_ring"; }

SimWorld::SimWorld(std::size_t ring_capacity, std::size_t queue_capacity)
    : device(ring_capacity),
      queues{SpscQueue(queue_capacity), SpscQueue(queue_capacity), SpscQueue(queue_capacity),
             SpscQueue(queue_capacity)} {
  for (auto& q : queues) q.signal_requested = 1;
}

std::string_view to_string(Side s) {
  switch (s) {
    case Side::Neutral: return "neutral";
    case Side::Rx: return "rx";
    case Side::Tx: return "tx";
  }
  return "?";
}

Side side_of_name(std::string_view name) {
  if (name.starts_with("rx_")) return Side::Rx;
  if (name.starts_with("tx_")) return Side::Tx;
  return Side::Neutral;
}

Layout Layout::from_program(const Program& program, Word base_addr) {
  Layout l;
  ConstEnv env = constant_env(program);
  DispatchTable table = build_dispatch_table(program, env, program.word_width);
  auto base_of = [&](std::string_view name) -> Word {
    for (const auto& e : table.entries)
      if (e.decl.name == name) return e.lo;
    throw std::runtime_error("driver declares no shared region '" + std::string(name) + "'");
  };
  l.eir = base_of("EIR");
  l.rx_ring = base_of("rx_ring");
  l.tx_ring = base_of("tx_ring");
  for (QueueId q : kQueues) l.queue_base[static_cast<int>(q)] = base_of(to_string(q));
  for (const auto& e : table.entries) l.regions.push_back({e.decl.name, e.lo, e.hi, true, side_of_name(e.decl.name)});
  for (const auto& f : program.functions) {
    for (const auto* r : f.regions()) {
      auto lo = eval_const(r->range.lo, env, program.word_width, base_addr);
      auto hi = eval_const(r->range.upper(), env, program.word_width, base_addr);
      if (!lo || !hi) throw std::runtime_error("region '" + r->name + "' of '" + f.name + "' is not constant");
      bool seen = false;
      for (const auto& x : l.regions) seen = seen || (x.name == r->name && x.lo == *lo && x.hi == *hi);
      if (!seen) l.regions.push_back({r->name, *lo, *hi, false, side_of_name(r->name)});
    }
  }
  return l;
}

const RegionInfo* Layout::region_at(Word addr) const {
  for (const auto& r : regions)
    if (r.lo <= addr && addr <= r.hi) return &r;
  return nullptr;
}

}  // namespace panverif::harness
