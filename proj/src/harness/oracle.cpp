#include "panverif/harness/oracle.hpp"

#include <sstream>

namespace panverif::harness {

namespace {

std::string hx(Word w) {
  std::ostringstream s;
  s << "0x" << std::hex << w;
  return s.str();
}

IoReply reject(std::string why) {
  IoReply r;
  r.rejection = std::move(why);
  return r;
}

IoReply value(Word v) {
  IoReply r;
  r.value = v;
  return r;
}

}  // namespace

IoReply DeviceOracle::respond(const IoRequest& request) {
  if (auto* l = std::get_if<LoadRequest>(&request)) return load(*l);
  if (auto* s = std::get_if<StoreRequest>(&request)) return store(*s);
  const auto& f = std::get<FfiRequest>(request);
  QueueId q;
  if (f.name == "signal_rx") {
    q = QueueId::RxActive;
  } else if (f.name == "signal_tx") {
    q = QueueId::TxFree;
  } else {
    return reject("no model method 'ffi_" + f.name + "'");
  }
  log_.queue_ops.push_back({QueueOpKind::Signal, q, {}});
  IoReply r;
  r.bytes.assign(f.out_len, 0);
  return r;
}

IoReply DeviceOracle::load(const LoadRequest& r) {
  if (r.size_bits != 32) return reject("device registers and queues are 32 bits wide");
  if (r.address % 4 != 0) return reject("misaligned access at " + hx(r.address));
  if (r.address == layout_.eir) return value(world_.device.eir);
  for (RingId id : {RingId::Rx, RingId::Tx}) {
    Word base = layout_.ring_base(id);
    const DescriptorRing& ring = world_.ring(id);
    if (r.address < base || r.address >= base + ring.capacity() * kDescSize) continue;
    Word off = r.address - base;
    std::size_t slot = off / kDescSize;
    switch (off % kDescSize) {
      case kDescAddr: return value(ring.addrs[slot]);
      case kDescLen: return value(ring.lens[slot]);
      case kDescFlags: return value(ring.flags[slot]);
      default: return value(0);
    }
  }
  for (QueueId id : kQueues) {
    Word base = layout_.queue_base[static_cast<int>(id)];
    const SpscQueue& q = world_.queue(id);
    if (r.address < base || r.address >= base + kQueueEntries + q.capacity() * kQueueEntrySize) continue;
    Word off = r.address - base;
    if (off == kQueueTail) return value(q.tail);
    if (off == kQueueHead) return value(q.head);
    if (off == kQueueReq) return value(q.signal_requested);
    if (off < kQueueEntries) return value(0);
    const Buffer& b = q.entries[(off - kQueueEntries) / kQueueEntrySize];
    return value((off - kQueueEntries) % kQueueEntrySize == 0 ? b.addr : b.len);
  }
  return reject("load from unmodelled address " + hx(r.address));
}

IoReply DeviceOracle::store(const StoreRequest& r) {
  if (r.size_bits != 32) return reject("device registers and queues are 32 bits wide");
  if (r.address % 4 != 0) return reject("misaligned access at " + hx(r.address));
  auto v = static_cast<std::uint32_t>(r.value);
  if (r.address == layout_.eir) {
    if (v != kIrqMask) return reject("store_EIR requires value == IRQ_MASK, got " + hx(v));
    world_.device.eir &= ~v;
    return {};
  }
  for (RingId id : {RingId::Rx, RingId::Tx}) {
    Word base = layout_.ring_base(id);
    if (r.address >= base && r.address < base + world_.ring(id).capacity() * kDescSize)
      return ring_store(id, r.address - base, v);
  }
  for (QueueId id : kQueues) {
    Word base = layout_.queue_base[static_cast<int>(id)];
    if (r.address >= base && r.address < base + kQueueEntries + world_.queue(id).capacity() * kQueueEntrySize)
      return queue_store(id, r.address - base, v);
  }
  return reject("store to unmodelled address " + hx(r.address));
}

IoReply DeviceOracle::ring_store(RingId id, Word off, std::uint32_t v) {
  DescriptorRing& ring = world_.ring(id);
  std::size_t slot = off / kDescSize;
  std::string where = std::string(to_string(id)) + " slot " + std::to_string(slot);
  SlotState& state = ring.states[slot];
  switch (off % kDescSize) {
    case kDescAddr:
    case kDescLen:
      if (state == SlotState::Hardware) return reject(where + " is owned by the hardware");
      if (off % kDescSize == kDescLen && v >= 0x10000)
        return reject("valid_device requires 16-bit lengths, " + where + " given " + std::to_string(v));
      (off % kDescSize == kDescAddr ? ring.addrs : ring.lens)[slot] = v;
      return {};
    case kDescFlags: {
      std::uint32_t wrap = ring.wrap_bits(slot);
      if (v != wrap && v != (kDescOwn | wrap))
        return reject("valid_device forbids bitfield " + hx(v) + " in " + where);
      if (v & kDescOwn) {
        if (state != SlotState::Free) return reject(where + " is not free");
        state = SlotState::Hardware;
        ring.flags[slot] = v;
        log_.ring_ops.push_back({RingOpKind::Provide, id, slot, {ring.addrs[slot], ring.lens[slot]}});
      } else {
        if (state == SlotState::Hardware) return reject(where + " is owned by the hardware");
        if (state == SlotState::Done)
          log_.ring_ops.push_back({RingOpKind::Reclaim, id, slot, {ring.addrs[slot], ring.lens[slot]}});
        state = SlotState::Free;
        ring.flags[slot] = v;
      }
      return {};
    }
    default:
      return reject("store to reserved word of " + where);
  }
}

IoReply DeviceOracle::queue_store(QueueId id, Word off, std::uint32_t v) {
  SpscQueue& q = world_.queue(id);
  std::string name(to_string(id));
  bool consumer = driver_consumes(id);
  if (off == kQueueReq) {
    if (consumer ? v > 1 : v != 0) return reject("store_" + name + " forbids request flag " + hx(v));
    q.signal_requested = v;
    log_.queue_ops.push_back({v ? QueueOpKind::SetRequest : QueueOpKind::ClearRequest, id, {}});
    return {};
  }
  if (consumer && off == kQueueHead) {
    // An out-of-step head is applied anyway so the bounds check sees it.
    Buffer b = q.at(q.head);
    q.head = v;
    log_.queue_ops.push_back({QueueOpKind::Dequeue, id, b});
    return {};
  }
  if (!consumer && off == kQueueTail) {
    Buffer b = q.at(q.tail);
    q.tail = v;
    log_.queue_ops.push_back({QueueOpKind::Enqueue, id, b});
    return {};
  }
  if (!consumer && off >= kQueueEntries) {
    Buffer& b = q.entries[(off - kQueueEntries) / kQueueEntrySize];
    ((off - kQueueEntries) % kQueueEntrySize == 0 ? b.addr : b.len) = v;
    return {};
  }
  return reject("store_" + name + " does not permit a driver store at offset " + std::to_string(off));
}

}  // namespace panverif::harness
