#include "panverif/harness/checks.hpp"

#include <sstream>

namespace panverif::harness {

namespace {

std::string show(const Buffer& b) {
  std::ostringstream s;
  s << "(0x" << std::hex << b.addr << ", " << std::dec << b.len << ")";
  return s.str();
}

std::size_t count(const Activation& a, QueueOpKind kind, QueueId q) {
  std::size_t n = 0;
  for (const auto& op : a.queue_ops) n += op.kind == kind && op.queue == q;
  return n;
}

void pair_up(const Activation& a, RingOpKind ring_kind, RingId ring, QueueOpKind queue_kind, QueueId queue,
             Verdict& v) {
  std::vector<Buffer> from_ring, from_queue;
  for (const auto& op : a.ring_ops)
    if (op.kind == ring_kind && op.ring == ring) from_ring.push_back(op.buffer);
  for (const auto& op : a.queue_ops)
    if (op.kind == queue_kind && op.queue == queue) from_queue.push_back(op.buffer);
  std::string ring_what = std::string(ring_kind == RingOpKind::Provide ? "provided to " : "reclaimed from ") +
                          std::string(to_string(ring));
  std::string queue_what = std::string(queue_kind == QueueOpKind::Dequeue ? "dequeued from " : "enqueued to ") +
                           std::string(to_string(queue));
  if (from_ring.size() != from_queue.size())
    v.add("integrity", std::to_string(from_ring.size()) + " descriptors " + ring_what + " but " +
                           std::to_string(from_queue.size()) + " buffers " + queue_what);
  for (std::size_t i = 0; i < std::min(from_ring.size(), from_queue.size()); ++i)
    if (from_ring[i] != from_queue[i])
      v.add("integrity", "buffer " + show(from_queue[i]) + " " + queue_what + " but descriptor " +
                             show(from_ring[i]) + " " + ring_what);
}

}  // namespace

Verdict check_signal_protocol(const Activation& a, const SignalPolicy& policy) {
  Verdict v;
  for (QueueId q : kQueues) {
    std::string name(to_string(q));
    if (driver_consumes(q)) {
      RingId ring = q == QueueId::RxFree ? RingId::Rx : RingId::Tx;
      const SpscQueue& after = a.after.queue(q);
      if (after.empty() && a.after.ring(ring).vacancy() >= policy.vacancy_threshold && !after.signal_requested)
        v.add("signal", "missing wake-up request on " + name + " with " +
                            std::to_string(a.after.ring(ring).vacancy()) + " free descriptors");
      if (count(a, QueueOpKind::Signal, q))
        v.add("signal", "signal on " + name + ", which the driver consumes");
      continue;
    }
    bool requested = a.before.queue(q).signal_requested != 0;
    bool changed = count(a, QueueOpKind::Enqueue, q) != 0;
    std::size_t signals = count(a, QueueOpKind::Signal, q);
    if (signals && !requested) v.add("signal", "signal without request on " + name);
    if (signals && !changed) v.add("signal", "signal without state change on " + name);
    if (!signals && requested && changed) v.add("signal", "missed mandatory signal on " + name);
    if (signals > 1) v.add("signal", std::to_string(signals) + " signals on " + name + " in one activation");
    if (signals && a.after.queue(q).signal_requested) v.add("signal", "uncleaned request on " + name);
  }
  return v;
}

Verdict check_data_integrity(const Activation& a) {
  Verdict v;
  pair_up(a, RingOpKind::Provide, RingId::Rx, QueueOpKind::Dequeue, QueueId::RxFree, v);
  pair_up(a, RingOpKind::Reclaim, RingId::Rx, QueueOpKind::Enqueue, QueueId::RxActive, v);
  pair_up(a, RingOpKind::Provide, RingId::Tx, QueueOpKind::Dequeue, QueueId::TxActive, v);
  pair_up(a, RingOpKind::Reclaim, RingId::Tx, QueueOpKind::Enqueue, QueueId::TxFree, v);
  return v;
}

Verdict check_queue_bounds(const SimWorld& world) {
  Verdict v;
  for (QueueId q : kQueues) {
    const SpscQueue& s = world.queue(q);
    if (!s.bounded()) {
      std::int64_t diff = static_cast<std::int32_t>(s.tail - s.head);
      v.add("queue-bounds", std::string(to_string(q)) + (diff < 0 ? " underflow" : " overflow") +
                                ": tail - head = " + std::to_string(diff) + ", capacity " +
                                std::to_string(s.capacity()));
    }
  }
  return v;
}

Verdict check_valid_device(const SimDevice& device) {
  Verdict v;
  for (RingId r : {RingId::Rx, RingId::Tx}) {
    const DescriptorRing& ring = r == RingId::Rx ? device.rx : device.tx;
    if (std::string why = ring.describe_invalid(); !why.empty())
      v.add("valid-device", std::string(to_string(r)) + " " + why);
  }
  return v;
}

Verdict check_separation(const Activation& a, const Layout& layout) {
  Verdict v;
  for (const auto& acc : a.accesses) {
    Side fs = side_of_name(acc.function);
    if (fs == Side::Neutral) continue;
    const RegionInfo* r = layout.region_at(acc.address);
    if (!r || r->side == Side::Neutral || r->side == fs) continue;
    std::ostringstream s;
    s << acc.function << " " << (acc.write ? "writes" : "reads") << " " << r->name << " at 0x" << std::hex
      << acc.address;
    v.add("separation", s.str());
  }
  return v;
}

Verdict check_completion(const Activation& a) {
  Verdict v;
  if (!a.result.returned()) v.add("device-model", a.entry + ": " + a.result.summary());
  return v;
}

Verdict check_activation(const Activation& a, const Layout& layout, const SignalPolicy& policy) {
  Verdict v = check_completion(a);
  v.merge(check_signal_protocol(a, policy));
  v.merge(check_data_integrity(a));
  v.merge(check_queue_bounds(a.after));
  v.merge(check_valid_device(a.after.device));
  v.merge(check_separation(a, layout));
  return v;
}

}  // namespace panverif::harness
