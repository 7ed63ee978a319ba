#pragma once

// The simulated device and OS queues as an interpreter environment.

#include <string>
#include <vector>

#include "panverif/harness/sim.hpp"
#include "panverif/interp.hpp"

namespace panverif::harness {

enum class QueueOpKind { Enqueue, Dequeue, SetRequest, ClearRequest, Signal };

/// A queue operation performed by the driver. `buffer` is the entry moved
/// by an enqueue or dequeue.
struct QueueOp {
  QueueOpKind kind = QueueOpKind::Enqueue;
  QueueId queue = QueueId::RxFree;
  Buffer buffer;
};

enum class RingOpKind { Provide, Reclaim };

/// A descriptor changing hands: Provide gives a filled slot to the
/// hardware, Reclaim takes a completed slot back.
struct RingOp {
  RingOpKind kind = RingOpKind::Provide;
  RingId ring = RingId::Rx;
  std::size_t slot = 0;
  Buffer buffer;
};

/// One driver entry point run to completion against the simulation.
struct Activation {
  std::string entry;
  char trigger = '?';
  RunResult result;
  SimWorld before;
  SimWorld after;
  std::vector<QueueOp> queue_ops;
  std::vector<RingOp> ring_ops;
  std::vector<AccessRecord> accesses;
};

/// Answers the driver's shared-memory accesses and foreign calls from a
/// SimWorld, recording what they mean. Stores the device or neighbour
/// models forbid are rejected, which stops the run.
class DeviceOracle : public EnvOracle {
 public:
  DeviceOracle(SimWorld& world, const Layout& layout, Activation& log)
      : world_(world), layout_(layout), log_(log) {}
  IoReply respond(const IoRequest& request) override;

 private:
  IoReply load(const LoadRequest& r);
  IoReply store(const StoreRequest& r);
  IoReply ring_store(RingId ring, Word offset, std::uint32_t value);
  IoReply queue_store(QueueId q, Word offset, std::uint32_t value);

  SimWorld& world_;
  const Layout& layout_;
  Activation& log_;
};

}  // namespace panverif::harness
