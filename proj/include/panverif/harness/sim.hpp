#pragma once

// Executable model of the mini NIC and the SPSC queues it shares with the OS.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/word.hpp"

namespace panverif::harness {

inline constexpr std::uint32_t kDescOwn = 0x8000;
inline constexpr std::uint32_t kDescWrap = 0x2000;
inline constexpr unsigned kDescSize = 16;
inline constexpr unsigned kDescAddr = 0;
inline constexpr unsigned kDescLen = 4;
inline constexpr unsigned kDescFlags = 8;

inline constexpr unsigned kQueueTail = 0;
inline constexpr unsigned kQueueHead = 4;
inline constexpr unsigned kQueueReq = 8;
inline constexpr unsigned kQueueEntries = 16;
inline constexpr unsigned kQueueEntrySize = 8;

inline constexpr std::uint32_t kIrqMask = 0xa000000;
inline constexpr std::uint32_t kEirRxf = 0x2000000;
inline constexpr std::uint32_t kEirTxf = 0x8000000;

enum class SlotState { Free, Hardware, Done };

/// A descriptor ring as three integer sequences plus the hardware's view of
/// who owns each slot. `hw_next` is the next slot the hardware processes.
struct DescriptorRing {
  std::vector<std::uint32_t> addrs;
  std::vector<std::uint32_t> lens;
  std::vector<std::uint32_t> flags;
  std::vector<SlotState> states;
  std::size_t hw_next = 0;

  explicit DescriptorRing(std::size_t capacity = 2);

  std::size_t capacity() const { return addrs.size(); }
  std::uint32_t wrap_bits(std::size_t slot) const { return slot + 1 == capacity() ? kDescWrap : 0; }
  /// Slots not free for the driver to fill.
  std::size_t occupied() const;
  std::size_t vacancy() const { return capacity() - occupied(); }
  /// Bitfields hold only the ownership and wrap bits, wrap exactly on the
  /// last slot, ownership exactly when the hardware owns the slot, and
  /// lengths fit 16 bits.
  bool valid() const;
  std::string describe_invalid() const;

  friend bool operator==(const DescriptorRing&, const DescriptorRing&) = default;
};

struct Buffer {
  std::uint32_t addr = 0;
  std::uint32_t len = 0;
  friend bool operator==(const Buffer&, const Buffer&) = default;
};

/// Bounded queue with free-running 32-bit head and tail counters.
struct SpscQueue {
  std::vector<Buffer> entries;
  std::uint32_t tail = 0;
  std::uint32_t head = 0;
  std::uint32_t signal_requested = 0;

  explicit SpscQueue(std::size_t capacity = 2) : entries(capacity) {}

  std::size_t capacity() const { return entries.size(); }
  std::uint32_t size() const { return tail - head; }
  bool empty() const { return size() == 0; }
  bool full() const { return size() >= capacity(); }
  bool bounded() const { return size() <= capacity(); }
  Buffer& at(std::uint32_t counter) { return entries[counter % capacity()]; }
  const Buffer& at(std::uint32_t counter) const { return entries[counter % capacity()]; }

  friend bool operator==(const SpscQueue&, const SpscQueue&) = default;
};

struct SimDevice {
  DescriptorRing rx;
  DescriptorRing tx;
  std::uint32_t eir = 0;

  explicit SimDevice(std::size_t ring_capacity = 2) : rx(ring_capacity), tx(ring_capacity) {}
  bool valid() const { return rx.valid() && tx.valid(); }

  friend bool operator==(const SimDevice&, const SimDevice&) = default;
};

enum class QueueId { RxFree, RxActive, TxActive, TxFree };
inline constexpr QueueId kQueues[] = {QueueId::RxFree, QueueId::RxActive, QueueId::TxActive, QueueId::TxFree};
std::string_view to_string(QueueId q);
/// The driver consumes from rx_free and tx_active and produces into the
/// other two.
bool driver_consumes(QueueId q);

enum class RingId { Rx, Tx };
std::string_view to_string(RingId r);

struct SimWorld {
  SimDevice device;
  SpscQueue queues[4];
  std::uint32_t next_buffer = 0x80000000;
  std::uint32_t packets = 0;

  explicit SimWorld(std::size_t ring_capacity = 2, std::size_t queue_capacity = 2);

  SpscQueue& queue(QueueId q) { return queues[static_cast<int>(q)]; }
  const SpscQueue& queue(QueueId q) const { return queues[static_cast<int>(q)]; }
  DescriptorRing& ring(RingId r) { return r == RingId::Rx ? device.rx : device.tx; }
  const DescriptorRing& ring(RingId r) const { return r == RingId::Rx ? device.rx : device.tx; }

  friend bool operator==(const SimWorld&, const SimWorld&) = default;
};

enum class Side { Neutral, Rx, Tx };
std::string_view to_string(Side s);
/// Names starting with `rx_` belong to the receive path, `tx_` to transmit.
Side side_of_name(std::string_view name);

struct RegionInfo {
  std::string name;
  Word lo = 0;
  Word hi = 0;
  bool shared = false;
  Side side = Side::Neutral;
};

/// Where the driver's shared and local regions live, read from its
/// annotations.
struct Layout {
  Word eir = 0;
  Word rx_ring = 0;
  Word tx_ring = 0;
  Word queue_base[4] = {0, 0, 0, 0};
  std::vector<RegionInfo> regions;

  /// Throws std::runtime_error if a required shared region is missing.
  static Layout from_program(const Program& program, Word base_addr = 0x10000);

  Word ring_base(RingId r) const { return r == RingId::Rx ? rx_ring : tx_ring; }
  const RegionInfo* region_at(Word addr) const;
};

}  // namespace panverif::harness
