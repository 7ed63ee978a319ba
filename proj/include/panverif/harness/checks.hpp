#pragma once

// Protocol checkers over driver activations and simulation states.

#include <string>
#include <vector>

#include "panverif/harness/oracle.hpp"
#include "panverif/harness/sim.hpp"

namespace panverif::harness {

struct Finding {
  std::string checker;
  std::string message;
  friend bool operator==(const Finding&, const Finding&) = default;
};

struct Verdict {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  void add(std::string checker, std::string message) { findings.push_back({std::move(checker), std::move(message)}); }
  void merge(const Verdict& other) { findings.insert(findings.end(), other.findings.begin(), other.findings.end()); }
};

struct SignalPolicy {
  /// A consumer queue that ran dry while its ring has at least this many
  /// free slots must carry a wake-up request.
  std::size_t vacancy_threshold = 1;
};

/// For each queue the driver produces into: it signals iff the OS had
/// requested a signal and the driver enqueued something, at most once, and
/// leaves the request cleared when it signals. For each queue it consumes
/// from: an empty queue with ring vacancy must have a wake-up request.
Verdict check_signal_protocol(const Activation& a, const SignalPolicy& policy = {});

/// Every descriptor handed to the hardware holds the buffer dequeued for it,
/// every buffer enqueued to the OS is the descriptor reclaimed for it, and
/// the counts agree.
Verdict check_data_integrity(const Activation& a);

/// 0 <= tail - head <= capacity for every queue.
Verdict check_queue_bounds(const SimWorld& world);

Verdict check_valid_device(const SimDevice& device);

/// Receive-path functions touch no transmit regions and vice versa.
Verdict check_separation(const Activation& a, const Layout& layout);

/// The run returned normally (the models accepted every request).
Verdict check_completion(const Activation& a);

/// All of the above for one activation.
Verdict check_activation(const Activation& a, const Layout& layout, const SignalPolicy& policy = {});

}  // namespace panverif::harness
