#pragma once

// Driving the mini-driver through schedules of device and OS events.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panverif/ast.hpp"
#include "panverif/harness/checks.hpp"
#include "panverif/harness/oracle.hpp"
#include "panverif/interp.hpp"

namespace panverif::harness {

/// One environment event. Device events raise an interrupt and run
/// `handle_irq`; OS enqueues run the matching provide function when the
/// driver asked to be woken.
enum class Step : char {
  Packet = 'P',     // the NIC fills the next RX descriptor it owns
  Sent = 'S',       // the NIC finishes the next TX descriptor it owns
  FreeBuf = 'F',    // the OS enqueues an empty buffer on rx_free
  Transmit = 'T',   // the OS enqueues a packet on tx_active
  ConsumeRx = 'R',  // the OS dequeues from rx_active, requesting a signal once empty
  ConsumeTx = 'U',  // the OS dequeues from tx_free, requesting a signal once empty
};
inline constexpr Step kSteps[] = {Step::Packet, Step::Sent,      Step::FreeBuf,
                                  Step::Transmit, Step::ConsumeRx, Step::ConsumeTx};

using Schedule = std::vector<Step>;
std::string to_string(const Schedule& s);
std::optional<Schedule> parse_schedule(std::string_view text);
/// One schedule per line; blank lines and '#' comments are skipped. Throws
/// std::runtime_error naming the line of a malformed schedule.
std::vector<Schedule> parse_schedule_file(const std::string& text);

struct HarnessConfig {
  std::size_t ring_capacity = 2;
  std::size_t queue_capacity = 2;
  std::uint64_t fuel = 20000;
  SignalPolicy policy;
  InterpConfig interp{0x10000, 0x1000, 200};
};

struct HarnessState {
  SimWorld world;
  std::vector<std::uint8_t> memory;
};

struct StepResult {
  std::optional<Activation> activation;
  Verdict verdict;
};

/// Runs driver activations on its own interpreter; use one per thread.
class DriverHarness {
 public:
  /// Throws std::runtime_error if the program lacks the expected regions.
  explicit DriverHarness(const Program& program, HarnessConfig cfg = {});

  HarnessState initial_state() const;
  /// Applies one event and checks the activation it triggers, if any, and
  /// the resulting state.
  StepResult step(HarnessState& state, Step step);
  /// A whole schedule from the initial state.
  Verdict run(const Schedule& schedule, std::vector<Activation>* log = nullptr);
  /// Runs one entry point directly against `state`.
  Activation activate(HarnessState& state, const std::string& entry, char trigger);

  const Layout& layout() const { return layout_; }
  const HarnessConfig& config() const { return cfg_; }

 private:
  const Program& program_;
  HarnessConfig cfg_;
  Layout layout_;
  Interpreter interp_;
};

struct ExploreOptions {
  std::size_t max_length = 6;
  /// Prefix length at which the parallel explorer hands out subtrees.
  std::size_t split_length = 2;
};

struct FindingExample {
  Finding finding;
  Schedule schedule;
  friend bool operator==(const FindingExample&, const FindingExample&) = default;
};

struct ExploreReport {
  /// Schedules explored, every length from 0 to the bound.
  std::size_t schedules = 0;
  std::size_t activations = 0;
  std::map<std::string, std::size_t> findings_by_checker;
  /// Per checker, the finding from the shortest (then alphabetically
  /// first) schedule exposing it.
  std::map<std::string, FindingExample> examples;

  bool ok() const { return findings_by_checker.empty(); }
  std::size_t findings() const;
  void merge(const ExploreReport& other);
  std::string summary() const;
  friend bool operator==(const ExploreReport&, const ExploreReport&) = default;
};

/// Depth-first over every schedule up to the bound, sharing prefixes.
ExploreReport explore_serial(const Program& program, const HarnessConfig& cfg, const ExploreOptions& opts);
/// Same exploration with subtrees spread over OpenMP threads; the report is
/// identical to the serial one.
ExploreReport explore_parallel(const Program& program, const HarnessConfig& cfg, const ExploreOptions& opts,
                               int threads = 0);
/// `count` uniformly random schedules of the given length.
ExploreReport explore_random(const Program& program, const HarnessConfig& cfg, std::size_t count,
                             std::size_t length, std::uint64_t seed);

}  // namespace panverif::harness
