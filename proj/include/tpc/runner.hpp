#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tpc/context.hpp"
#include "tpc/fault.hpp"
#include "tpc/tcp.hpp"
#include "tpc/transport.hpp"

namespace tpc {

/// What one party saw at the end of a run.
struct PartyOutcome {
  Party me = Party::P0;
  bool aborted = false;
  std::string abort_check;
  std::string error;  // anything other than a protocol abort
  std::vector<RingElement> outputs;
  CommMeter meter;
  std::array<std::array<Digest, kPhaseCount>, 3> transcripts{};  // [peer][phase]
  std::array<double, kPhaseCount> seconds{};

  bool ok() const { return !aborted && error.empty(); }
};

using PartyFn = std::function<std::vector<RingElement>(PartyContext&)>;

struct RunOptions {
  Seed128 seed = seed_from_u64(1);
  const FaultScript* faults = nullptr;
  ShareAuditor* auditor = nullptr;
  std::chrono::milliseconds timeout = std::chrono::seconds(60);
};

struct RunResult {
  std::array<PartyOutcome, 3> parties;

  const PartyOutcome& at(Party p) const { return parties[index_of(p)]; }
  bool all_ok() const;
  /// Every party aborted (no honest party produced output).
  bool all_aborted() const;
  /// Honest parties, i.e. those not named by the fault script, all aborted or all output.
  bool unanimous(const FaultScript* faults) const;
  /// Longest dependency chain of frames in `ph`.
  std::uint32_t rounds(Phase ph) const;
  /// Sent totals over all parties.
  MeterCell sent(Phase ph, Category cat) const;
  /// Ring elements sent in `ph` (Ring category only).
  std::uint64_t ring_elements(Phase ph) const { return sent(ph, Category::Ring).elements; }
  std::uint64_t ring_bits(Phase ph) const { return sent(ph, Category::Ring).bits; }
  double seconds(Phase ph) const;
};

/// One party's protocol run over the given channels. Catches aborts, tells the
/// peers, and never throws.
PartyOutcome run_party(Party me, KeySetup& keys, std::array<std::unique_ptr<Channel>, 3> channels,
                       const PartyFn& fn, const FaultScript* faults = nullptr, ShareAuditor* auditor = nullptr);

/// All three parties in threads over an in-process network.
RunResult run_mem(const PartyFn& fn, const RunOptions& opts = {});
/// Per-party functions.
RunResult run_mem(const std::array<PartyFn, 3>& fns, const RunOptions& opts = {});

/// This party only, over TCP (one process per party).
PartyOutcome run_tcp(Party me, const std::array<PeerAddress, 3>& peers, KeySetup& keys, const PartyFn& fn,
                     const FaultScript* faults = nullptr,
                     std::chrono::milliseconds timeout = std::chrono::seconds(60));

/// All three parties in threads, talking TCP over loopback.
RunResult run_tcp_local(const PartyFn& fn, const RunOptions& opts = {});

}  // namespace tpc
