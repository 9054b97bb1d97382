#pragma once

#include <array>
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tpc/crypto.hpp"
#include "tpc/sharing.hpp"
#include "tpc/transport.hpp"

namespace tpc {

class ShareAuditor;

/// Everything one party's protocol code touches.
struct PartyContext {
  PartyContext(Party me_, KeySetup& keys_, Endpoint& ep_, ShareAuditor* auditor_ = nullptr)
      : me(me_), keys(keys_), ep(ep_), auditor(auditor_) {}

  Party me;
  KeySetup& keys;
  Endpoint& ep;
  ShareAuditor* auditor = nullptr;

  /// Protocol instance ids advance identically at every party, so per-instance
  /// stream labels line up without coordination.
  std::uint64_t next_instance() { return instance_++; }

  /// Switch the metering phase and charge elapsed wall time to the old one.
  void enter(Phase p);
  /// Seconds spent per phase so far (the current phase included).
  std::array<double, kPhaseCount> phase_seconds() const;

  bool is(Party p) const { return me == p; }

 private:
  std::uint64_t instance_ = 0;
  std::array<double, kPhaseCount> seconds_{};
  std::optional<std::chrono::steady_clock::time_point> since_;
};

/// Debug-only checker: collects the three views of tagged share vectors through
/// a backdoor and reconstructs them once all three parties have submitted.
class ShareAuditor {
 public:
  void submit(Party p, const std::string& tag, std::vector<MShare> views);
  /// Expected plaintext for a tag; compared on reconstruction.
  void expect(const std::string& tag, std::vector<RingElement> values);

  /// Reconstructed values; throws ContractViolation if a tag is incomplete or
  /// its views are inconsistent.
  std::vector<RingElement> reconstructed(const std::string& tag) const;
  std::vector<std::string> failures() const;
  std::size_t checked() const;

 private:
  void check_locked(const std::string& tag);

  mutable std::mutex mu_;
  std::map<std::string, std::array<std::optional<std::vector<MShare>>, 3>> views_;
  std::map<std::string, std::vector<RingElement>> expected_;
  std::vector<std::string> failures_;
  std::size_t checked_ = 0;
};

// PRF domains. Each protocol instance draws under StreamLabel(domain, instance).
namespace dom {
inline constexpr std::uint16_t kInput = 0x0100;  // + owner index
inline constexpr std::uint16_t kMul = 0x0200;
inline constexpr std::uint16_t kDelta = 0x0300;
inline constexpr std::uint16_t kRand = 0x0400;
inline constexpr std::uint16_t kPerm = 0x0500;
inline constexpr std::uint16_t kFair = 0x0600;
inline constexpr std::uint16_t kBitExt = 0x0700;
inline constexpr std::uint16_t kDot = 0x0800;
}  // namespace dom

/// n values under key k if this party holds it, zeros otherwise. Every holder of
/// k must make the same sequence of calls for a label.
std::vector<RingElement> joint_sample(PartyContext& ctx, KeyId k, StreamLabel label, unsigned bits, std::size_t n);

}  // namespace tpc
