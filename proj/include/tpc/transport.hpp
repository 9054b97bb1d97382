#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpc/crypto.hpp"
#include "tpc/fault.hpp"
#include "tpc/party.hpp"
#include "tpc/ring.hpp"

namespace tpc {

/// Output covers client-facing reconstruction and the deferred checks that
/// precede it; see the meter section of the README.
enum class Phase : std::uint8_t { Offline = 0, Online = 1, Output = 2 };
inline constexpr int kPhaseCount = 3;

/// Amortized holds one-time overhead that vanishes per gate as the batch grows
/// (cut-and-choose openings, proof-of-origin commitments).
enum class Category : std::uint8_t { Ring = 0, Digest = 1, Commitment = 2, Opening = 3, Control = 4, Amortized = 5 };
inline constexpr int kCategoryCount = 6;

enum class MsgType : std::uint8_t { Elements = 1, Digest = 2, Commitments = 3, Openings = 4, Signal = 5, Abort = 6, Missing = 7 };

const char* phase_name(Phase p);
const char* category_name(Category c);
const char* msg_type_name(MsgType t);

/// type(1) phase(1) category(1) width(1) stamp(4) count(4) length(4), little-endian.
inline constexpr std::size_t kFrameHeaderBytes = 16;

struct Frame {
  MsgType type = MsgType::Elements;
  Phase phase = Phase::Offline;
  Category category = Category::Ring;
  std::uint8_t width = 0;
  std::uint32_t stamp = 0;
  std::uint32_t count = 0;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);
Frame decode_frame(std::span<const std::uint8_t> bytes);
/// Payload length announced by a header; throws FramingError on a bad header.
std::uint32_t frame_payload_length(std::span<const std::uint8_t, kFrameHeaderBytes> header);

/// One direction-pair endpoint: ordered, reliable, full duplex. send never blocks
/// on the peer's send.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(std::vector<std::uint8_t> encoded) = 0;
  /// Next encoded frame; throws TransportError on disconnect or timeout.
  virtual std::vector<std::uint8_t> recv() = 0;
  virtual void close() {}
};

/// Blocking FIFO of encoded frames shared by the two ends of an in-process pair.
class FrameQueue {
 public:
  void push(std::vector<std::uint8_t> item);
  std::vector<std::uint8_t> pop(std::chrono::milliseconds timeout);
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::uint8_t>> items_;
  bool closed_ = false;
};

/// In-process backend: six directed queues.
class MemNetwork {
 public:
  explicit MemNetwork(std::chrono::milliseconds recv_timeout = std::chrono::seconds(120));
  /// Channels for `me`, indexed by peer (the slot for `me` itself is null).
  std::array<std::unique_ptr<Channel>, 3> channels(Party me);
  void close_all();

 private:
  std::array<std::array<std::shared_ptr<FrameQueue>, 3>, 3> queues_;  // [from][to]
  std::chrono::milliseconds timeout_;
};

struct MeterCell {
  std::uint64_t frames = 0;
  std::uint64_t elements = 0;
  std::uint64_t bits = 0;
  std::uint64_t bytes = 0;
  MeterCell& operator+=(const MeterCell& o);
  MeterCell& operator-=(const MeterCell& o);
  friend bool operator==(const MeterCell&, const MeterCell&) = default;
};

/// Per-party counters keyed by (phase, peer, category), kept for both directions.
class CommMeter {
 public:
  void record_send(Phase ph, Party peer, Category cat, const MeterCell& cell);
  void record_recv(Phase ph, Party peer, Category cat, const MeterCell& cell);
  void note_stamp(Phase ph, std::uint32_t stamp);
  /// Moves part of an already recorded frame to another category.
  void reclassify(bool sent, Phase ph, Party peer, Category from, Category to, const MeterCell& cell);

  MeterCell sent(Phase ph, Category cat) const;
  MeterCell sent(Phase ph, Party peer, Category cat) const;
  MeterCell received(Phase ph, Party peer, Category cat) const;
  /// Largest round stamp this party put on a frame in `ph`.
  std::uint32_t max_stamp(Phase ph) const { return max_stamp_[static_cast<int>(ph)]; }

 private:
  using Grid = std::array<std::array<std::array<MeterCell, kCategoryCount>, 3>, kPhaseCount>;
  Grid sent_{};
  Grid recv_{};
  std::array<std::uint32_t, kPhaseCount> max_stamp_{};
};

/// A party's handle on its two peers: typed send/recv, metering, round stamps,
/// transcript hashing and the fault hook.
///
/// Rounds: every frame carries stamp = 1 + the largest stamp received so far in
/// its phase. The phase's round count is the largest stamp any party sends, i.e.
/// the longest chain of message dependencies. Code sends before it receives
/// within a layer so independent messages share a stamp.
class Endpoint {
 public:
  Endpoint(Party me, std::array<std::unique_ptr<Channel>, 3> channels);
  ~Endpoint();

  Party me() const { return me_; }

  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }

  /// Ring-element frames go to Category::Ring unless a scope overrides it.
  class CategoryScope {
   public:
    CategoryScope(Endpoint& ep, Category c) : ep_(ep), prev_(ep.ring_category_) { ep.ring_category_ = c; }
    ~CategoryScope() { ep_.ring_category_ = prev_; }
    CategoryScope(const CategoryScope&) = delete;
    CategoryScope& operator=(const CategoryScope&) = delete;

   private:
    Endpoint& ep_;
    Category prev_;
  };

  void set_faults(const FaultScript* script) { faults_ = script; }
  /// First rule for (me, point, peer), if any.
  const FaultRule* fault_for(std::string_view point, Party peer) const;
  /// Every rule for (me, point, peer), in script order; all are applied.
  std::vector<const FaultRule*> faults_for(std::string_view point, Party peer) const;

  // `point` names the protocol point for fault injection (e.g. "mul.mz").
  void send_elements(Party to, std::span<const RingElement> elems, std::string_view point = {});
  std::vector<RingElement> recv_elements(Party from, unsigned bits, std::size_t count);

  void send_digest(Party to, const Digest& d, std::string_view point = {});
  Digest recv_digest(Party from);

  void send_commitments(Party to, std::span<const Commitment> cs, std::string_view point = {},
                        Category cat = Category::Commitment);
  std::vector<Commitment> recv_commitments(Party from, std::size_t count);

  void send_openings(Party to, std::span<const Opening> os, std::string_view point = {},
                     Category cat = Category::Opening);
  std::vector<Opening> recv_openings(Party from, std::size_t count);

  /// Control message. `alternative` is what a forge-abort fault substitutes.
  void send_signal(Party to, std::span<const std::uint8_t> payload, std::string_view point = {},
                   std::span<const std::uint8_t> alternative = {});
  std::vector<std::uint8_t> recv_signal(Party from);

  /// Raw receive without abort translation; used where a missing or aborted
  /// message is tolerated.
  Frame recv_frame(Party from);

  /// Tell both peers this party aborted. Never throws.
  void send_abort(const std::string& check) noexcept;
  bool abort_sent() const { return abort_sent_; }

  /// A digest the peer sends at this point in its stream; checked (and the
  /// named check aborts on mismatch) before the next frame from that peer is read.
  void expect_digest(Party from, const Digest& expected, std::string check);
  /// Read and check every pending expectation.
  void drain_expectations();
  void drain_expectations(Party from);

  /// The stamp the next frame sent in the current phase would carry.
  std::uint32_t round_mark() const { return clock_[static_cast<int>(phase_)] + 1; }

  const CommMeter& meter() const { return meter_; }
  /// Moves `count` elements of a frame already exchanged with `peer` in the
  /// current phase from Category::Ring to `to`.
  void reclassify_elements(bool sent, Party peer, std::size_t count, unsigned bits, Category to);
  /// SHA-256 over every encoded frame sent to `peer` in `ph`.
  Digest transcript(Party peer, Phase ph) const;

  void close();

 private:
  struct Pending {
    Digest expected;
    std::string check;
  };

  void send_frame(Party to, Frame f, std::string_view point, std::span<const std::uint8_t> alternative = {});
  Frame recv_typed(Party from, MsgType type);
  Frame recv_raw(Party from);
  Channel& channel(Party peer);

  Party me_;
  std::array<std::unique_ptr<Channel>, 3> channels_;
  Phase phase_ = Phase::Offline;
  Category ring_category_ = Category::Ring;
  const FaultScript* faults_ = nullptr;
  CommMeter meter_;
  std::array<std::uint32_t, kPhaseCount> clock_{};
  std::array<std::array<Hasher, kPhaseCount>, 3> transcripts_;
  std::array<std::deque<Pending>, 3> pending_;
  bool abort_sent_ = false;
};

/// Decode the payload of a frame obtained from recv_frame.
std::vector<Commitment> parse_commitments(const Frame& f, std::size_t count);
std::vector<Opening> parse_openings(const Frame& f, std::size_t count);

/// Short encodings for signal payloads.
inline constexpr std::uint8_t kSignalContinue = 0;
inline constexpr std::uint8_t kSignalAbort = 1;

}  // namespace tpc
