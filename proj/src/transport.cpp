#include "tpc/transport.hpp"

#include <algorithm>
#include <cstring>

namespace tpc {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Offline: return "offline";
    case Phase::Online: return "online";
    case Phase::Output: return "output";
  }
  return "?";
}

const char* category_name(Category c) {
  switch (c) {
    case Category::Ring: return "ring";
    case Category::Digest: return "digest";
    case Category::Commitment: return "commitment";
    case Category::Opening: return "opening";
    case Category::Control: return "control";
    case Category::Amortized: return "amortized";
  }
  return "?";
}

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::Elements: return "elements";
    case MsgType::Digest: return "digest";
    case MsgType::Commitments: return "commitments";
    case MsgType::Openings: return "openings";
    case MsgType::Signal: return "signal";
    case MsgType::Abort: return "abort";
    case MsgType::Missing: return "missing";
  }
  return "?";
}

namespace {

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n && i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

bool valid_type(std::uint8_t t) { return t >= 1 && t <= 7; }

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out(kFrameHeaderBytes + f.payload.size());
  out[0] = static_cast<std::uint8_t>(f.type);
  out[1] = static_cast<std::uint8_t>(f.phase);
  out[2] = static_cast<std::uint8_t>(f.category);
  out[3] = f.width;
  put_u32(&out[4], f.stamp);
  put_u32(&out[8], f.count);
  put_u32(&out[12], static_cast<std::uint32_t>(f.payload.size()));
  if (!f.payload.empty()) std::memcpy(&out[kFrameHeaderBytes], f.payload.data(), f.payload.size());
  return out;
}

std::uint32_t frame_payload_length(std::span<const std::uint8_t, kFrameHeaderBytes> h) {
  if (!valid_type(h[0])) throw FramingError("unknown message type " + std::to_string(h[0]));
  if (h[1] >= kPhaseCount) throw FramingError("unknown phase tag");
  if (h[2] >= kCategoryCount) throw FramingError("unknown category tag");
  return get_u32(&h[12]);
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes) throw FramingError("short frame");
  const auto len = frame_payload_length(bytes.first<kFrameHeaderBytes>());
  if (bytes.size() != kFrameHeaderBytes + len) throw FramingError("frame length does not match header");
  Frame f;
  f.type = static_cast<MsgType>(bytes[0]);
  f.phase = static_cast<Phase>(bytes[1]);
  f.category = static_cast<Category>(bytes[2]);
  f.width = bytes[3];
  f.stamp = get_u32(&bytes[4]);
  f.count = get_u32(&bytes[8]);
  f.payload.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
  return f;
}

// ---- in-process backend ----

void FrameQueue::push(std::vector<std::uint8_t> item) {
  {
    std::lock_guard lk(mu_);
    if (closed_) return;
    items_.push_back(std::move(item));
  }
  cv_.notify_one();
}

std::vector<std::uint8_t> FrameQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  if (!cv_.wait_for(lk, timeout, [&] { return !items_.empty() || closed_; }))
    throw TransportError("receive timed out");
  if (items_.empty()) throw TransportError("channel closed");
  auto item = std::move(items_.front());
  items_.pop_front();
  return item;
}

void FrameQueue::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

namespace {

class MemChannel final : public Channel {
 public:
  MemChannel(std::shared_ptr<FrameQueue> out, std::shared_ptr<FrameQueue> in, std::chrono::milliseconds timeout)
      : out_(std::move(out)), in_(std::move(in)), timeout_(timeout) {}
  void send(std::vector<std::uint8_t> encoded) override { out_->push(std::move(encoded)); }
  std::vector<std::uint8_t> recv() override { return in_->pop(timeout_); }

 private:
  std::shared_ptr<FrameQueue> out_, in_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

MemNetwork::MemNetwork(std::chrono::milliseconds recv_timeout) : timeout_(recv_timeout) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b) queues_[a][b] = std::make_shared<FrameQueue>();
    }
  }
}

std::array<std::unique_ptr<Channel>, 3> MemNetwork::channels(Party me) {
  std::array<std::unique_ptr<Channel>, 3> out;
  const int m = index_of(me);
  for (int p = 0; p < 3; ++p) {
    if (p != m) out[p] = std::make_unique<MemChannel>(queues_[m][p], queues_[p][m], timeout_);
  }
  return out;
}

void MemNetwork::close_all() {
  for (auto& row : queues_) {
    for (auto& q : row) {
      if (q) q->close();
    }
  }
}

// ---- meter ----

MeterCell& MeterCell::operator+=(const MeterCell& o) {
  frames += o.frames;
  elements += o.elements;
  bits += o.bits;
  bytes += o.bytes;
  return *this;
}

void CommMeter::record_send(Phase ph, Party peer, Category cat, const MeterCell& cell) {
  sent_[static_cast<int>(ph)][index_of(peer)][static_cast<int>(cat)] += cell;
}

void CommMeter::record_recv(Phase ph, Party peer, Category cat, const MeterCell& cell) {
  recv_[static_cast<int>(ph)][index_of(peer)][static_cast<int>(cat)] += cell;
}

MeterCell& MeterCell::operator-=(const MeterCell& o) {
  frames -= o.frames;
  elements -= o.elements;
  bits -= o.bits;
  bytes -= o.bytes;
  return *this;
}

void CommMeter::reclassify(bool sent, Phase ph, Party peer, Category from, Category to, const MeterCell& cell) {
  auto& g = sent ? sent_ : recv_;
  auto& row = g[static_cast<int>(ph)][index_of(peer)];
  auto& src = row[static_cast<int>(from)];
  if (src.elements < cell.elements || src.bits < cell.bits || src.bytes < cell.bytes)
    throw ContractViolation("meter: reclassifying more than was recorded");
  src -= cell;
  row[static_cast<int>(to)] += cell;
}

void CommMeter::note_stamp(Phase ph, std::uint32_t stamp) {
  auto& m = max_stamp_[static_cast<int>(ph)];
  m = std::max(m, stamp);
}

MeterCell CommMeter::sent(Phase ph, Category cat) const {
  MeterCell c;
  for (int p = 0; p < 3; ++p) c += sent_[static_cast<int>(ph)][p][static_cast<int>(cat)];
  return c;
}

MeterCell CommMeter::sent(Phase ph, Party peer, Category cat) const {
  return sent_[static_cast<int>(ph)][index_of(peer)][static_cast<int>(cat)];
}

MeterCell CommMeter::received(Phase ph, Party peer, Category cat) const {
  return recv_[static_cast<int>(ph)][index_of(peer)][static_cast<int>(cat)];
}

// ---- endpoint ----

Endpoint::Endpoint(Party me, std::array<std::unique_ptr<Channel>, 3> channels)
    : me_(me), channels_(std::move(channels)) {
  for (int p = 0; p < 3; ++p) {
    if (p != index_of(me_) && !channels_[p]) throw ContractViolation("endpoint needs a channel to every peer");
  }
}

Endpoint::~Endpoint() = default;

Channel& Endpoint::channel(Party peer) {
  if (peer == me_) throw ContractViolation(party_name(me_) + " cannot message itself");
  return *channels_[index_of(peer)];
}

std::vector<const FaultRule*> Endpoint::faults_for(std::string_view point, Party peer) const {
  std::vector<const FaultRule*> out;
  if (!faults_ || point.empty()) return out;
  for (const auto& r : faults_->rules) {
    if (r.party == me_ && r.point == point && (!r.to || *r.to == peer)) out.push_back(&r);
  }
  return out;
}

const FaultRule* Endpoint::fault_for(std::string_view point, Party peer) const {
  if (!faults_ || point.empty()) return nullptr;
  for (const auto& r : faults_->rules) {
    if (r.party == me_ && r.point == point && (!r.to || *r.to == peer)) return &r;
  }
  return nullptr;
}

namespace {

MeterCell cell_of(const Frame& f) {
  MeterCell c;
  c.frames = 1;
  c.bytes = f.payload.size();
  if (f.type == MsgType::Elements) {
    c.elements = f.count;
    c.bits = std::uint64_t{f.count} * f.width;
  } else if (f.type == MsgType::Digest || f.type == MsgType::Commitments || f.type == MsgType::Openings) {
    c.elements = f.count;
  }
  return c;
}

void tamper_elements(Frame& f, const FaultRule& r) {
  auto elems = unpack_elements(f.payload, f.width, f.count);
  auto apply = [&](RingElement& e) {
    const RingElement v(r.value, f.width);
    e = r.op == FaultOp::AddDelta ? e + v : v;
  };
  if (r.all_elements) {
    for (auto& e : elems) apply(e);
  } else {
    const std::size_t i = r.index.value_or(0);
    if (i < elems.size()) apply(elems[i]);
  }
  f.payload = pack_elements(elems, f.width);
}

void tamper_bytes(Frame& f, const FaultRule& r) {
  if (f.payload.empty()) return;
  const std::size_t n = std::min<std::size_t>(8, f.payload.size());
  const std::uint64_t cur = get_u64(f.payload.data(), n);
  const std::uint64_t nv = r.op == FaultOp::AddDelta ? cur + r.value : r.value;
  std::uint8_t buf[8];
  put_u64(buf, nv);
  std::memcpy(f.payload.data(), buf, n);
}

}  // namespace

void Endpoint::send_frame(Party to, Frame f, std::string_view point, std::span<const std::uint8_t> alternative) {
  f.phase = phase_;
  f.stamp = clock_[static_cast<int>(phase_)] + 1;
  for (const FaultRule* r : faults_for(point, to)) {
    if (f.type == MsgType::Missing) break;
    switch (r->op) {
      case FaultOp::Drop:
        f.type = MsgType::Missing;
        f.category = Category::Control;
        f.count = 0;
        f.payload.clear();
        break;
      case FaultOp::ForgeAbort:
        if (!alternative.empty()) {
          f.payload.assign(alternative.begin(), alternative.end());
        } else {
          f.payload.assign(1 + 8 + 32, 0);
          f.payload[0] = kSignalAbort;
          put_u64(&f.payload[1], r->value);
        }
        break;
      case FaultOp::AddDelta:
      case FaultOp::Replace:
        if (f.type == MsgType::Elements) tamper_elements(f, *r);
        else tamper_bytes(f, *r);
        break;
    }
  }
  if (f.type != MsgType::Abort) meter_.note_stamp(phase_, f.stamp);
  meter_.record_send(phase_, to, f.category, cell_of(f));
  meter_.record_send(phase_, to, Category::Control, MeterCell{0, 0, 0, kFrameHeaderBytes});
  auto encoded = encode_frame(f);
  transcripts_[index_of(to)][static_cast<int>(phase_)].update(encoded);
  channel(to).send(std::move(encoded));
}

Frame Endpoint::recv_raw(Party from) {
  Frame f = decode_frame(channel(from).recv());
  const auto ph = static_cast<int>(f.phase);
  if (f.type != MsgType::Abort) clock_[ph] = std::max(clock_[ph], f.stamp);
  meter_.record_recv(f.phase, from, f.category, cell_of(f));
  meter_.record_recv(f.phase, from, Category::Control, MeterCell{0, 0, 0, kFrameHeaderBytes});
  return f;
}

Frame Endpoint::recv_frame(Party from) {
  drain_expectations(from);
  return recv_raw(from);
}

Frame Endpoint::recv_typed(Party from, MsgType type) {
  drain_expectations(from);
  Frame f = recv_raw(from);
  if (f.type == MsgType::Abort) {
    throw ProtocolAbort("peer-abort:" + party_name(from) + ":" + std::string(f.payload.begin(), f.payload.end()));
  }
  if (f.type == MsgType::Missing) throw ProtocolAbort("missing-message:" + party_name(from));
  if (f.type != type) {
    throw FramingError("expected " + std::string(msg_type_name(type)) + " from " + party_name(from) + ", got " +
                       msg_type_name(f.type));
  }
  return f;
}

void Endpoint::send_elements(Party to, std::span<const RingElement> elems, std::string_view point) {
  Frame f;
  f.type = MsgType::Elements;
  f.category = ring_category_;
  const unsigned bits = elems.empty() ? 1 : elems[0].bits();
  f.width = static_cast<std::uint8_t>(bits);
  f.count = static_cast<std::uint32_t>(elems.size());
  f.payload = pack_elements(elems, bits);
  send_frame(to, std::move(f), point);
}

void Endpoint::reclassify_elements(bool sent, Party peer, std::size_t count, unsigned bits, Category to) {
  if (count == 0) return;
  const MeterCell cell{0, count, count * bits, (count * bits) / 8};
  meter_.reclassify(sent, phase_, peer, Category::Ring, to, cell);
}

std::vector<RingElement> Endpoint::recv_elements(Party from, unsigned bits, std::size_t count) {
  Frame f = recv_typed(from, MsgType::Elements);
  if (f.count != count || (count > 0 && f.width != bits))
    throw FramingError("element frame from " + party_name(from) + ": expected " + std::to_string(count) + " x " +
                       std::to_string(bits) + "-bit, got " + std::to_string(f.count) + " x " + std::to_string(f.width));
  if (count == 0) return {};
  return unpack_elements(f.payload, bits, count);
}

void Endpoint::send_digest(Party to, const Digest& d, std::string_view point) {
  Frame f;
  f.type = MsgType::Digest;
  f.category = Category::Digest;
  f.count = 1;
  f.payload.assign(d.begin(), d.end());
  send_frame(to, std::move(f), point);
}

Digest Endpoint::recv_digest(Party from) {
  Frame f = recv_typed(from, MsgType::Digest);
  if (f.payload.size() != 32) throw FramingError("digest frame must carry 32 bytes");
  Digest d{};
  std::copy(f.payload.begin(), f.payload.end(), d.begin());
  return d;
}

void Endpoint::send_commitments(Party to, std::span<const Commitment> cs, std::string_view point, Category cat) {
  Frame f;
  f.type = MsgType::Commitments;
  f.category = cat;
  f.count = static_cast<std::uint32_t>(cs.size());
  for (const auto& c : cs) f.payload.insert(f.payload.end(), c.digest.begin(), c.digest.end());
  send_frame(to, std::move(f), point);
}

std::vector<Commitment> parse_commitments(const Frame& f, std::size_t count);

std::vector<Commitment> Endpoint::recv_commitments(Party from, std::size_t count) {
  return parse_commitments(recv_typed(from, MsgType::Commitments), count);
}

void Endpoint::send_openings(Party to, std::span<const Opening> os, std::string_view point, Category cat) {
  // Each opening: u32 payload length, payload, 32-byte randomness.
  Frame f;
  f.type = MsgType::Openings;
  f.category = cat;
  f.count = static_cast<std::uint32_t>(os.size());
  for (const auto& o : os) {
    std::uint8_t len[4];
    put_u32(len, static_cast<std::uint32_t>(o.payload.size()));
    f.payload.insert(f.payload.end(), len, len + 4);
    f.payload.insert(f.payload.end(), o.payload.begin(), o.payload.end());
    f.payload.insert(f.payload.end(), o.randomness.begin(), o.randomness.end());
  }
  send_frame(to, std::move(f), point);
}

std::vector<Opening> parse_openings(const Frame& f, std::size_t count) {
  if (f.count != count) throw FramingError("opening frame count mismatch");
  std::vector<Opening> out(count);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (pos + 4 > f.payload.size()) throw FramingError("truncated opening");
    const std::uint32_t len = get_u32(&f.payload[pos]);
    pos += 4;
    if (pos + len + 32 > f.payload.size()) throw FramingError("truncated opening");
    out[i].payload.assign(f.payload.begin() + pos, f.payload.begin() + pos + len);
    pos += len;
    std::copy_n(f.payload.begin() + pos, 32, out[i].randomness.begin());
    pos += 32;
  }
  if (pos != f.payload.size()) throw FramingError("trailing bytes in opening frame");
  return out;
}

std::vector<Commitment> parse_commitments(const Frame& f, std::size_t count) {
  if (f.count != count || f.payload.size() != 32 * count) throw FramingError("commitment frame size mismatch");
  std::vector<Commitment> out(count);
  for (std::size_t i = 0; i < count; ++i) std::copy_n(f.payload.begin() + 32 * i, 32, out[i].digest.begin());
  return out;
}

std::vector<Opening> Endpoint::recv_openings(Party from, std::size_t count) {
  return parse_openings(recv_typed(from, MsgType::Openings), count);
}

void Endpoint::send_signal(Party to, std::span<const std::uint8_t> payload, std::string_view point,
                           std::span<const std::uint8_t> alternative) {
  Frame f;
  f.type = MsgType::Signal;
  f.category = Category::Control;
  f.payload.assign(payload.begin(), payload.end());
  send_frame(to, std::move(f), point, alternative);
}

std::vector<std::uint8_t> Endpoint::recv_signal(Party from) { return recv_typed(from, MsgType::Signal).payload; }

void Endpoint::send_abort(const std::string& check) noexcept {
  if (abort_sent_) return;
  abort_sent_ = true;
  for (Party p : kAllParties) {
    if (p == me_) continue;
    try {
      Frame f;
      f.type = MsgType::Abort;
      f.category = Category::Control;
      f.payload.assign(check.begin(), check.end());
      send_frame(p, std::move(f), {});
    } catch (...) {
    }
  }
}

void Endpoint::expect_digest(Party from, const Digest& expected, std::string check) {
  pending_[index_of(from)].push_back({expected, std::move(check)});
}

void Endpoint::drain_expectations(Party from) {
  auto& q = pending_[index_of(from)];
  while (!q.empty()) {
    Pending p = std::move(q.front());
    q.pop_front();
    Frame f = recv_raw(from);
    if (f.type == MsgType::Abort)
      throw ProtocolAbort("peer-abort:" + party_name(from) + ":" + std::string(f.payload.begin(), f.payload.end()));
    if (f.type == MsgType::Missing) throw ProtocolAbort(p.check);
    if (f.type != MsgType::Digest) throw FramingError("expected digest from " + party_name(from));
    if (f.payload.size() != 32 || !std::equal(p.expected.begin(), p.expected.end(), f.payload.begin()))
      throw ProtocolAbort(p.check);
  }
}

void Endpoint::drain_expectations() {
  for (Party p : kAllParties) {
    if (p != me_) drain_expectations(p);
  }
}

Digest Endpoint::transcript(Party peer, Phase ph) const {
  return transcripts_[index_of(peer)][static_cast<int>(ph)].peek();
}

void Endpoint::close() {
  for (auto& c : channels_) {
    if (c) c->close();
  }
}

}  // namespace tpc
