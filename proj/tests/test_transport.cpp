#include <gtest/gtest.h>

#include "tpc/fault.hpp"
#include "tpc/transport.hpp"

using namespace tpc;

namespace {

struct Net {
  MemNetwork net{std::chrono::milliseconds(2000)};
  Endpoint e0{Party::P0, net.channels(Party::P0)};
  Endpoint e1{Party::P1, net.channels(Party::P1)};
  Endpoint e2{Party::P2, net.channels(Party::P2)};
};

std::vector<RingElement> elems(std::initializer_list<std::uint64_t> v, unsigned bits = 32) {
  std::vector<RingElement> out;
  for (auto x : v) out.emplace_back(x, bits);
  return out;
}

}  // namespace

TEST(Frame, EncodeDecodeRoundTrip) {
  Frame f;
  f.type = MsgType::Digest;
  f.phase = Phase::Online;
  f.category = Category::Digest;
  f.width = 0;
  f.stamp = 77;
  f.count = 1;
  f.payload.assign(32, 0xab);
  const auto bytes = encode_frame(f);
  ASSERT_EQ(bytes.size(), kFrameHeaderBytes + 32);
  const auto g = decode_frame(bytes);
  EXPECT_EQ(g.type, f.type);
  EXPECT_EQ(g.phase, f.phase);
  EXPECT_EQ(g.stamp, 77U);
  EXPECT_EQ(g.payload, f.payload);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_frame(cut), FramingError);
}

TEST(Endpoint, ElementsAndMeter) {
  Net n;
  n.e1.send_elements(Party::P2, elems({1, 2, 3}));
  EXPECT_EQ(n.e2.recv_elements(Party::P1, 32, 3), elems({1, 2, 3}));
  const auto c = n.e1.meter().sent(Phase::Offline, Party::P2, Category::Ring);
  EXPECT_EQ(c.frames, 1U);
  EXPECT_EQ(c.elements, 3U);
  EXPECT_EQ(c.bits, 96U);
  EXPECT_EQ(c.bytes, 12U);
  EXPECT_EQ(n.e1.meter().sent(Phase::Offline, Party::P2, Category::Control).bytes, kFrameHeaderBytes);
  EXPECT_EQ(n.e2.meter().received(Phase::Offline, Party::P1, Category::Ring), c);
  n.e1.send_elements(Party::P2, elems({1, 2}));
  EXPECT_THROW(n.e2.recv_elements(Party::P1, 32, 3), FramingError);
}

TEST(Endpoint, CategoryScopeAndReclassify) {
  Net n;
  {
    Endpoint::CategoryScope s(n.e0, Category::Amortized);
    n.e0.send_elements(Party::P1, elems({5}));
  }
  n.e0.send_elements(Party::P1, elems({6, 7}));
  EXPECT_EQ(n.e0.meter().sent(Phase::Offline, Category::Amortized).elements, 1U);
  EXPECT_EQ(n.e0.meter().sent(Phase::Offline, Category::Ring).elements, 2U);
  n.e0.reclassify_elements(true, Party::P1, 1, 32, Category::Amortized);
  EXPECT_EQ(n.e0.meter().sent(Phase::Offline, Category::Ring).elements, 1U);
  EXPECT_EQ(n.e0.meter().sent(Phase::Offline, Category::Amortized).elements, 2U);
  EXPECT_THROW(n.e0.reclassify_elements(true, Party::P1, 5, 32, Category::Amortized), ContractViolation);
}

// stamp = 1 + largest stamp received in the phase
TEST(Endpoint, RoundStampsFollowDependencies) {
  Net n;
  n.e0.send_elements(Party::P1, elems({1}));  // 1
  n.e2.send_elements(Party::P1, elems({1}));  // 1, independent
  n.e1.recv_elements(Party::P0, 32, 1);
  n.e1.send_elements(Party::P2, elems({1}));  // 2
  n.e2.recv_elements(Party::P1, 32, 1);
  n.e2.send_elements(Party::P0, elems({1}));  // 3
  EXPECT_EQ(n.e0.meter().max_stamp(Phase::Offline), 1U);
  EXPECT_EQ(n.e1.meter().max_stamp(Phase::Offline), 2U);
  EXPECT_EQ(n.e2.meter().max_stamp(Phase::Offline), 3U);
  // a new phase starts its own count
  n.e0.set_phase(Phase::Online);
  n.e0.send_elements(Party::P2, elems({1}));
  EXPECT_EQ(n.e0.meter().max_stamp(Phase::Online), 1U);
}

TEST(Endpoint, DigestExpectationAborts) {
  Net n;
  Digest d{};
  d[0] = 1;
  n.e1.send_digest(Party::P0, d);
  n.e1.send_elements(Party::P0, elems({4}));
  Digest other = d;
  other[0] = 2;
  n.e0.expect_digest(Party::P1, other, "test.check");
  try {
    n.e0.recv_elements(Party::P1, 32, 1);
    FAIL() << "mismatch not detected";
  } catch (const ProtocolAbort& e) {
    EXPECT_EQ(e.check(), "test.check");
  }
}

TEST(Endpoint, AbortPropagates) {
  Net n;
  n.e1.send_abort("x.check");
  EXPECT_THROW(n.e0.recv_elements(Party::P1, 32, 1), ProtocolAbort);
  EXPECT_TRUE(n.e1.abort_sent());
}

TEST(Endpoint, TranscriptCoversSentFrames) {
  Net a, b;
  a.e1.send_elements(Party::P2, elems({1, 2}));
  b.e1.send_elements(Party::P2, elems({1, 2}));
  EXPECT_EQ(a.e1.transcript(Party::P2, Phase::Offline), b.e1.transcript(Party::P2, Phase::Offline));
  b.e1.send_elements(Party::P2, elems({3}));
  EXPECT_NE(a.e1.transcript(Party::P2, Phase::Offline), b.e1.transcript(Party::P2, Phase::Offline));
}

TEST(Faults, ParseAndFormat) {
  const auto s = parse_fault_script(
      "# comment\n"
      "point=mul.gamma party=0 op=add-delta value=0x10 index=3\n"
      "\n"
      "point=fair.signal party=0 op=forge-abort to=2\n"
      "point=mul.mz party=2 op=drop\n");
  ASSERT_EQ(s.rules.size(), 3U);
  EXPECT_EQ(s.rules[0].value, 16U);
  EXPECT_EQ(*s.rules[0].index, 3U);
  EXPECT_EQ(*s.rules[1].to, Party::P2);
  EXPECT_EQ(s.rules[2].op, FaultOp::Drop);
  EXPECT_EQ(s.corrupted(), (std::vector<Party>{Party::P0, Party::P2}));
  EXPECT_EQ(parse_fault_script(format_fault_rule(s.rules[0])).rules[0].index, s.rules[0].index);
  EXPECT_THROW(parse_fault_script("point=x party=0 op=add-delta"), ParseError);
  EXPECT_THROW(parse_fault_script("point=x party=3 op=drop"), ParseError);
  EXPECT_THROW(parse_fault_script("point=x party=1 op=drop to=1"), ParseError);
  EXPECT_THROW(parse_fault_script("bogus"), ParseError);
}

TEST(Faults, AppliedAtSendTime) {
  Net n;
  FaultScript s = parse_fault_script("point=p party=1 op=add-delta value=1 index=1\npoint=q party=1 op=drop to=0");
  n.e1.set_faults(&s);
  n.e1.send_elements(Party::P2, elems({5, 5, 5}), "p");
  EXPECT_EQ(n.e2.recv_elements(Party::P1, 32, 3), elems({5, 6, 5}));
  n.e1.send_elements(Party::P0, elems({5}), "q");
  EXPECT_THROW(n.e0.recv_elements(Party::P1, 32, 1), ProtocolAbort);
}
