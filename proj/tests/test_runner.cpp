#include <gtest/gtest.h>

#include "tpc/harness.hpp"

using namespace tpc;

TEST(Runner, MemRunsAreDeterministic) {
  const Circuit c = random_circuit(4, {32, 80, 5});
  const auto fn = circuit_fn(c, seeded_inputs(c, 4), CircuitMode::Mal);
  const auto a = run_mem(fn), b = run_mem(fn);
  ASSERT_TRUE(a.all_ok());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(a.parties[i].transcripts, b.parties[i].transcripts);
    EXPECT_EQ(a.parties[i].outputs, b.parties[i].outputs);
  }
  RunOptions other;
  other.seed = seed_from_u64(2);
  const auto d = run_mem(fn, other);
  EXPECT_EQ(d.parties[1].outputs, a.parties[1].outputs);
  EXPECT_NE(d.parties[1].transcripts, a.parties[1].transcripts);
}

TEST(Runner, TcpMatchesMem) {
  const Circuit c = random_circuit(5, {32, 80, 5});
  const auto fn = circuit_fn(c, seeded_inputs(c, 5), CircuitMode::Fair);
  const auto mem = run_mem(fn);
  const auto tcp = run_tcp_local(fn);
  ASSERT_TRUE(tcp.all_ok());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(mem.parties[i].outputs, tcp.parties[i].outputs);
    EXPECT_EQ(mem.parties[i].transcripts, tcp.parties[i].transcripts);
  }
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    EXPECT_EQ(mem.rounds(static_cast<Phase>(ph)), tcp.rounds(static_cast<Phase>(ph)));
    for (int cat = 0; cat < kCategoryCount; ++cat)
      EXPECT_EQ(mem.sent(static_cast<Phase>(ph), static_cast<Category>(cat)),
                tcp.sent(static_cast<Phase>(ph), static_cast<Category>(cat)));
  }
}

TEST(Runner, AbortIsReportedWithCheckName) {
  const Circuit c = random_circuit(6, {32, 60, 4});
  const auto f = parse_fault_script("point=mul.mstar party=1 op=add-delta value=1");
  RunOptions o;
  o.faults = &f;
  const auto run = run_mem(circuit_fn(c, seeded_inputs(c, 6), CircuitMode::Mal), o);
  EXPECT_TRUE(run.at(Party::P0).aborted);
  EXPECT_EQ(run.at(Party::P0).abort_check, "mul.mstar");
  EXPECT_FALSE(run.unanimous(&f) && run.all_ok());
}

TEST(Tcp, ParseAddress) {
  const auto a = parse_address("127.0.0.1:9000");
  EXPECT_EQ(a.host, "127.0.0.1");
  EXPECT_EQ(a.port, 9000);
  EXPECT_THROW(parse_address("nohost"), ConfigError);
  EXPECT_THROW(parse_address("h:99999"), ConfigError);
}
