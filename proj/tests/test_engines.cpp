#include <gtest/gtest.h>

#include <random>

#include "tpc/harness.hpp"

using namespace tpc;

namespace {

RunOptions with(std::uint64_t seed, ShareAuditor* auditor = nullptr, const FaultScript* faults = nullptr) {
  RunOptions o;
  o.seed = seed_from_u64(seed);
  o.auditor = auditor;
  o.faults = faults;
  o.timeout = std::chrono::seconds(20);
  return o;
}

}  // namespace

TEST(Semi, RandomCircuitsWithAudit) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Circuit c = random_circuit(seed, {seed % 2 ? 32U : 64U, 120, 6});
    const auto in = seeded_inputs(c, seed);
    ShareAuditor auditor;
    const auto run = run_mem(circuit_fn(c, in, CircuitMode::Semi), with(seed, &auditor));
    ASSERT_TRUE(run.all_ok()) << seed;
    for (const auto& p : run.parties) EXPECT_EQ(p.outputs, eval_plain(c, in));
    // every wire is a consistent sharing of the plaintext wire value
    EXPECT_EQ(auditor.reconstructed("wires"), eval_wires(c, in));
    EXPECT_TRUE(auditor.failures().empty());
  }
}

TEST(Semi, BooleanCircuit) {
  const Circuit c = random_circuit(3, {1, 150, 6});
  const auto in = seeded_inputs(c, 3);
  const auto run = run_mem(circuit_fn(c, in, CircuitMode::Semi), with(3));
  ASSERT_TRUE(run.all_ok());
  EXPECT_EQ(run.at(Party::P2).outputs, eval_plain(c, in));
}

TEST(Semi, InputMasksComeFromPairKeys) {
  // P1's inputs are masked with k01 (lambda1) and kP (lambda2), so P2 knows
  // lambda2 but not lambda1.
  auto keys = setup_keys(seed_from_u64(4));
  MemNetwork net;
  std::array<Endpoint, 3> eps{Endpoint(Party::P0, net.channels(Party::P0)), Endpoint(Party::P1, net.channels(Party::P1)),
                              Endpoint(Party::P2, net.channels(Party::P2))};
  std::array<InputMasks, 3> m;
  const std::vector<Party> owners{Party::P1, Party::P0};
  for (int i = 0; i < 3; ++i) {
    PartyContext ctx(party_from_index(i), keys[i], eps[i]);
    m[i] = sample_input_masks(ctx, owners, 32);
  }
  EXPECT_EQ(m[1].full[0], m[0].views[0].lambda1 + m[0].views[0].lambda2);
  EXPECT_EQ(m[0].full[1], m[0].views[1].lambda1 + m[0].views[1].lambda2);
  EXPECT_EQ(m[2].views[0].lambda2, m[0].views[0].lambda2);
  EXPECT_EQ(m[2].full[0], RingElement::zero(32));
}

TEST(Mal, HonestRunsMatchPlain) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const Circuit c = random_circuit(seed, {32, 100, 5});
    const auto in = seeded_inputs(c, seed);
    for (auto mode : {CircuitMode::Mal, CircuitMode::Fair}) {
      const auto run = run_mem(circuit_fn(c, in, mode), with(seed));
      ASSERT_TRUE(run.all_ok()) << seed << " " << circuit_mode_name(mode);
      for (const auto& p : run.parties) EXPECT_EQ(p.outputs, eval_plain(c, in));
    }
  }
}

TEST(Mal, RoundCounts) {
  const Circuit c = random_circuit(11, {32, 100, 5});
  const auto in = seeded_inputs(c, 11);
  const auto mal = run_mem(circuit_fn(c, in, CircuitMode::Mal), with(1));
  EXPECT_EQ(mal.rounds(Phase::Offline), 4U);
  EXPECT_EQ(mal.rounds(Phase::Online), c.depth() + 4);
  const auto fair = run_mem(circuit_fn(c, in, CircuitMode::Fair), with(1));
  EXPECT_EQ(fair.rounds(Phase::Online), c.depth() + 7);
}

TEST(Triples, GeneratedTriplesAreValid) {
  for (unsigned B : {2U, 3U, 4U}) {
    TripleParams tp;
    tp.bucket = B;
    ShareAuditor auditor;
    const auto run = run_mem(
        [&](PartyContext& ctx) {
          const auto ts = gen_triples(ctx, 20, 64, tp);
          std::vector<MShare> a, b, c;
          for (const auto& t : ts) {
            a.push_back(t.a);
            b.push_back(t.b);
            c.push_back(t.c);
          }
          ctx.auditor->submit(ctx.me, "a", a);
          ctx.auditor->submit(ctx.me, "b", b);
          ctx.auditor->submit(ctx.me, "c", c);
          return std::vector<RingElement>{};
        },
        with(B, &auditor));
    ASSERT_TRUE(run.all_ok());
    const auto a = auditor.reconstructed("a"), b = auditor.reconstructed("b"), c = auditor.reconstructed("c");
    ASSERT_EQ(a.size(), 20U);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(c[i], a[i] * b[i]);
    // B generated triples at 3 elements each, 6(B-1) sacrifice openings; opened triples are amortized
    EXPECT_EQ(run.ring_elements(Phase::Offline), 20 * (3 * B + 6 * (B - 1)));
    EXPECT_EQ(run.rounds(Phase::Offline), 4U);
  }
}

TEST(Triples, BucketSizeFromNominalBatch) {
  EXPECT_EQ(bucket_size(1 << 20, 40), 2U);
  EXPECT_EQ(bucket_size(1 << 10, 40), 4U);
  EXPECT_EQ(bucket_size(16, 40), 10U);
  TripleParams tp;
  tp.bucket = 3;
  EXPECT_EQ(tp.C(), 9U);
}

TEST(Triples, SingleCorruptionAlwaysCaught) {
  TripleParams tp;
  tp.bucket = 2;
  tp.opened = 6;
  for (std::size_t k = 0; k < 38; ++k) {
    FaultScript f;
    f.rules.push_back({"trip.gamma", Party::P0, FaultOp::AddDelta, 5, std::nullopt, k, false});
    const auto run = run_mem(
        [&](PartyContext& ctx) {
          gen_triples(ctx, 16, 32, tp);
          return std::vector<RingElement>{};
        },
        with(k + 1, nullptr, &f));
    EXPECT_TRUE(run.at(Party::P1).aborted || run.at(Party::P2).aborted) << k;
  }
}

TEST(Prc, TauEqualsDelta) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const RingElement a(rng(), 64), b(rng(), 64), d(rng(), 64), e(rng(), 64);
    const RingElement delta(i % 3 == 0 ? 0 : rng(), 64);
    Dealer dealer(seed_from_u64(i));
    const auto sh = dealer.share_vector(std::vector<RingElement>{a, b, a * b + delta, d, e, d * e});
    ShareAuditor auditor;
    const auto run = run_mem(
        [&](PartyContext& ctx) {
          const auto& s = sh[index_of(ctx.me)];
          const Triple x{s[0], s[1], s[2]}, y{s[3], s[4], s[5]};
          prc_check(ctx, std::span(&x, 1), std::span(&y, 1));
          return std::vector<RingElement>{};
        },
        with(i, &auditor));
    EXPECT_EQ(auditor.reconstructed("prc.tau")[0], delta);
    EXPECT_EQ(run.all_ok(), delta.value() == 0);
  }
}

TEST(RecMal, InconsistentShareAborts) {
  Dealer dealer(seed_from_u64(1));
  auto sh = dealer.share(RingElement(77, 32));
  const auto ok = run_mem([&](PartyContext& ctx) {
    return rec_mal(ctx, std::span(&sh[index_of(ctx.me)], 1));
  });
  ASSERT_TRUE(ok.all_ok());
  for (const auto& p : ok.parties) EXPECT_EQ(p.outputs[0], RingElement(77, 32));
  sh[2].m += RingElement::one(32);  // P2 holds a different m
  const auto bad = run_mem([&](PartyContext& ctx) {
    return rec_mal(ctx, std::span(&sh[index_of(ctx.me)], 1));
  });
  EXPECT_FALSE(bad.all_ok());
}

TEST(Mal, FaultsAbortOrAreCorrect) {
  const std::vector<std::string> scripts = {
      "point=mul.gamma party=0 op=add-delta value=3",
      "point=mul.chi party=2 op=add-delta value=1",
      "point=mul.mz party=2 op=add-delta value=ff index=all",
      "point=sh.m party=0 op=add-delta value=1 to=1",
      "point=rec.share party=1 op=add-delta value=1",
      "point=rec.digest party=2 op=add-delta value=1 to=0",
      "point=mul.mstar party=1 op=replace value=0",
      "point=trip.mz party=1 op=add-delta value=1",
      "point=trip.seed party=1 op=add-delta value=1",
      "point=mul.verify party=0 op=add-delta value=1 to=2",
      "point=sh.digest party=1 op=add-delta value=1",
  };
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Circuit c = random_circuit(seed, {32, 60, 4});
    const auto in = seeded_inputs(c, seed);
    for (const auto& text : scripts) {
      const auto f = parse_fault_script(text);
      const auto run = run_mem(circuit_fn(c, in, CircuitMode::Mal), with(seed, nullptr, &f));
      bool honest_abort = false;
      for (const auto& p : run.parties) {
        if (p.me == f.rules[0].party) continue;
        EXPECT_TRUE(p.error.empty()) << text << ": " << p.error;
        if (p.aborted) honest_abort = true;
        else EXPECT_EQ(p.outputs, eval_plain(c, in)) << text;
      }
      EXPECT_TRUE(honest_abort) << text << " seed " << seed;
    }
  }
}

TEST(Fair, AllOrNothing) {
  const std::vector<std::string> scripts = {
      "point=fair.signal party=0 op=forge-abort to=1",
      "point=fair.signal party=0 op=drop to=2",
      "point=fair.forward party=2 op=forge-abort",
      "point=fair.open party=1 op=drop",
      "point=fair.commit party=2 op=add-delta value=1 to=1",
      "point=fair.commit party=0 op=add-delta value=1 to=1",
      "point=mul.gamma party=0 op=add-delta value=1",
  };
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Circuit c = random_circuit(seed, {32, 40, 4});
    const auto in = seeded_inputs(c, seed);
    for (const auto& text : scripts) {
      const auto f = parse_fault_script(text);
      const auto run = run_mem(circuit_fn(c, in, CircuitMode::Fair), with(seed, nullptr, &f));
      EXPECT_TRUE(run.unanimous(&f)) << text;
      for (const auto& p : run.parties) {
        if (p.me == f.rules[0].party) continue;
        EXPECT_TRUE(p.error.empty()) << text << ": " << p.error;
        if (p.ok()) EXPECT_EQ(p.outputs, eval_plain(c, in)) << text;
      }
    }
  }
}
