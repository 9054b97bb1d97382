#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tpc/harness.hpp"

using namespace tpc;

TEST(Model, ParseWriteRoundTrip) {
  const Model m = parse_model("linreg 3\n0.5 -1.25 2\nbias 0.75\n");
  EXPECT_EQ(m.kind, ModelKind::LinReg);
  EXPECT_EQ(m.w, (std::vector<double>{0.5, -1.25, 2}));
  EXPECT_DOUBLE_EQ(m.b, 0.75);
  const Model back = parse_model(write_model(m));
  EXPECT_EQ(back.w, m.w);
  EXPECT_DOUBLE_EQ(back.b, m.b);
  EXPECT_THROW(parse_model("linreg 3\n1 2\nbias 0\n"), ParseError);
  EXPECT_THROW(parse_model("tree 1\n1\nbias 0\n"), ParseError);
}

TEST(Model, SvmSupportVectorsAggregate) {
  const Model m = parse_model("svmc 2 2\n0.5 1 1 2\n0.25 -1 4 0\nbias -0.5\n");
  EXPECT_EQ(m.w, (std::vector<double>{0.5 - 1.0, 1.0}));
  EXPECT_EQ(svm_aggregate(std::vector<double>{2}, std::vector<double>{-1}, {{1.5}}), std::vector<double>{-3});
}

TEST(Model, LogisticThresholdFoldsIntoBias) {
  Model m = parse_model("logr 1\n1\nbias 0.2\nthreshold 0.5\n");
  EXPECT_DOUBLE_EQ(effective_bias(m), 0.2);
  m.threshold = 0.8;
  EXPECT_NEAR(effective_bias(m), 0.2 - std::log(4.0), 1e-12);
  // sigmoid(w.z + b) >= t  <=>  w.z + b' >= 0
  const std::vector<double> z{1.2};
  EXPECT_EQ(plain_predict(m, z), 1.0 / (1.0 + std::exp(-(1.2 + 0.2))) >= 0.8 ? 1.0 : 0.0);
}

TEST(Query, ParseAndWrite) {
  EXPECT_EQ(parse_query("3\n0.1 0.2\n# c\n0.3\n"), (std::vector<double>{0.1, 0.2, 0.3}));
  const std::vector<double> z{1, -2.5};
  EXPECT_EQ(parse_query(write_query(z)), z);
  EXPECT_THROW(parse_query("3\n1 2\n"), ParseError);
}

TEST(FixedScore, MatchesIntegerOracle) {
  const Model m = random_model(ModelKind::LinReg, 50, 1);
  const auto z = random_query(m, 2);
  __int128 acc = 0;
  for (std::size_t i = 0; i < m.d(); ++i)
    acc += static_cast<__int128>(to_signed(fx_encode(m.w[i]))) * to_signed(fx_encode(z[i]));
  acc += to_signed(fx_encode(effective_bias(m), kProductFracBits));
  EXPECT_EQ(to_signed(fixed_score(m, z)), static_cast<std::int64_t>(acc));
}

namespace {

RingElement open_dot(Mode mode, const std::vector<RingElement>& p, const std::vector<RingElement>& q, RunResult* out) {
  Dealer dealer(seed_from_u64(p.size()));
  const auto ps = dealer.share_vector(p), qs = dealer.share_vector(q);
  const auto run = run_mem([&](PartyContext& ctx) {
    const auto i = index_of(ctx.me);
    return std::vector<RingElement>{mode == Mode::Semi ? dot_run_semi(ctx, ps[i], qs[i]) : dot_run_mal(ctx, ps[i], qs[i])};
  });
  EXPECT_TRUE(run.all_ok());
  if (out) *out = run;
  return run.at(Party::P0).outputs.at(0);
}

}  // namespace

TEST(Dot, CorrectAndMetered) {
  std::mt19937_64 rng(3);
  for (std::size_t d : {1UL, 5UL, 64UL}) {
    std::vector<RingElement> p, q;
    RingElement want = RingElement::zero(64);
    for (std::size_t i = 0; i < d; ++i) {
      p.emplace_back(rng(), 64);
      q.emplace_back(rng(), 64);
      want += p.back() * q.back();
    }
    RunResult semi, mal;
    EXPECT_EQ(open_dot(Mode::Semi, p, q, &semi), want);
    EXPECT_EQ(open_dot(Mode::Mal, p, q, &mal), want);
    EXPECT_EQ(semi.ring_elements(Phase::Offline), 1U);
    EXPECT_EQ(semi.ring_elements(Phase::Online), 2U);
    EXPECT_EQ(semi.rounds(Phase::Online), 1U);
    EXPECT_EQ(mal.ring_elements(Phase::Offline), 21 * d);
    EXPECT_EQ(mal.ring_elements(Phase::Online), 2 * d + 2);
    EXPECT_EQ(mal.rounds(Phase::Online), 1U);
  }
}

TEST(Dot, TamperedMstarAborts) {
  Dealer dealer(seed_from_u64(1));
  const auto ps = dealer.share_vector(std::vector<RingElement>(4, RingElement(3, 64)));
  const auto f = parse_fault_script("point=mul.mstar party=1 op=add-delta value=1 index=2");
  RunOptions o;
  o.faults = &f;
  const auto run = run_mem([&](PartyContext& ctx) {
    const auto i = index_of(ctx.me);
    return std::vector<RingElement>{dot_run_mal(ctx, ps[i], ps[i])};
  }, o);
  EXPECT_TRUE(run.at(Party::P0).aborted || run.at(Party::P2).aborted);
}

TEST(BitExt, Bounds) {
  EXPECT_EQ(bitext_r_bound(8, 2), 16U);
  EXPECT_EQ(bitext_factor_bound(8, 2), 4U);
  EXPECT_EQ(bitext_r_bound(64, 31), 1ULL << 31);
  EXPECT_THROW(bitext_r_bound(8, 6), ContractViolation);
}

// msb(a) for random admissible a; a = 0 and |a| = 2^ka are excluded.
TEST(BitExtProperty, SignMatchesMsb) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 60; ++i) {
    std::int64_t v = 0;
    while (v == 0) v = static_cast<std::int64_t>(rng() % (1ULL << 32)) - (1LL << 31) + 1;
    Dealer dealer(seed_from_u64(i));
    const auto sh = dealer.share(from_signed(v, 64));
    for (Mode mode : {Mode::Semi, Mode::Mal}) {
      const auto run = run_mem([&](PartyContext& ctx) {
        const auto& s = sh[index_of(ctx.me)];
        return std::vector<RingElement>{mode == Mode::Semi ? bitext_run_semi(ctx, s) : bitext_run_mal(ctx, s)};
      });
      ASSERT_TRUE(run.all_ok());
      for (const auto& p : run.parties) EXPECT_EQ(p.outputs[0].value(), v < 0 ? 1U : 0U) << v;
    }
  }
}

TEST(BitExt, ZeroIsNotNegative) {
  Dealer dealer(seed_from_u64(9));
  const auto sh = dealer.share(RingElement::zero(64));
  const auto run = run_mem([&](PartyContext& ctx) {
    return std::vector<RingElement>{bitext_run_mal(ctx, sh[index_of(ctx.me)])};
  });
  ASSERT_TRUE(run.all_ok());
  EXPECT_EQ(run.at(Party::P1).outputs[0].value(), 0U);
}

TEST(BitExt, Costs) {
  Dealer dealer(seed_from_u64(2));
  const auto sh = dealer.share(from_signed(-7, 64));
  const auto semi = run_mem([&](PartyContext& ctx) {
    return std::vector<RingElement>{bitext_run_semi(ctx, sh[index_of(ctx.me)])};
  });
  EXPECT_EQ(semi.ring_bits(Phase::Online), 2 * 64 + 2U);
  EXPECT_EQ(semi.rounds(Phase::Online), 2U);
  EXPECT_EQ(semi.ring_elements(Phase::Offline), 0U);
  const auto mal = run_mem([&](PartyContext& ctx) {
    return std::vector<RingElement>{bitext_run_mal(ctx, sh[index_of(ctx.me)])};
  });
  EXPECT_EQ(mal.ring_bits(Phase::Online), 6 * 64 + 1U);
  EXPECT_EQ(mal.rounds(Phase::Online), 3U);
  EXPECT_EQ(mal.ring_bits(Phase::Offline), 46 * 64U);
  EXPECT_EQ(mal.rounds(Phase::Offline), 4U);
}

TEST(Predict, AllKindsBothModes) {
  for (ModelKind kind : {ModelKind::LinReg, ModelKind::SvmR, ModelKind::LogR, ModelKind::SvmC}) {
    for (Mode mode : {Mode::Semi, Mode::Mal}) {
      const auto m = random_model(kind, 40, 5);
      const auto z = random_query(m, 6);
      PredictOptions po;
      po.mode = mode;
      const auto run = run_mem(predict_fn(m, z, po));
      ASSERT_TRUE(run.all_ok()) << model_kind_name(kind);
      const double got = decode_prediction(kind, run.at(Party::P2).outputs[0]);
      if (is_classifier(kind)) EXPECT_EQ(got, plain_predict(m, z));
      else EXPECT_NEAR(got, plain_score(m, z), 41 * std::ldexp(1.0, -13));
    }
  }
}
