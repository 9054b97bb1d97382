#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "tpc/sharing.hpp"

using namespace tpc;

TEST(MShare, ViewsHoldOnlyTheirComponents) {
  Dealer dealer(seed_from_u64(1));
  const auto s = dealer.share(RingElement(42, 32));
  EXPECT_EQ(s[0].m, RingElement::zero(32));
  EXPECT_EQ(s[1].lambda2, RingElement::zero(32));
  EXPECT_EQ(s[2].lambda1, RingElement::zero(32));
  EXPECT_EQ(s[1].m, s[2].m);
  EXPECT_EQ(s[0].lambda1, s[1].lambda1);
  EXPECT_EQ(s[0].lambda2, s[2].lambda2);
  EXPECT_EQ(reconstruct(s), RingElement(42, 32));
  // v = m - lambda1 - lambda2
  EXPECT_EQ(s[1].m - s[0].lambda1 - s[0].lambda2, RingElement(42, 32));
}

TEST(MShare, InconsistentViewsAreRejected) {
  Dealer dealer(seed_from_u64(2));
  auto s = dealer.share(RingElement(7, 64));
  s[2].m += RingElement::one(64);
  EXPECT_THROW(reconstruct(s), ContractViolation);
}

TEST(MShare, ExplicitMasks) {
  Dealer dealer(seed_from_u64(3));
  const auto s = dealer.share_with_masks(RingElement(5, 8), RingElement(1, 8), RingElement(2, 8));
  EXPECT_EQ(s[1].m, RingElement(8, 8));
  EXPECT_EQ(s[1].own_lambda(), RingElement(1, 8));
  EXPECT_EQ(s[2].own_lambda(), RingElement(2, 8));
}

// Local operations commute with reconstruction.
TEST(MShareProperty, LinearityUnderReconstruction) {
  std::mt19937_64 rng(4);
  Dealer dealer(seed_from_u64(4));
  for (unsigned bits : {1U, 8U, 32U, 64U}) {
    for (int i = 0; i < 300; ++i) {
      const RingElement x(rng(), bits), y(rng(), bits), c(rng(), bits);
      const auto sx = dealer.share(x), sy = dealer.share(y);
      std::array<MShare, 3> sum, diff, scaled, shifted, lin;
      for (int p = 0; p < 3; ++p) {
        sum[p] = sx[p] + sy[p];
        diff[p] = sx[p] - sy[p];
        scaled[p] = c * sx[p];
        shifted[p] = add_constant(sx[p], c);
        const std::vector<RingElement> coeffs{c, RingElement::one(bits)};
        const std::vector<MShare> shares{sx[p], sy[p]};
        lin[p] = lin_combine(coeffs, shares, c);
      }
      ASSERT_EQ(reconstruct(sum), x + y);
      ASSERT_EQ(reconstruct(diff), x - y);
      ASSERT_EQ(reconstruct(scaled), c * x);
      ASSERT_EQ(reconstruct(shifted), x + c);
      ASSERT_EQ(reconstruct(lin), c * x + y + c);
    }
  }
}

TEST(MShare, PublicConstant) {
  std::array<MShare, 3> c;
  for (Party p : kAllParties) c[index_of(p)] = MShare::constant(p, RingElement(9, 32));
  EXPECT_EQ(reconstruct(c), RingElement(9, 32));
  EXPECT_EQ(c[0].m, RingElement::zero(32));
}

TEST(Additive, Reconstruct) {
  EXPECT_EQ(additive_reconstruct({Party::P1, RingElement(3, 8)}, {Party::P2, RingElement(255, 8)}), RingElement(2, 8));
}

TEST(ShareFile, RoundTripAndRoleCheck) {
  Dealer dealer(seed_from_u64(5));
  std::vector<RingElement> v;
  for (std::uint64_t i = 0; i < 10; ++i) v.emplace_back(i * 77, 64);
  const auto views = dealer.share_vector(v);
  const auto path = std::filesystem::temp_directory_path() / "tpc_test_shares.bin";
  write_share_file(path, Party::P2, views[2]);
  const auto back = read_share_file(path, Party::P2);
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(back[i].m, views[2][i].m);
    EXPECT_EQ(back[i].lambda2, views[2][i].lambda2);
  }
  EXPECT_ANY_THROW(read_share_file(path, Party::P1));
  std::filesystem::remove(path);
}
