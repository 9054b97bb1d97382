#include <gtest/gtest.h>

#include <random>

#include "tpc/ring.hpp"

using namespace tpc;

TEST(Ring, WrapsAtEveryWidth) {
  for (unsigned bits : {1U, 8U, 32U, 64U}) {
    const auto top = RingElement(width_mask(bits), bits);
    EXPECT_EQ(top + RingElement::one(bits), RingElement::zero(bits)) << bits;
    EXPECT_EQ(RingElement::zero(bits) - RingElement::one(bits), top) << bits;
  }
  EXPECT_EQ(RingElement(200, 8) * RingElement(3, 8), RingElement(600 % 256, 8));
}

TEST(Ring, BooleanRingIsXorAnd) {
  for (std::uint64_t a = 0; a < 2; ++a)
    for (std::uint64_t b = 0; b < 2; ++b) {
      EXPECT_EQ((RingElement(a, 1) + RingElement(b, 1)).value(), a ^ b);
      EXPECT_EQ((RingElement(a, 1) * RingElement(b, 1)).value(), a & b);
    }
}

TEST(Ring, RejectsMixedAndUnsupportedWidths) {
  EXPECT_THROW(RingElement(1, 16), ContractViolation);
  EXPECT_THROW(RingElement(1, 8) + RingElement(1, 32), ContractViolation);
}

// Against __int128 arithmetic reduced mod 2^bits.
TEST(RingProperty, MatchesWideIntegerOracle) {
  std::mt19937_64 rng(1);
  for (unsigned bits : {8U, 32U, 64U}) {
    const unsigned __int128 mod = static_cast<unsigned __int128>(1) << bits;
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t x = rng() & width_mask(bits), y = rng() & width_mask(bits);
      const RingElement a(x, bits), b(y, bits);
      EXPECT_EQ((a + b).value(), static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) + y) % mod));
      EXPECT_EQ((a * b).value(), static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * y) % mod));
      EXPECT_EQ((a - b + b), a);
      EXPECT_EQ(a * (b + a), a * b + a * a);
    }
  }
}

TEST(Ring, SignedViewAndMsb) {
  EXPECT_EQ(to_signed(from_signed(-5, 8)), -5);
  EXPECT_EQ(from_signed(-1, 8).value(), 255U);
  EXPECT_EQ(msb(from_signed(-1, 64)), 1);
  EXPECT_EQ(msb(from_signed(0, 64)), 0);
  EXPECT_EQ(msb(RingElement(127, 8)), 0);
  EXPECT_EQ(msb(RingElement(128, 8)), 1);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto v = static_cast<std::int64_t>(rng());
    EXPECT_EQ(to_signed(from_signed(v, 64)), v);
    EXPECT_EQ(msb(from_signed(v, 64)), v < 0 ? 1 : 0);
  }
}

TEST(FixedPoint, EncodeDecode) {
  EXPECT_EQ(fx_encode(1.0).value(), 8192U);
  EXPECT_EQ(to_signed(fx_encode(-0.5)), -4096);
  EXPECT_DOUBLE_EQ(fx_decode(fx_encode(3.25)), 3.25);
  EXPECT_THROW(fx_encode(1e300), RangeError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_LE(std::abs(fx_decode(fx_encode(x)) - x), 0.5 / 8192 + 1e-12);
  }
}

// The product of two 13-bit encodings carries 26 fractional bits.
TEST(FixedPoint, ProductScale) {
  const auto p = fx_encode(1.5) * fx_encode(-2.0);
  EXPECT_DOUBLE_EQ(fx_decode(p, 26), -3.0);
}

TEST(Packing, RoundTripsAndSizes) {
  std::mt19937_64 rng(4);
  for (unsigned bits : {1U, 8U, 32U, 64U}) {
    for (std::size_t n : {0UL, 1UL, 7UL, 9UL, 100UL}) {
      std::vector<RingElement> v;
      for (std::size_t i = 0; i < n; ++i) v.emplace_back(rng(), bits);
      const auto bytes = pack_elements(v, bits);
      EXPECT_EQ(bytes.size(), packed_size(n, bits));
      EXPECT_EQ(unpack_elements(bytes, bits, n), v);
    }
  }
  EXPECT_EQ(packed_size(9, 1), 2U);
  EXPECT_EQ(packed_size(3, 32), 12U);
}
