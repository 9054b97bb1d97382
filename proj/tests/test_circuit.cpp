#include <gtest/gtest.h>

#include <openssl/evp.h>

#include <random>

#include "tpc/circuit.hpp"
#include "tpc/crypto.hpp"

using namespace tpc;

namespace {

std::vector<RingElement> vals(std::initializer_list<std::uint64_t> v, unsigned bits) {
  std::vector<RingElement> out;
  for (auto x : v) out.emplace_back(x, bits);
  return out;
}

}  // namespace

TEST(Circuit, NativeParseAndEval) {
  // (a + b) * c, then * a
  const Circuit c = parse_native(
      "3 1 1 2 32\n"
      "INPUT 0 0\nINPUT 1 1\nINPUT 2 2\n"
      "ADD 0 1 3\nMUL 3 2 4\nMUL 4 0 5\n"
      "OUTPUT 5\n");
  EXPECT_EQ(c.num_mul(), 2U);
  EXPECT_EQ(c.num_add(), 1U);
  EXPECT_EQ(c.depth(), 2U);
  EXPECT_EQ(eval_plain(c, vals({2, 3, 4}, 32)), vals({40}, 32));
  EXPECT_EQ(parse_native(write_native(c)).gates(), c.gates());
}

TEST(Circuit, RejectsMalformed) {
  EXPECT_THROW(parse_native("1 1 0 1 32\nINPUT 0 0\nMUL 0 7 1\nOUTPUT 1\n"), ParseError);      // undefined operand
  EXPECT_THROW(parse_native("1 1 1 0 32\nINPUT 0 0\nADD 0 0 0\nOUTPUT 0\n"), ParseError);      // wire written twice
  EXPECT_THROW(parse_native("1 1 0 0 16\nINPUT 0 0\nOUTPUT 0\n"), ParseError);                 // width
  EXPECT_THROW(parse_native("2 1 0 0 32\nINPUT 0 0\nOUTPUT 0\n"), ParseError);                 // truncated
}

TEST(Circuit, BristolGates) {
  // out0 = (a AND b) XOR (NOT a)
  const Circuit c = parse_bristol(
      "3 5\n"
      "2 1 1\n"
      "1 1\n"
      "\n"
      "2 1 0 1 2 AND\n"
      "1 1 0 3 INV\n"
      "2 1 2 3 4 XOR\n");
  ASSERT_TRUE(c.const_one());
  EXPECT_EQ(c.num_user_inputs(), 2U);
  for (std::uint64_t a = 0; a < 2; ++a)
    for (std::uint64_t b = 0; b < 2; ++b) {
      const auto in = c.with_constants(vals({a, b}, 1));
      EXPECT_EQ(eval_plain(c, in)[0].value(), (a & b) ^ (1 - a));
    }
}

TEST(Circuit, BristolRoundTrip) {
  const auto text = aes128_bristol();
  const Circuit c = parse_bristol(text);
  const std::vector<std::size_t> in{128, 128}, out{128};
  const Circuit d = parse_bristol(write_bristol(c, in, out));
  EXPECT_EQ(d.num_mul(), c.num_mul());
  std::mt19937_64 rng(1);
  std::vector<RingElement> user;
  for (int i = 0; i < 256; ++i) user.emplace_back(rng() & 1, 1);
  EXPECT_EQ(eval_plain(d, d.with_constants(user)), eval_plain(c, c.with_constants(user)));
}

// Plain evaluation of the generated AES circuit against OpenSSL.
TEST(Circuit, AesMatchesOpenssl) {
  const Circuit& c = aes128_circuit();
  std::mt19937_64 rng(2);
  for (int t = 0; t < 3; ++t) {
    std::vector<std::uint8_t> key(16), pt(16), ct(32);
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int len = 0;
    EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    EVP_EncryptUpdate(ctx, ct.data(), &len, pt.data(), 16);
    EVP_CIPHER_CTX_free(ctx);
    ct.resize(16);
    auto user = bytes_to_bits(key);
    const auto p = bytes_to_bits(pt);
    user.insert(user.end(), p.begin(), p.end());
    EXPECT_EQ(bits_to_bytes(eval_plain(c, c.with_constants(user))), ct);
  }
}

TEST(Circuit, KnownAesVector) {
  // FIPS-197 appendix C.1
  std::vector<std::uint8_t> key(16), pt(16);
  for (int i = 0; i < 16; ++i) {
    key[i] = static_cast<std::uint8_t>(i);
    pt[i] = static_cast<std::uint8_t>(0x11 * i);
  }
  const Circuit& c = aes128_circuit();
  auto user = bytes_to_bits(key);
  const auto p = bytes_to_bits(pt);
  user.insert(user.end(), p.begin(), p.end());
  const auto ct = bits_to_bytes(eval_plain(c, c.with_constants(user)));
  EXPECT_EQ(to_hex(ct), "69c4e0d86a7b0430d8cdb78070b4c55a");
}

// Two evaluation orders agree on random circuits; generator obeys its bounds.
TEST(CircuitProperty, RandomCircuitsOraclesAgree) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Circuit c = random_circuit(seed, {32, 200, 8});
    ASSERT_LE(c.gates().size(), 200U);
    ASSERT_LE(c.depth(), 8U);
    ASSERT_GE(c.num_mul(), 1U);
    for (Party p : kAllParties) {
      bool owns = false;
      for (const auto& in : c.inputs()) owns |= in.owner == p;
      ASSERT_TRUE(owns) << seed;
    }
    std::mt19937_64 rng(seed);
    std::vector<RingElement> in;
    for (std::size_t i = 0; i < c.num_inputs(); ++i) in.emplace_back(rng(), 32);
    ASSERT_EQ(eval_plain(c, in), eval_recursive(c, in)) << seed;
    ASSERT_EQ(parse_native(write_native(c)).gates(), c.gates());
  }
}

TEST(Circuit, LevelsPartitionGates) {
  const Circuit c = random_circuit(9, {32, 120, 6});
  std::size_t muls = 0, adds = 0;
  for (const auto& l : c.mul_by_level()) muls += l.size();
  for (const auto& l : c.add_by_level()) adds += l.size();
  EXPECT_EQ(muls, c.num_mul());
  EXPECT_EQ(adds, c.num_add());
  for (unsigned level = 1; level < c.mul_by_level().size(); ++level)
    for (auto gi : c.mul_by_level()[level]) {
      const auto& g = c.gates()[gi];
      EXPECT_LT(c.wire_levels()[g.left], level);
      EXPECT_LT(c.wire_levels()[g.right], level);
    }
}
