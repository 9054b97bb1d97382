#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "tpc/crypto.hpp"

using namespace tpc;

TEST(Hash, Sha256KnownVector) {
  const std::string abc = "abc";
  const auto d = hash_digest({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()});
  EXPECT_EQ(to_hex(d), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Hasher h;
  h.update({reinterpret_cast<const std::uint8_t*>(abc.data()), 1});
  h.update({reinterpret_cast<const std::uint8_t*>(abc.data()) + 1, 2});
  EXPECT_EQ(h.peek(), d);
  EXPECT_EQ(h.finish(), d);
}

// FIPS-197 appendix C.1: the block is label || counter, little-endian.
TEST(Prf, AesKnownVector) {
  Key128 key{};
  for (int i = 0; i < 16; ++i) key[i] = static_cast<std::uint8_t>(i);
  const Prf prf(key);
  std::uint64_t w = 0;
  prf.eval_words(0x7766554433221100ULL, 0xffeeddccbbaa9988ULL, {&w, 1});
  EXPECT_EQ(w, 0x30047b6ad8e0c469ULL);
}

TEST(Keys, HoldersAndAgreement) {
  auto keys = setup_keys(seed_from_u64(9));
  for (Party p : kAllParties)
    for (int k = 0; k < 4; ++k) EXPECT_EQ(keys[index_of(p)].holds(static_cast<KeyId>(k)), holds_key(p, static_cast<KeyId>(k)));
  EXPECT_FALSE(keys[0].holds(KeyId::k12));
  EXPECT_EQ(pair_key(Party::P2, Party::P1), KeyId::k12);
  const StreamLabel l(7, 3);
  // P1 and P2 draw the same k12 stream; counters advance in lockstep.
  const auto a = keys[1].sample(KeyId::k12, l, 64, 5);
  const auto b = keys[2].sample(KeyId::k12, l, 64, 5);
  EXPECT_EQ(a, b);
  EXPECT_EQ(keys[1].counter(KeyId::k12, l), 5U);
  EXPECT_NE(keys[1].sample(KeyId::k12, l, 64), a[0]);
  EXPECT_THROW(keys[0].sample(KeyId::k12, l, 64), ContractViolation);
}

TEST(Keys, SampleBelowIsInRangeAndCoversIt) {
  auto keys = setup_keys(seed_from_u64(1));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    const auto v = keys[0].sample_below(KeyId::k01, StreamLabel(1, 1), 7);
    ASSERT_LT(v, 7U);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7U);
  EXPECT_THROW(keys[0].sample_below(KeyId::k01, StreamLabel(1, 1), 0), ContractViolation);
}

TEST(Keys, FileRoundTripDropsForeignKeys) {
  auto keys = setup_keys(seed_from_u64(5));
  const auto path = std::filesystem::temp_directory_path() / "tpc_test_p1.key";
  write_key_file(path, keys[1]);
  auto back = read_key_file(path, Party::P1);
  EXPECT_FALSE(back.holds(KeyId::k02));
  EXPECT_EQ(back.key(KeyId::k12), keys[1].key(KeyId::k12));
  EXPECT_EQ(back.sample(KeyId::kAll, StreamLabel(2, 2), 64), keys[2].sample(KeyId::kAll, StreamLabel(2, 2), 64));
  std::filesystem::remove(path);
}

TEST(Commitments, BindAndHide) {
  const std::vector<std::uint8_t> msg{1, 2, 3};
  Randomness256 r{};
  r[0] = 9;
  const auto c = commit(msg, r);
  EXPECT_TRUE(verify_open(c, {msg, r}));
  auto other = msg;
  other[2] ^= 1;
  EXPECT_FALSE(verify_open(c, {other, r}));
  auto r2 = r;
  r2[31] = 1;
  EXPECT_FALSE(verify_open(c, {msg, r2}));
  EXPECT_NE(commit(msg, r2), c);
}
