#include "tpc/sharing.hpp"

#include <fstream>

namespace tpc {

namespace {

constexpr std::array<std::uint8_t, 4> kShareMagic{'T', 'P', 'C', 'S'};
constexpr std::uint16_t kDealerDomain = 0x0D00;

void check_compatible(const MShare& a, const MShare& b) {
  if (a.holder != b.holder) throw ContractViolation("share role mismatch");
  if (a.bits() != b.bits()) throw ContractViolation("share width mismatch");
}

}  // namespace

RingElement additive_reconstruct(const AdditiveShare& a, const AdditiveShare& b) {
  if (a.holder == b.holder) throw ContractViolation("additive_reconstruct: both shares from " + party_name(a.holder));
  if (!is_evaluator(a.holder) || !is_evaluator(b.holder))
    throw ContractViolation("additive shares are held by P1 and P2");
  return a.value + b.value;
}

MShare MShare::zero(Party holder, unsigned bits) {
  const auto z = RingElement::zero(bits);
  return {holder, z, z, z};
}

MShare MShare::constant(Party holder, RingElement c) {
  MShare s = zero(holder, c.bits());
  if (is_evaluator(holder)) s.m = c;
  return s;
}

MShare MShare::from_parts(Party holder, RingElement m, RingElement lambda1, RingElement lambda2) {
  const auto z = RingElement::zero(m.bits());
  switch (holder) {
    case Party::P0: return {holder, z, lambda1, lambda2};
    case Party::P1: return {holder, m, lambda1, z};
    case Party::P2: return {holder, m, z, lambda2};
  }
  throw ContractViolation("bad holder");
}

RingElement MShare::own_lambda() const {
  if (holder == Party::P1) return lambda1;
  if (holder == Party::P2) return lambda2;
  throw ContractViolation("own_lambda: P0 holds both mask shares");
}

MShare operator+(const MShare& a, const MShare& b) {
  check_compatible(a, b);
  return {a.holder, a.m + b.m, a.lambda1 + b.lambda1, a.lambda2 + b.lambda2};
}

MShare operator-(const MShare& a, const MShare& b) {
  check_compatible(a, b);
  return {a.holder, a.m - b.m, a.lambda1 - b.lambda1, a.lambda2 - b.lambda2};
}

MShare operator*(RingElement c, const MShare& a) { return {a.holder, c * a.m, c * a.lambda1, c * a.lambda2}; }

MShare add_constant(const MShare& a, RingElement c) {
  MShare r = a;
  if (is_evaluator(a.holder)) r.m = a.m + c;
  else if (c.bits() != a.bits()) throw ContractViolation("share width mismatch");
  return r;
}

MShare lin_combine(std::span<const RingElement> coeffs, std::span<const MShare> shares, RingElement constant) {
  if (coeffs.size() != shares.size()) throw ContractViolation("lin_combine: coefficient/share count mismatch");
  if (shares.empty()) throw ContractViolation("lin_combine: no shares");
  MShare acc = MShare::zero(shares[0].holder, shares[0].bits());
  for (std::size_t i = 0; i < shares.size(); ++i) acc = acc + coeffs[i] * shares[i];
  return add_constant(acc, constant);
}

RingElement reconstruct(const MShare& v0, const MShare& v1, const MShare& v2) {
  if (v0.holder != Party::P0 || v1.holder != Party::P1 || v2.holder != Party::P2)
    throw ContractViolation("reconstruct: views must be ordered P0, P1, P2");
  if (v1.m != v2.m) throw ContractViolation("reconstruct: evaluators disagree on m");
  if (v0.lambda1 != v1.lambda1) throw ContractViolation("reconstruct: lambda1 mismatch between P0 and P1");
  if (v0.lambda2 != v2.lambda2) throw ContractViolation("reconstruct: lambda2 mismatch between P0 and P2");
  return v1.m - v0.lambda1 - v0.lambda2;
}

RingElement reconstruct(const std::array<MShare, 3>& views) { return reconstruct(views[0], views[1], views[2]); }

Dealer::Dealer(const Seed128& seed)
    : keys_(Party::P0, [&] {
        // The dealer only needs a private stream; derive a key from the seed.
        std::vector<std::uint8_t> buf{'t', 'p', 'c', '-', 'd', 'e', 'a', 'l'};
        buf.insert(buf.end(), seed.begin(), seed.end());
        const Digest d = hash_digest(buf);
        Key128 k{};
        std::copy_n(d.begin(), 16, k.begin());
        std::array<std::optional<Key128>, 4> keys;
        keys[static_cast<int>(KeyId::kAll)] = k;
        return keys;
      }()) {}

std::array<MShare, 3> Dealer::share(RingElement v) {
  const StreamLabel label(kDealerDomain, next_++);
  const auto l1 = keys_.sample(KeyId::kAll, label, v.bits());
  const auto l2 = keys_.sample(KeyId::kAll, label, v.bits());
  return share_with_masks(v, l1, l2);
}

std::array<MShare, 3> Dealer::share_with_masks(RingElement v, RingElement lambda1, RingElement lambda2) {
  const RingElement m = v + lambda1 + lambda2;
  return {MShare::from_parts(Party::P0, m, lambda1, lambda2), MShare::from_parts(Party::P1, m, lambda1, lambda2),
          MShare::from_parts(Party::P2, m, lambda1, lambda2)};
}

std::array<ShareVector, 3> Dealer::share_vector(std::span<const RingElement> values) {
  std::array<ShareVector, 3> out;
  for (auto& o : out) o.reserve(values.size());
  for (const auto& v : values) {
    auto s = share(v);
    for (int p = 0; p < 3; ++p) out[p].push_back(s[p]);
  }
  return out;
}

std::array<MShare, 3> dealer_share(RingElement v, Dealer& dealer) { return dealer.share(v); }

void write_share_file(const std::filesystem::path& path, Party role, std::span<const MShare> shares) {
  const unsigned bits = shares.empty() ? 64 : shares[0].bits();
  std::vector<RingElement> first, second;
  for (const auto& s : shares) {
    if (s.holder != role || s.bits() != bits) throw ContractViolation("write_share_file: mixed roles or widths");
    switch (role) {
      case Party::P0: first.push_back(s.lambda1); second.push_back(s.lambda2); break;
      case Party::P1: first.push_back(s.m); second.push_back(s.lambda1); break;
      case Party::P2: first.push_back(s.m); second.push_back(s.lambda2); break;
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open share file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(kShareMagic.data()), 4);
  const std::uint8_t hdr[2] = {static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(index_of(role))};
  out.write(reinterpret_cast<const char*>(hdr), 2);
  const auto n = static_cast<std::uint32_t>(shares.size());
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>(n >> (8 * i)));
  for (const auto* comp : {&first, &second}) {
    const auto bytes = pack_elements(*comp, bits);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

ShareVector read_share_file(const std::filesystem::path& path, Party expected_role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open share file: " + path.string());
  std::array<std::uint8_t, 10> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (!in || !std::equal(kShareMagic.begin(), kShareMagic.end(), hdr.begin()))
    throw ParseError(1, "bad share file header");
  const unsigned bits = hdr[4];
  if (!supported_width(bits)) throw ParseError(1, "unsupported width in share file");
  const Party role = party_from_index(hdr[5]);
  if (role != expected_role) throw ContractViolation("share file belongs to " + party_name(role));
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= std::uint32_t{hdr[6 + i]} << (8 * i);
  std::vector<std::vector<RingElement>> comps;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::uint8_t> bytes(packed_size(n, bits));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw ParseError(1, "truncated share file");
    comps.push_back(unpack_elements(bytes, bits, n));
  }
  ShareVector out;
  out.reserve(n);
  const auto z = RingElement::zero(bits);
  for (std::uint32_t i = 0; i < n; ++i) {
    switch (role) {
      case Party::P0: out.push_back({role, z, comps[0][i], comps[1][i]}); break;
      case Party::P1: out.push_back({role, comps[0][i], comps[1][i], z}); break;
      case Party::P2: out.push_back({role, comps[0][i], z, comps[1][i]}); break;
    }
  }
  return out;
}

}  // namespace tpc
