#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "tpc/crypto.hpp"
#include "tpc/party.hpp"
#include "tpc/ring.hpp"

namespace tpc {

/// [v]: v = v1 + v2, held by P1 and P2.
struct AdditiveShare {
  Party holder = Party::P1;
  RingElement value;
};

RingElement additive_reconstruct(const AdditiveShare& a, const AdditiveShare& b);

/// One party's view of a masked sharing of v, where v = m - lambda1 - lambda2:
///   P0 holds (lambda1, lambda2), P1 holds (m, lambda1), P2 holds (m, lambda2).
/// Components a party does not hold are kept at zero.
struct MShare {
  Party holder = Party::P0;
  RingElement m;
  RingElement lambda1;
  RingElement lambda2;

  static MShare zero(Party holder, unsigned bits);
  /// Public constant c: m = c, both masks zero.
  static MShare constant(Party holder, RingElement c);
  /// Build the view of `holder` from the full triple (m, lambda1, lambda2),
  /// dropping the component it must not see.
  static MShare from_parts(Party holder, RingElement m, RingElement lambda1, RingElement lambda2);

  unsigned bits() const { return m.bits(); }
  /// The holder's additive share of the mask: lambda1 for P1, lambda2 for P2.
  RingElement own_lambda() const;
};

using ShareVector = std::vector<MShare>;

MShare operator+(const MShare& a, const MShare& b);
MShare operator-(const MShare& a, const MShare& b);
MShare operator*(RingElement c, const MShare& a);
/// Adds a public constant (only the evaluators' m moves).
MShare add_constant(const MShare& a, RingElement c);

/// sum_i coeffs[i] * shares[i] + constant, computed locally.
MShare lin_combine(std::span<const RingElement> coeffs, std::span<const MShare> shares, RingElement constant);

/// Reconstruct from all three views. Throws ContractViolation when the views are
/// not a consistent sharing (test backdoor; real parties never hold all three).
RingElement reconstruct(const MShare& v0, const MShare& v1, const MShare& v2);
RingElement reconstruct(const std::array<MShare, 3>& views);

/// Trusted dealer used to stage model/query shares and in tests.
class Dealer {
 public:
  explicit Dealer(const Seed128& seed);

  std::array<MShare, 3> share(RingElement v);
  std::array<MShare, 3> share_with_masks(RingElement v, RingElement lambda1, RingElement lambda2);
  std::array<ShareVector, 3> share_vector(std::span<const RingElement> values);

 private:
  KeySetup keys_;
  std::uint64_t next_ = 0;
};

std::array<MShare, 3> dealer_share(RingElement v, Dealer& dealer);

/// Share file: magic "TPCS", u8 width, u8 role, u32 count (LE), then the
/// holder's first component for every element, then its second component,
/// each as a packed little-endian element vector.
void write_share_file(const std::filesystem::path& path, Party role, std::span<const MShare> shares);
ShareVector read_share_file(const std::filesystem::path& path, Party expected_role);

}  // namespace tpc
