#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpc/circuit.hpp"
#include "tpc/context.hpp"
#include "tpc/engine_semi.hpp"

namespace tpc {

/// Cut-and-bucket parameters. The bucket size comes from the nominal batch size
/// (B = max(2, ceil(s / log2 N))) so small test runs can reproduce the per-gate
/// costs of a large batch.
struct TripleParams {
  std::uint64_t nominal_n = std::uint64_t{1} << 20;
  unsigned s = 40;
  std::optional<unsigned> bucket;   // forces B
  std::optional<std::size_t> opened;  // C; default 3B
  bool postponed = true;  // second shuffle assigning verified triples to gates

  unsigned B() const;
  std::size_t C() const;
};

unsigned bucket_size(std::uint64_t nominal_n, unsigned s);

struct Triple {
  MShare a, b, c;
};

/// Non-interactive random sharings: lambda1 <- k01, lambda2 <- k02, m <- k12.
std::vector<MShare> rand_shared(PartyContext& ctx, StreamLabel label, unsigned bits, std::size_t n);

/// Who learns the value in a verified reconstruction.
struct Recipients {
  bool p0 = true, p1 = true, p2 = true;
  bool has(Party p) const { return p == Party::P0 ? p0 : p == Party::P1 ? p1 : p2; }
};

/// Verified reconstruction split into its send and receive halves so several
/// can share a round. Each recipient gets the missing component from one holder
/// and a digest of it from the other.
struct RecPending {
  std::vector<MShare> shares;
  Recipients to;
  unsigned bits = 1;
};

RecPending rec_mal_send(PartyContext& ctx, std::span<const MShare> shares, Recipients to = {},
                        Category cat = Category::Ring);
/// Values for recipients, empty otherwise. Throws ProtocolAbort("rec.verify").
std::vector<RingElement> rec_mal_finish(PartyContext& ctx, const RecPending& pending);
std::vector<RingElement> rec_mal(PartyContext& ctx, std::span<const MShare> shares, Recipients to = {});

/// Pairwise tau == 0 checks as running digests:
///   P1 -> P0: H(m - lambda1) vs lambda2
///   P2 -> P0: H(m - lambda2) vs lambda1
///   P2 -> P1: H(m - lambda2) vs lambda1
class TauBuffer {
 public:
  void add(Party me, const MShare& tau);
  void add(Party me, std::span<const MShare> taus);
  void send(PartyContext& ctx);
  void receive(PartyContext& ctx, const std::string& check);
  std::size_t size() const { return count_; }

 private:
  Hasher to_p0_, to_p1_, exp_p1_, exp_p2_;
  std::size_t count_ = 0;
};

/// Local part of the sacrifice check: tau = c - f - sigma*d - rho*e - sigma*rho,
/// given the opened rho = a - d and sigma = b - e.
MShare sacrifice_tau(const Triple& checked, const Triple& sacrificed, RingElement rho, RingElement sigma);

/// Full sacrifice check of checked[i] against sacrificed[i] (two openings, then
/// the pairwise digests). Throws ProtocolAbort("prc.tau").
void prc_check(PartyContext& ctx, std::span<const Triple> checked, std::span<const Triple> sacrificed);

/// Optimistic triple generation with cut-and-choose and bucketing. The
/// permutation and the gate assignment come from a seed the evaluators share;
/// P1 hands it to P0 in round 2 (P2 sends a digest of it).
class TripleGen {
 public:
  TripleGen(PartyContext& ctx, std::size_t n, unsigned bits, const TripleParams& params);

  void round1_send();
  void round1_recv();
  void round2_send();
  void round2_recv();
  void round3_send();
  void round3_finish();  // opened triples checked, bucket tau computed
  void round4_send();
  void round4_finish();  // bucket digests checked

  /// Verified triple for consumer k.
  const Triple& output(std::size_t k) const;
  std::size_t size() const { return n_; }
  unsigned bucket() const { return B_; }
  std::size_t opened() const { return C_; }
  std::size_t pool() const { return M_; }

 private:
  void schedule();  // perm_, the opened/bucketed split and assign_ from seed_

  PartyContext& ctx_;
  std::size_t n_;
  unsigned bits_;
  unsigned B_;
  std::size_t C_, M_;
  bool postponed_;
  std::vector<RingElement> seed_;
  std::vector<MShare> d_, e_;
  std::vector<MulPrep> prep_;
  std::vector<Triple> t_;
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> ring_idx_, open_idx_;
  std::vector<RingElement> my_mf_;
  std::vector<Triple> outputs_;
  std::vector<std::size_t> assign_;
  RecPending open_rec_, bucket_rec_;
  TauBuffer tau_;
};

/// Runs the generator alone (4 rounds).
std::vector<Triple> gen_triples(PartyContext& ctx, std::size_t n, unsigned bits, const TripleParams& params);

/// Deferred online checks: m* consistency, the combined m*_z digest and the
/// gate-level tau digests. Flushed once, before any output is opened.
class MalVerifier {
 public:
  explicit MalVerifier(PartyContext& ctx) : ctx_(ctx) {}

  /// One verification unit: z = sum_j x_j*y_j, evaluated with preps[j].
  /// open() queues the m* values, close() supplies z; units close in open order.
  void open(std::span<const MShare> xs, std::span<const MShare> ys, std::span<const MulPrep> preps);
  void close(const MShare& z);
  void add(std::span<const MShare> xs, std::span<const MShare> ys, const MShare& z, std::span<const MulPrep> preps);
  void add(const MShare& x, const MShare& y, const MShare& z, const MulPrep& prep);

  /// P1 ships the queued m*_x, m*_y to P0 in one frame; P0 notes the batch.
  /// Every party calls this at the same protocol point.
  void send_mstar();
  /// P0 reads every batch noted so far (no-op elsewhere).
  void recv_mstar();
  TauBuffer& tau() { return tau_; }
  /// m* up (with tau digests), one digest down. Throws ProtocolAbort.
  void flush();

 private:
  struct Batch {
    std::vector<std::vector<MulPrep>> units;
  };

  PartyContext& ctx_;
  std::vector<RingElement> pending_mstar_;  // P1
  std::vector<std::vector<MulPrep>> open_units_;  // P0: not yet in a batch
  std::vector<Batch> batches_;              // P0: noted, not yet read
  std::vector<RingElement> partial_;        // evaluators: -sum m_x m_y + sum dz per open unit
  std::size_t closed_ = 0;
  Hasher mstar_;     // P2: sent digest; P0: digest of received values
  Hasher check_;     // evaluators: m_z - sum m_x m_y + sum dz; P0: sum m*_z
  TauBuffer tau_;
  std::size_t units_ = 0;
};

/// Malicious preprocessing for a batch of multiplications: gamma, the evaluator
/// pads, chi, the linked triple (a, b, c) and its sacrifice against a generated
/// triple. The gate tau digests go to `verifier`.
class MalOffline {
 public:
  MalOffline(PartyContext& ctx, unsigned bits, std::size_t n, const TripleParams& params);

  const MShare& lz(std::size_t i) const { return preps_[i].lz; }
  void set_inputs(std::size_t i, const MShare& x_mask, const MShare& y_mask);

  struct Hooks {
    std::function<void()> round1_send, round1_recv, round2_send, round2_recv, round3_recv;
  };
  void run(MalVerifier& verifier, const Hooks& hooks = {});

  const MulPrep& prep(std::size_t i) const { return preps_[i]; }
  std::vector<MulPrep>& preps() { return preps_; }
  std::size_t size() const { return preps_.size(); }
  const TripleGen& triples() const { return gen_; }

  /// The linked triple of multiplication i (valid after round 2).
  Triple linked(std::size_t i) const;

 private:
  PartyContext& ctx_;
  unsigned bits_;
  std::vector<MulPrep> preps_;
  TripleGen gen_;
};

/// Input sharing plus one digest per evaluator over every m it got from P0.
std::vector<MShare> share_inputs_mal(PartyContext& ctx, std::span<const Party> owners, const InputMasks& masks,
                                     std::span<const RingElement> mine);

/// Proof-of-origin material and the cross-pair commitments to the output masks.
struct FairPrep {
  std::vector<MShare> outputs;           // output-wire masks
  std::vector<Commitment> com_lambda1;   // held by P2 (agreed between P0 and P1)
  std::vector<Commitment> com_lambda2;   // held by P1
  std::vector<Randomness256> rand_lambda1, rand_lambda2;  // holders' randomness
  std::uint64_t r1 = 0, r2 = 0;          // r1: P0,P1; r2: P0,P2
  Randomness256 rand_r1{}, rand_r2{};
  Commitment com_r1, com_r2;             // com_r1 held by P2, com_r2 by P1
  std::uint64_t instance = 0;
};

FairPrep fair_prepare(PartyContext& ctx, std::span<const MShare> output_masks);
void fair_offline_send(PartyContext& ctx, FairPrep& prep);
void fair_offline_recv(PartyContext& ctx, FairPrep& prep);  // throws ProtocolAbort("fair.prep")

/// Fair reconstruction: all honest parties output, or all abort.
std::vector<RingElement> rec_fair(PartyContext& ctx, const FairPrep& prep, std::span<const MShare> shares);

struct MalOptions {
  TripleParams triples;
  bool fair = false;
};

std::vector<RingElement> run_circuit_mal(PartyContext& ctx, const Circuit& c, std::span<const RingElement> mine,
                                         const MalOptions& opts = {});

}  // namespace tpc
