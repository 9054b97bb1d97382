#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpc/engine_mal.hpp"

namespace tpc {

enum class ModelKind { LinReg, SvmR, LogR, SvmC };

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);  // throws ConfigError
bool is_classifier(ModelKind k);

/// Plain model as the owner holds it. SVM kinds arrive already aggregated.
struct Model {
  ModelKind kind = ModelKind::LinReg;
  std::vector<double> w;
  double b = 0;
  double threshold = 0.5;  // logr only, in (0, 1)

  std::size_t d() const { return w.size(); }
};

/// w = sum_j alpha_j y_j x_j
std::vector<double> svm_aggregate(std::span<const double> alpha, std::span<const double> y,
                                  const std::vector<std::vector<double>>& x);

/// Bias the servers see: logr folds the threshold in, b - ln(t / (1 - t)).
double effective_bias(const Model& m);

/// Model file:
///   <kind> <d> [k]
///   d weights, or for SVM kinds with k given, k lines "alpha y x_1 .. x_d"
///   bias <b>
///   [threshold <t>]
Model parse_model(std::string_view text);
Model load_model(const std::filesystem::path& path);
std::string write_model(const Model& m);

/// Query file: "<d>" then d values.
std::vector<double> parse_query(std::string_view text);
std::vector<double> load_query(const std::filesystem::path& path);
std::string write_query(std::span<const double> z);

// Fixed point: w and z carry kFracBits fractional bits, so w.z and the bias
// carry twice that.
inline constexpr unsigned kProductFracBits = 2 * kFracBits;

/// The exact ring value the protocol computes: sum fx(w_i) fx(z_i) + fx2(b').
RingElement fixed_score(const Model& m, std::span<const double> z);
/// Real-valued w.z + b'.
double plain_score(const Model& m, std::span<const double> z);
/// Plaintext pipeline: decoded score for regression kinds, 1 - msb(score) for
/// classification (1 means w.z + b' >= 0).
double plain_predict(const Model& m, std::span<const double> z);

/// This party's staged shares of the model and the query.
struct PredictInputs {
  ShareVector w, z;
  MShare b;
};

/// Dealer staging of (w, b') and z for all three parties.
std::array<PredictInputs, 3> stage_prediction(const Model& m, std::span<const double> z, const Seed128& seed);

/// Share with the masked value dropped; what preprocessing may use.
MShare mask_of(const MShare& s);

// ---- dot product ----

class DotSemi {
 public:
  /// Samples lambda_u and gamma_1; P0 uses the masks of p and q.
  DotSemi(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q);
  /// P0 -> P2: gamma_2 = sum lambda_p lambda_q - gamma_1.
  void offline();
  const MShare& lu() const { return lu_; }
  /// One round: the evaluators swap their summed m_u shares.
  MShare online(std::span<const MShare> p, std::span<const MShare> q);

 private:
  PartyContext& ctx_;
  std::size_t d_;
  MShare lu_;
  RingElement g1_, g2_, lpq_;
};

/// d malicious multiplications sharing one m_u exchange and one verification unit.
class DotMal {
 public:
  /// Uses multiplications [first, first + d) of `off`.
  DotMal(MalOffline& off, std::size_t first, std::span<const MShare> p, std::span<const MShare> q);
  MShare lu() const;
  /// One round: m_u shares between the evaluators, all m* to P0.
  MShare online(PartyContext& ctx, MalVerifier& ver, std::span<const MShare> p, std::span<const MShare> q);

 private:
  MalOffline& off_;
  std::size_t first_, d_;
};

// ---- MSB extraction ----

struct BitExtOptions {
  unsigned ka = 31;  // |signed(a)| <= 2^ka
  std::optional<std::uint64_t> force_r;   // semi-honest blinding factor
  std::optional<std::uint64_t> force_r1;  // malicious factors
  std::optional<std::uint64_t> force_r2;
};

/// r in [1, 2^(bits-2-ka)); throws ContractViolation if the range is empty.
std::uint64_t bitext_r_bound(unsigned bits, unsigned ka);
/// Each factor in [1, 2^((bits-2-ka)/2)).
std::uint64_t bitext_factor_bound(unsigned bits, unsigned ka);

class BitExtSemi {
 public:
  /// r, r' from k12 and the mask of q; no communication.
  BitExtSemi(PartyContext& ctx, unsigned bits, const BitExtOptions& opts = {});
  /// Two rounds: blinded r*a to P0, then P0 shares q = msb(r*a). Returns the
  /// boolean sharing of msb(a).
  MShare online(const MShare& a);

 private:
  PartyContext& ctx_;
  unsigned bits_;
  RingElement r_, rp_;
  InputMasks q_mask_;
};

class BitExtMal {
 public:
  /// Uses multiplications `first` (r1*r2) and `first + 1` (r*a) of `off`.
  BitExtMal(PartyContext& ctx, MalOffline& off, std::size_t first, const MShare& a_mask,
            const BitExtOptions& opts = {});
  /// Runs the r1*r2 multiplication inside the offline rounds.
  void add_hooks(MalOffline::Hooks& hooks, MalVerifier& ver);
  /// Three rounds: r*a, its opening to P0 and P1, then P1 shares q.
  MShare online(MalVerifier& ver, const MShare& a);

 private:
  PartyContext& ctx_;
  MalOffline& off_;
  std::size_t first_;
  unsigned bits_;
  MShare r1_, r2_, r_;
  InputMasks q_mask_;
};

// ---- standalone runs (offline, online, then verification and opening in the
// output phase); used by tests and the harness ----

RingElement dot_run_semi(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q);
RingElement dot_run_mal(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q,
                        const TripleParams& triples = {});
/// Opened msb(a) as a boolean element.
RingElement bitext_run_semi(PartyContext& ctx, const MShare& a, const BitExtOptions& opts = {});
RingElement bitext_run_mal(PartyContext& ctx, const MShare& a, const BitExtOptions& opts = {},
                           const TripleParams& triples = {});

// ---- prediction ----

enum class Mode { Semi, Mal };

const char* mode_name(Mode m);

struct PredictOptions {
  Mode mode = Mode::Semi;
  TripleParams triples;
  BitExtOptions cmp;
};

/// Regression kinds open w.z + b (kProductFracBits fractional bits);
/// classification kinds open the bit 1 - msb(w.z + b').
RingElement predict(PartyContext& ctx, ModelKind kind, const PredictInputs& in, const PredictOptions& opts = {});

/// Decoded result: the regression value or the class bit.
double decode_prediction(ModelKind kind, RingElement opened);

}  // namespace tpc
