#pragma once

#include <span>
#include <vector>

#include "tpc/circuit.hpp"
#include "tpc/context.hpp"
#include "tpc/sharing.hpp"

namespace tpc {

/// Input masks. The owner always learns the full lambda:
///   owner P0: lambda1 <- k01, lambda2 <- k02
///   owner P1: lambda1 <- k01, lambda2 <- kP
///   owner P2: lambda1 <- kP,  lambda2 <- k02
struct InputMasks {
  std::vector<MShare> views;      // m is zero until the online phase
  std::vector<RingElement> full;  // lambda of the inputs this party owns, zero elsewhere
};

InputMasks sample_input_masks(PartyContext& ctx, std::span<const Party> owners, unsigned bits);

/// Online input sharing: the owner sends m = x + lambda to whichever evaluators
/// lack it. `mine` holds this party's values in input order.
std::vector<MShare> share_inputs_semi(PartyContext& ctx, std::span<const Party> owners, const InputMasks& masks,
                                      std::span<const RingElement> mine);

/// Per-multiplication preprocessing.
struct MulPrep {
  MShare lx, ly;  // input masks
  MShare lz;      // output mask
  RingElement g1, g2;  // additive shares of lx*ly: P0 both, P1 g1, P2 g2
  // malicious only
  RingElement dx, dy, dz;    // evaluator pads
  RingElement chi1, chi2;    // P0 both, Pi its own

  RingElement own_gamma(Party p) const { return p == Party::P1 ? g1 : g2; }
};

/// Draw lambda_z and gamma_1 for n multiplications (no communication).
std::vector<MulPrep> mul_sample(PartyContext& ctx, unsigned bits, std::size_t n);

/// P0 -> P2: gamma_2 = lx*ly - gamma_1 for each prep (lx, ly must be set).
void mul_offline_semi(PartyContext& ctx, std::vector<MulPrep>& preps, std::string_view point = "mul.gamma");
/// P0's gamma_2 values; P2's receive side.
std::vector<RingElement> gamma2_values(std::span<const MulPrep> preps);

/// This evaluator's additive share of m_z for each multiplication.
std::vector<RingElement> mul_local_shares(PartyContext& ctx, std::span<const MShare> xs, std::span<const MShare> ys,
                                          std::span<const MulPrep> preps);

/// Evaluators exchange their m_z shares in one frame (one round).
std::vector<MShare> mul_online_semi(PartyContext& ctx, std::span<const MShare> xs, std::span<const MShare> ys,
                                    std::span<const MulPrep> preps, std::string_view point = "mul.mz");

/// P2->P1 lambda2, P1->P2 lambda1, P1->P0 m. Every party learns the values.
std::vector<RingElement> rec_semi(PartyContext& ctx, std::span<const MShare> shares);

/// `mine`: this party's input values in input order (constants included).
std::vector<RingElement> run_circuit_semi(PartyContext& ctx, const Circuit& c, std::span<const RingElement> mine);

}  // namespace tpc
