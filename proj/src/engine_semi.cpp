#include "tpc/engine_semi.hpp"

namespace tpc {

InputMasks sample_input_masks(PartyContext& ctx, std::span<const Party> owners, unsigned bits) {
  const auto inst = ctx.next_instance();
  InputMasks out;
  out.views.assign(owners.size(), MShare::zero(ctx.me, bits));
  out.full.assign(owners.size(), RingElement::zero(bits));
  for (Party owner : kAllParties) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < owners.size(); ++i) {
      if (owners[i] == owner) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const StreamLabel label(static_cast<std::uint16_t>(dom::kInput + index_of(owner)), inst);
    KeyId k1 = KeyId::k01, k2 = KeyId::k02;
    if (owner == Party::P1) k2 = KeyId::kAll;
    if (owner == Party::P2) k1 = KeyId::kAll;
    const auto l1 = joint_sample(ctx, k1, label, bits, idx.size());
    const auto l2 = joint_sample(ctx, k2, label, bits, idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto i = idx[j];
      out.views[i] = MShare::from_parts(ctx.me, RingElement::zero(bits), l1[j], l2[j]);
      if (owner == ctx.me) out.full[i] = l1[j] + l2[j];
    }
  }
  return out;
}

std::vector<MShare> share_inputs_semi(PartyContext& ctx, std::span<const Party> owners, const InputMasks& masks,
                                      std::span<const RingElement> mine) {
  const unsigned bits = masks.views.empty() ? 1 : masks.views[0].bits();
  std::vector<std::size_t> own;
  std::array<std::vector<std::size_t>, 3> by_owner;
  for (std::size_t i = 0; i < owners.size(); ++i) by_owner[index_of(owners[i])].push_back(i);
  own = by_owner[index_of(ctx.me)];
  if (mine.size() != own.size())
    throw ContractViolation(party_name(ctx.me) + " owns " + std::to_string(own.size()) + " inputs, got " +
                            std::to_string(mine.size()) + " values");
  std::vector<MShare> out = masks.views;
  std::vector<RingElement> ms;
  for (std::size_t j = 0; j < own.size(); ++j) {
    if (mine[j].bits() != bits) throw ContractViolation("input width mismatch");
    ms.push_back(mine[j] + masks.full[own[j]]);
    if (is_evaluator(ctx.me)) out[own[j]].m = ms.back();
  }
  if (!ms.empty()) {
    if (ctx.is(Party::P0)) {
      ctx.ep.send_elements(Party::P1, ms, "sh.m");
      ctx.ep.send_elements(Party::P2, ms, "sh.m");
    } else {
      ctx.ep.send_elements(other_evaluator(ctx.me), ms, "sh.m");
    }
  }
  if (is_evaluator(ctx.me)) {
    for (Party from : {Party::P0, other_evaluator(ctx.me)}) {
      const auto& idx = by_owner[index_of(from)];
      if (idx.empty()) continue;
      const auto got = ctx.ep.recv_elements(from, bits, idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]].m = got[j];
    }
  }
  return out;
}

std::vector<MulPrep> mul_sample(PartyContext& ctx, unsigned bits, std::size_t n) {
  const StreamLabel label(dom::kMul, ctx.next_instance());
  const auto lz1 = joint_sample(ctx, KeyId::k01, label, bits, n);
  const auto lz2 = joint_sample(ctx, KeyId::k02, label, bits, n);
  const auto g1 = joint_sample(ctx, KeyId::k01, label, bits, n);
  const auto z = RingElement::zero(bits);
  std::vector<MulPrep> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = out[i];
    p.lx = p.ly = MShare::zero(ctx.me, bits);
    p.lz = MShare::from_parts(ctx.me, z, lz1[i], lz2[i]);
    p.g1 = g1[i];
    p.g2 = p.dx = p.dy = p.dz = p.chi1 = p.chi2 = z;
  }
  return out;
}

std::vector<RingElement> gamma2_values(std::span<const MulPrep> preps) {
  std::vector<RingElement> out;
  out.reserve(preps.size());
  for (const auto& p : preps) {
    const auto lx = p.lx.lambda1 + p.lx.lambda2, ly = p.ly.lambda1 + p.ly.lambda2;
    out.push_back(lx * ly - p.g1);
  }
  return out;
}

void mul_offline_semi(PartyContext& ctx, std::vector<MulPrep>& preps, std::string_view point) {
  if (preps.empty()) return;
  const unsigned bits = preps[0].lz.bits();
  if (ctx.is(Party::P0)) {
    const auto g2 = gamma2_values(preps);
    for (std::size_t i = 0; i < preps.size(); ++i) preps[i].g2 = g2[i];
    ctx.ep.send_elements(Party::P2, g2, point);
  } else if (ctx.is(Party::P2)) {
    const auto g2 = ctx.ep.recv_elements(Party::P0, bits, preps.size());
    for (std::size_t i = 0; i < preps.size(); ++i) preps[i].g2 = g2[i];
  }
}

std::vector<RingElement> mul_local_shares(PartyContext& ctx, std::span<const MShare> xs, std::span<const MShare> ys,
                                          std::span<const MulPrep> preps) {
  if (xs.size() != ys.size() || xs.size() != preps.size()) throw ContractViolation("mul: batch size mismatch");
  std::vector<RingElement> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    const auto& y = ys[i];
    const auto& p = preps[i];
    RingElement s = p.lz.own_lambda() + p.own_gamma(ctx.me) - x.m * y.own_lambda() - y.m * x.own_lambda();
    if (ctx.is(Party::P2)) s += x.m * y.m;
    out.push_back(s);
  }
  return out;
}

std::vector<MShare> mul_online_semi(PartyContext& ctx, std::span<const MShare> xs, std::span<const MShare> ys,
                                    std::span<const MulPrep> preps, std::string_view point) {
  std::vector<MShare> out;
  out.reserve(preps.size());
  for (const auto& p : preps) out.push_back(p.lz);
  if (preps.empty() || ctx.is(Party::P0)) return out;
  const unsigned bits = preps[0].lz.bits();
  const auto mine = mul_local_shares(ctx, xs, ys, preps);
  const Party other = other_evaluator(ctx.me);
  ctx.ep.send_elements(other, mine, point);
  const auto theirs = ctx.ep.recv_elements(other, bits, mine.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].m = mine[i] + theirs[i];
  return out;
}

std::vector<RingElement> rec_semi(PartyContext& ctx, std::span<const MShare> shares) {
  if (shares.empty()) return {};
  const unsigned bits = shares[0].bits();
  const std::size_t n = shares.size();
  std::vector<RingElement> l1, l2, m;
  for (const auto& s : shares) {
    l1.push_back(s.lambda1);
    l2.push_back(s.lambda2);
    m.push_back(s.m);
  }
  switch (ctx.me) {
    case Party::P0: m = ctx.ep.recv_elements(Party::P1, bits, n); break;
    case Party::P1:
      ctx.ep.send_elements(Party::P2, l1, "rec.share");
      ctx.ep.send_elements(Party::P0, m, "rec.share");
      l2 = ctx.ep.recv_elements(Party::P2, bits, n);
      break;
    case Party::P2:
      ctx.ep.send_elements(Party::P1, l2, "rec.share");
      l1 = ctx.ep.recv_elements(Party::P1, bits, n);
      break;
  }
  std::vector<RingElement> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(m[i] - l1[i] - l2[i]);
  return out;
}

namespace {

std::vector<Party> input_owners(const Circuit& c) {
  std::vector<Party> owners;
  for (const auto& in : c.inputs()) owners.push_back(in.owner);
  return owners;
}

}  // namespace

std::vector<RingElement> run_circuit_semi(PartyContext& ctx, const Circuit& c, std::span<const RingElement> mine) {
  const unsigned bits = c.bits();
  const auto owners = input_owners(c);
  ctx.enter(Phase::Offline);
  const auto masks = sample_input_masks(ctx, owners, bits);
  std::vector<MShare> w(c.num_wires(), MShare::zero(ctx.me, bits));
  for (std::size_t i = 0; i < owners.size(); ++i) w[c.inputs()[i].wire] = masks.views[i];
  auto preps = mul_sample(ctx, bits, c.num_mul());
  std::vector<std::size_t> mul_index(c.gates().size(), 0);
  std::size_t k = 0;
  for (std::size_t gi = 0; gi < c.gates().size(); ++gi) {
    const auto& g = c.gates()[gi];
    if (g.op == GateOp::Add) {
      w[g.out] = w[g.left] + w[g.right];
    } else {
      preps[k].lx = w[g.left];
      preps[k].ly = w[g.right];
      w[g.out] = preps[k].lz;
      mul_index[gi] = k++;
    }
  }
  mul_offline_semi(ctx, preps);

  ctx.enter(Phase::Online);
  const auto shared = share_inputs_semi(ctx, owners, masks, mine);
  for (std::size_t i = 0; i < owners.size(); ++i) w[c.inputs()[i].wire] = shared[i];
  for (unsigned level = 0; level <= c.depth(); ++level) {
    const auto& muls = c.mul_by_level()[level];
    if (!muls.empty()) {
      std::vector<MShare> xs, ys;
      std::vector<MulPrep> ps;
      for (auto gi : muls) {
        const auto& g = c.gates()[gi];
        xs.push_back(w[g.left]);
        ys.push_back(w[g.right]);
        ps.push_back(preps[mul_index[gi]]);
      }
      const auto zs = mul_online_semi(ctx, xs, ys, ps);
      for (std::size_t j = 0; j < muls.size(); ++j) w[c.gates()[muls[j]].out] = zs[j];
    }
    for (auto gi : c.add_by_level()[level]) {
      const auto& g = c.gates()[gi];
      w[g.out] = w[g.left] + w[g.right];
    }
  }
  if (ctx.auditor) ctx.auditor->submit(ctx.me, "wires", w);
  std::vector<MShare> outs;
  for (auto o : c.outputs()) outs.push_back(w[o]);
  return rec_semi(ctx, outs);
}

}  // namespace tpc
