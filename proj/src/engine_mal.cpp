#include "tpc/engine_mal.hpp"

#include <cmath>
#include <numeric>

namespace tpc {

unsigned bucket_size(std::uint64_t nominal_n, unsigned s) {
  if (nominal_n < 2) throw ContractViolation("bucket_size: nominal batch must be at least 2");
  const double b = std::ceil(static_cast<double>(s) / std::log2(static_cast<double>(nominal_n)));
  return std::max(2U, static_cast<unsigned>(b));
}

unsigned TripleParams::B() const { return bucket ? *bucket : bucket_size(nominal_n, s); }

std::size_t TripleParams::C() const { return opened ? *opened : 3 * static_cast<std::size_t>(B()); }

std::vector<MShare> rand_shared(PartyContext& ctx, StreamLabel label, unsigned bits, std::size_t n) {
  const auto l1 = joint_sample(ctx, KeyId::k01, label, bits, n);
  const auto l2 = joint_sample(ctx, KeyId::k02, label, bits, n);
  const auto m = joint_sample(ctx, KeyId::k12, label, bits, n);
  std::vector<MShare> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(MShare::from_parts(ctx.me, m[i], l1[i], l2[i]));
  return out;
}

namespace {

Digest digest_of(std::span<const RingElement> v) {
  Hasher h;
  h.update(v);
  return h.finish();
}

void split(std::span<const MShare> shares, std::vector<RingElement>& m, std::vector<RingElement>& l1,
           std::vector<RingElement>& l2) {
  for (const auto& s : shares) {
    m.push_back(s.m);
    l1.push_back(s.lambda1);
    l2.push_back(s.lambda2);
  }
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

// ---- verified reconstruction ----

RecPending rec_mal_send(PartyContext& ctx, std::span<const MShare> shares, Recipients to, Category cat) {
  RecPending p{{shares.begin(), shares.end()}, to, shares.empty() ? 1U : shares[0].bits()};
  if (shares.empty()) return p;
  Endpoint::CategoryScope scope(ctx.ep, cat);
  std::vector<RingElement> m, l1, l2;
  split(shares, m, l1, l2);
  switch (ctx.me) {
    case Party::P0:
      if (to.p1) ctx.ep.send_elements(Party::P1, l2, "rec.share");
      if (to.p2) ctx.ep.send_elements(Party::P2, l1, "rec.share");
      break;
    case Party::P1:
      if (to.p2) ctx.ep.send_digest(Party::P2, digest_of(l1), "rec.digest");
      if (to.p0) ctx.ep.send_elements(Party::P0, m, "rec.share");
      break;
    case Party::P2:
      if (to.p1) ctx.ep.send_digest(Party::P1, digest_of(l2), "rec.digest");
      if (to.p0) ctx.ep.send_digest(Party::P0, digest_of(m), "rec.digest");
      break;
  }
  return p;
}

std::vector<RingElement> rec_mal_finish(PartyContext& ctx, const RecPending& p) {
  const std::size_t n = p.shares.size();
  if (n == 0 || !p.to.has(ctx.me)) return {};
  std::vector<RingElement> m, l1, l2;
  split(p.shares, m, l1, l2);
  std::vector<RingElement>* got = nullptr;
  Party holder = Party::P0, witness = Party::P0;
  switch (ctx.me) {
    case Party::P0: got = &m; holder = Party::P1; witness = Party::P2; break;
    case Party::P1: got = &l2; holder = Party::P0; witness = Party::P2; break;
    case Party::P2: got = &l1; holder = Party::P0; witness = Party::P1; break;
  }
  *got = ctx.ep.recv_elements(holder, p.bits, n);
  const Digest d = ctx.ep.recv_digest(witness);
  if (digest_of(*got) != d) throw ProtocolAbort("rec.verify");
  std::vector<RingElement> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(m[i] - l1[i] - l2[i]);
  return out;
}

std::vector<RingElement> rec_mal(PartyContext& ctx, std::span<const MShare> shares, Recipients to) {
  return rec_mal_finish(ctx, rec_mal_send(ctx, shares, to));
}

// ---- tau digests ----

void TauBuffer::add(Party me, const MShare& tau) {
  ++count_;
  switch (me) {
    case Party::P0:
      exp_p1_.update(tau.lambda2);
      exp_p2_.update(tau.lambda1);
      break;
    case Party::P1:
      to_p0_.update(tau.m - tau.lambda1);
      exp_p2_.update(tau.lambda1);
      break;
    case Party::P2: {
      const auto v = tau.m - tau.lambda2;
      to_p0_.update(v);
      to_p1_.update(v);
      break;
    }
  }
}

void TauBuffer::add(Party me, std::span<const MShare> taus) {
  for (const auto& t : taus) add(me, t);
}

void TauBuffer::send(PartyContext& ctx) {
  if (count_ == 0) return;
  if (ctx.is(Party::P1)) {
    ctx.ep.send_digest(Party::P0, to_p0_.finish(), "prc.digest");
  } else if (ctx.is(Party::P2)) {
    ctx.ep.send_digest(Party::P0, to_p0_.finish(), "prc.digest");
    ctx.ep.send_digest(Party::P1, to_p1_.finish(), "prc.digest");
  }
}

void TauBuffer::receive(PartyContext& ctx, const std::string& check) {
  if (count_ == 0) return;
  if (ctx.is(Party::P0)) {
    if (ctx.ep.recv_digest(Party::P1) != exp_p1_.finish()) throw ProtocolAbort(check);
    if (ctx.ep.recv_digest(Party::P2) != exp_p2_.finish()) throw ProtocolAbort(check);
  } else if (ctx.is(Party::P1)) {
    if (ctx.ep.recv_digest(Party::P2) != exp_p2_.finish()) throw ProtocolAbort(check);
  }
}

MShare sacrifice_tau(const Triple& x, const Triple& y, RingElement rho, RingElement sigma) {
  MShare t = x.c - y.c - sigma * y.a - rho * y.b;
  return add_constant(t, -(sigma * rho));
}

void prc_check(PartyContext& ctx, std::span<const Triple> checked, std::span<const Triple> sacrificed) {
  if (checked.size() != sacrificed.size()) throw ContractViolation("prc_check: size mismatch");
  std::vector<MShare> open;
  for (std::size_t i = 0; i < checked.size(); ++i) {
    open.push_back(checked[i].a - sacrificed[i].a);
    open.push_back(checked[i].b - sacrificed[i].b);
  }
  const auto v = rec_mal(ctx, open);
  TauBuffer tau;
  std::vector<MShare> taus;
  for (std::size_t i = 0; i < checked.size(); ++i)
    taus.push_back(sacrifice_tau(checked[i], sacrificed[i], v[2 * i], v[2 * i + 1]));
  if (ctx.auditor) ctx.auditor->submit(ctx.me, "prc.tau", taus);
  tau.add(ctx.me, taus);
  tau.send(ctx);
  tau.receive(ctx, "prc.tau");
}

// ---- triple generation ----

TripleGen::TripleGen(PartyContext& ctx, std::size_t n, unsigned bits, const TripleParams& params)
    : ctx_(ctx), n_(n), bits_(bits), B_(params.B()), C_(params.C()), M_(n ? B_ * n + C_ : 0),
      postponed_(params.postponed) {
  const auto inst = ctx.next_instance();
  const StreamLabel rl(dom::kRand, inst);
  d_ = rand_shared(ctx, rl, bits, M_);
  e_ = rand_shared(ctx, rl, bits, M_);
  prep_ = mul_sample(ctx, bits, M_);
  t_.resize(M_);
  for (std::size_t k = 0; k < M_; ++k) {
    prep_[k].lx = d_[k];
    prep_[k].ly = e_[k];
    t_[k] = {d_[k], e_[k], prep_[k].lz};
  }
  // The schedule seed comes from k12; P0 learns it in round 2, after its
  // gamma values are fixed.
  seed_ = joint_sample(ctx, KeyId::k12, StreamLabel(dom::kPerm, inst), 64, 2);
  if (is_evaluator(ctx.me)) schedule();
}

void TripleGen::schedule() {
  Key128 key{};
  for (int w = 0; w < 2; ++w) {
    const auto v = seed_[w].value();
    for (int i = 0; i < 8; ++i) key[8 * w + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  const Prf prf(key);
  std::uint64_t counter = 0;
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    for (;;) {
      std::uint64_t w = 0;
      prf.eval_words(0, counter++, std::span<std::uint64_t>(&w, 1));
      if (w <= limit) return w % bound;
    }
  };
  auto shuffled = [&](std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  };
  perm_ = shuffled(M_);
  std::vector<char> opened(M_, 0);
  for (std::size_t i = 0; i < C_ && i < M_; ++i) opened[perm_[i]] = 1;
  ring_idx_.clear();
  open_idx_.clear();
  for (std::size_t k = 0; k < M_; ++k) (opened[k] ? open_idx_ : ring_idx_).push_back(k);
  if (postponed_) {
    assign_ = shuffled(n_);
  } else {
    assign_.resize(n_);
    std::iota(assign_.begin(), assign_.end(), 0);
  }
}

void TripleGen::round1_send() {
  if (M_ == 0 || !ctx_.is(Party::P0)) return;
  const auto g2 = gamma2_values(prep_);
  for (std::size_t k = 0; k < M_; ++k) prep_[k].g2 = g2[k];
  ctx_.ep.send_elements(Party::P2, g2, "trip.gamma");
}

void TripleGen::round1_recv() {
  if (M_ == 0 || !ctx_.is(Party::P2)) return;
  const auto g2 = ctx_.ep.recv_elements(Party::P0, bits_, M_);
  for (std::size_t k = 0; k < M_; ++k) prep_[k].g2 = g2[k];
  ctx_.ep.reclassify_elements(false, Party::P0, open_idx_.size(), bits_, Category::Amortized);
}

void TripleGen::round2_send() {
  if (M_ == 0 || ctx_.is(Party::P0)) return;
  my_mf_ = mul_local_shares(ctx_, d_, e_, prep_);
  const Party other = other_evaluator(ctx_.me);
  ctx_.ep.send_elements(other, pick(my_mf_, ring_idx_), "trip.mz");
  if (!open_idx_.empty()) {
    Endpoint::CategoryScope amortized(ctx_.ep, Category::Amortized);
    ctx_.ep.send_elements(other, pick(my_mf_, open_idx_), "trip.mz");
  }
  if (ctx_.is(Party::P1)) {
    Endpoint::CategoryScope amortized(ctx_.ep, Category::Amortized);
    ctx_.ep.send_elements(Party::P0, seed_, "trip.seed");
  } else {
    ctx_.ep.send_digest(Party::P0, digest_of(seed_), "trip.seed");
  }
}

void TripleGen::round2_recv() {
  if (M_ == 0) return;
  if (ctx_.is(Party::P0)) {
    seed_ = ctx_.ep.recv_elements(Party::P1, 64, 2);
    if (ctx_.ep.recv_digest(Party::P2) != digest_of(seed_)) throw ProtocolAbort("trip.seed");
    schedule();
    ctx_.ep.reclassify_elements(true, Party::P2, open_idx_.size(), bits_, Category::Amortized);
    return;
  }
  const Party other = other_evaluator(ctx_.me);
  for (const auto* idx : {&ring_idx_, &open_idx_}) {
    if (idx->empty()) continue;
    const auto got = ctx_.ep.recv_elements(other, bits_, idx->size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      const auto k = (*idx)[i];
      t_[k].c.m = my_mf_[k] + got[i];
    }
  }
}

void TripleGen::round3_send() {
  if (M_ == 0) return;
  std::vector<MShare> open;
  for (auto k : open_idx_) {
    open.push_back(t_[k].a);
    open.push_back(t_[k].b);
    open.push_back(t_[k].c);
  }
  open_rec_ = rec_mal_send(ctx_, open, {}, Category::Amortized);
  std::vector<MShare> rs;
  for (std::size_t j = 0; j < n_; ++j) {
    const auto& head = t_[perm_[C_ + j * B_]];
    for (unsigned i = 1; i < B_; ++i) {
      const auto& other = t_[perm_[C_ + j * B_ + i]];
      rs.push_back(head.a - other.a);
      rs.push_back(head.b - other.b);
    }
  }
  bucket_rec_ = rec_mal_send(ctx_, rs);
}

void TripleGen::round3_finish() {
  if (M_ == 0) return;
  const auto opened = rec_mal_finish(ctx_, open_rec_);
  for (std::size_t i = 0; i + 2 < opened.size(); i += 3) {
    if (opened[i + 2] != opened[i] * opened[i + 1]) throw ProtocolAbort("trip.open");
  }
  const auto v = rec_mal_finish(ctx_, bucket_rec_);
  std::size_t pos = 0;
  outputs_.clear();
  for (std::size_t j = 0; j < n_; ++j) {
    const auto& head = t_[perm_[C_ + j * B_]];
    for (unsigned i = 1; i < B_; ++i) {
      const auto& other = t_[perm_[C_ + j * B_ + i]];
      tau_.add(ctx_.me, sacrifice_tau(head, other, v[pos], v[pos + 1]));
      pos += 2;
    }
    outputs_.push_back(head);
  }
}

void TripleGen::round4_send() { tau_.send(ctx_); }

void TripleGen::round4_finish() { tau_.receive(ctx_, "trip.bucket"); }

const Triple& TripleGen::output(std::size_t k) const { return outputs_.at(assign_.at(k)); }

std::vector<Triple> gen_triples(PartyContext& ctx, std::size_t n, unsigned bits, const TripleParams& params) {
  TripleGen g(ctx, n, bits, params);
  g.round1_send();
  g.round1_recv();
  g.round2_send();
  g.round2_recv();
  g.round3_send();
  g.round3_finish();
  g.round4_send();
  g.round4_finish();
  std::vector<Triple> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(g.output(k));
  return out;
}

// ---- deferred verification ----

void MalVerifier::open(std::span<const MShare> xs, std::span<const MShare> ys, std::span<const MulPrep> preps) {
  if (xs.size() != ys.size() || xs.size() != preps.size()) throw ContractViolation("verifier: size mismatch");
  ++units_;
  if (ctx_.is(Party::P0)) {
    open_units_.emplace_back(preps.begin(), preps.end());
    return;
  }
  RingElement v = RingElement::zero(preps.empty() ? 1 : preps[0].lz.bits());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto sx = xs[j].m + preps[j].dx, sy = ys[j].m + preps[j].dy;
    if (ctx_.is(Party::P1)) {
      pending_mstar_.push_back(sx);
      pending_mstar_.push_back(sy);
    } else {
      mstar_.update(sx);
      mstar_.update(sy);
    }
    v = v - xs[j].m * ys[j].m + preps[j].dz;
  }
  partial_.push_back(v);
}

void MalVerifier::close(const MShare& z) {
  if (ctx_.is(Party::P0)) return;
  if (closed_ >= partial_.size()) throw ContractViolation("verifier: close without open");
  check_.update(z.m + partial_[closed_++]);
}

void MalVerifier::add(std::span<const MShare> xs, std::span<const MShare> ys, const MShare& z,
                      std::span<const MulPrep> preps) {
  open(xs, ys, preps);
  close(z);
}

void MalVerifier::add(const MShare& x, const MShare& y, const MShare& z, const MulPrep& prep) {
  add({&x, 1}, {&y, 1}, z, {&prep, 1});
}

void MalVerifier::send_mstar() {
  if (ctx_.is(Party::P1)) {
    if (!pending_mstar_.empty()) ctx_.ep.send_elements(Party::P0, pending_mstar_, "mul.mstar");
    pending_mstar_.clear();
  } else if (ctx_.is(Party::P0)) {
    std::size_t count = 0;
    for (const auto& u : open_units_) count += u.size();
    if (count > 0) batches_.push_back({std::move(open_units_)});
    open_units_.clear();
  }
}

void MalVerifier::recv_mstar() {
  if (!ctx_.is(Party::P0)) return;
  for (const auto& b : batches_) {
    std::size_t count = 0;
    for (const auto& u : b.units) count += 2 * u.size();
    unsigned bits = 1;
    for (const auto& u : b.units) {
      if (!u.empty()) bits = u.front().lz.bits();
    }
    const auto got = ctx_.ep.recv_elements(Party::P1, bits, count);
    mstar_.update(got);
    std::size_t pos = 0;
    for (const auto& u : b.units) {
      RingElement v = RingElement::zero(bits);
      for (const auto& p : u) {
        const auto sx = got[pos], sy = got[pos + 1];
        pos += 2;
        const auto lx = p.lx.lambda1 + p.lx.lambda2, ly = p.ly.lambda1 + p.ly.lambda2;
        const auto lz = p.lz.lambda1 + p.lz.lambda2;
        const auto gamma = p.g1 + p.g2, chi = p.chi1 + p.chi2;
        v += lz + gamma + gamma + chi - sx * ly - sy * lx;
      }
      check_.update(v);
    }
  }
  batches_.clear();
}

void MalVerifier::flush() {
  if (units_ == 0 && tau_.size() == 0) return;
  send_mstar();
  recv_mstar();
  switch (ctx_.me) {
    case Party::P1:
      tau_.send(ctx_);
      tau_.receive(ctx_, "prc.tau");
      if (ctx_.ep.recv_digest(Party::P0) != check_.finish()) throw ProtocolAbort("mul.verify");
      break;
    case Party::P2:
      ctx_.ep.send_digest(Party::P0, mstar_.finish(), "mul.mstar.digest");
      tau_.send(ctx_);
      if (ctx_.ep.recv_digest(Party::P0) != check_.finish()) throw ProtocolAbort("mul.verify");
      break;
    case Party::P0: {
      if (ctx_.ep.recv_digest(Party::P2) != mstar_.finish()) throw ProtocolAbort("mul.mstar");
      tau_.receive(ctx_, "prc.tau");
      const Digest down = check_.finish();
      ctx_.ep.send_digest(Party::P1, down, "mul.verify");
      ctx_.ep.send_digest(Party::P2, down, "mul.verify");
      break;
    }
  }
}

// ---- malicious preprocessing ----

MalOffline::MalOffline(PartyContext& ctx, unsigned bits, std::size_t n, const TripleParams& params)
    : ctx_(ctx), bits_(bits), preps_(mul_sample(ctx, bits, n)), gen_(ctx, n, bits, params) {
  const StreamLabel dl(dom::kDelta, ctx.next_instance());
  const auto dx = joint_sample(ctx, KeyId::k12, dl, bits, n);
  const auto dy = joint_sample(ctx, KeyId::k12, dl, bits, n);
  const auto dz = joint_sample(ctx, KeyId::k12, dl, bits, n);
  for (std::size_t i = 0; i < n; ++i) {
    preps_[i].dx = dx[i];
    preps_[i].dy = dy[i];
    preps_[i].dz = dz[i];
  }
}

void MalOffline::set_inputs(std::size_t i, const MShare& x_mask, const MShare& y_mask) {
  preps_.at(i).lx = x_mask;
  preps_.at(i).ly = y_mask;
}

Triple MalOffline::linked(std::size_t i) const {
  const auto& p = preps_[i];
  Triple t{p.lx, p.ly, MShare::zero(ctx_.me, bits_)};
  if (is_evaluator(ctx_.me)) {
    t.a.m = p.dx;
    t.b.m = p.dy;
    t.c.m = p.dz + p.dx * p.dy;
  }
  t.c = MShare{ctx_.me, t.c.m, ctx_.is(Party::P2) ? RingElement::zero(bits_) : p.chi1,
               ctx_.is(Party::P1) ? RingElement::zero(bits_) : p.chi2};
  return t;
}

void MalOffline::run(MalVerifier& verifier, const Hooks& hooks) {
  const std::size_t n = preps_.size();
  // round 1: gamma
  if (ctx_.is(Party::P0) && n > 0) {
    const auto g2 = gamma2_values(preps_);
    for (std::size_t i = 0; i < n; ++i) preps_[i].g2 = g2[i];
    ctx_.ep.send_elements(Party::P2, g2, "mul.gamma");
  }
  gen_.round1_send();
  if (hooks.round1_send) hooks.round1_send();
  if (ctx_.is(Party::P2) && n > 0) {
    const auto g2 = ctx_.ep.recv_elements(Party::P0, bits_, n);
    for (std::size_t i = 0; i < n; ++i) preps_[i].g2 = g2[i];
  }
  gen_.round1_recv();
  if (hooks.round1_recv) hooks.round1_recv();

  // round 2: chi
  if (is_evaluator(ctx_.me) && n > 0) {
    std::vector<RingElement> chi;
    for (auto& p : preps_) {
      RingElement c = p.dx * p.ly.own_lambda() + p.dy * p.lx.own_lambda() - p.own_gamma(ctx_.me);
      if (ctx_.is(Party::P1)) c += p.dz;
      (ctx_.is(Party::P1) ? p.chi1 : p.chi2) = c;
      chi.push_back(c);
    }
    ctx_.ep.send_elements(Party::P0, chi, "mul.chi");
  }
  gen_.round2_send();
  if (hooks.round2_send) hooks.round2_send();
  if (ctx_.is(Party::P0) && n > 0) {
    const auto c1 = ctx_.ep.recv_elements(Party::P1, bits_, n);
    const auto c2 = ctx_.ep.recv_elements(Party::P2, bits_, n);
    for (std::size_t i = 0; i < n; ++i) {
      preps_[i].chi1 = c1[i];
      preps_[i].chi2 = c2[i];
    }
  }
  gen_.round2_recv();
  if (hooks.round2_recv) hooks.round2_recv();

  // round 3: cut-and-choose openings, bucket sacrifices
  gen_.round3_send();
  if (hooks.round3_recv) hooks.round3_recv();
  gen_.round3_finish();

  // round 4: gate sacrifices; their digests ride on the online flush
  std::vector<MShare> open;
  std::vector<Triple> mine, theirs;
  for (std::size_t i = 0; i < n; ++i) {
    mine.push_back(linked(i));
    theirs.push_back(gen_.output(i));
    open.push_back(mine.back().a - theirs.back().a);
    open.push_back(mine.back().b - theirs.back().b);
  }
  const auto pending = rec_mal_send(ctx_, open);
  gen_.round4_send();
  const auto v = rec_mal_finish(ctx_, pending);
  gen_.round4_finish();
  for (std::size_t i = 0; i < n; ++i) verifier.tau().add(ctx_.me, sacrifice_tau(mine[i], theirs[i], v[2 * i], v[2 * i + 1]));
}

// ---- inputs ----

std::vector<MShare> share_inputs_mal(PartyContext& ctx, std::span<const Party> owners, const InputMasks& masks,
                                     std::span<const RingElement> mine) {
  auto out = share_inputs_semi(ctx, owners, masks, mine);
  if (!is_evaluator(ctx.me)) return out;
  Hasher h;
  bool any = false;
  for (std::size_t i = 0; i < owners.size(); ++i) {
    if (owners[i] == Party::P0) {
      h.update(out[i].m);
      any = true;
    }
  }
  if (any) {
    const Digest d = h.finish();
    const Party other = other_evaluator(ctx.me);
    ctx.ep.send_digest(other, d, "sh.digest");
    ctx.ep.expect_digest(other, d, "sh.verify");
  }
  return out;
}

// ---- fair reconstruction ----

namespace {

std::vector<std::uint8_t> element_payload(RingElement e) {
  const std::array<RingElement, 1> one{e};
  return pack_elements(one, e.bits());
}

std::vector<std::uint8_t> u64_payload(std::uint64_t v) {
  std::vector<std::uint8_t> out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

std::vector<std::uint8_t> abort_signal(std::uint64_t r, const Randomness256& rand) {
  std::vector<std::uint8_t> out{kSignalAbort};
  const auto b = u64_payload(r);
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), rand.begin(), rand.end());
  return out;
}

// A signal carrying a valid opening of `com`.
bool valid_abort(std::span<const std::uint8_t> sig, const Commitment& com) {
  if (sig.size() != 1 + 8 + 32 || sig[0] != kSignalAbort) return false;
  Opening o;
  o.payload.assign(sig.begin() + 1, sig.begin() + 9);
  std::copy(sig.begin() + 9, sig.end(), o.randomness.begin());
  return verify_open(com, o);
}

std::vector<std::uint8_t> signal_of(const Frame& f) {
  if (f.type == MsgType::Signal) return f.payload;
  return {kSignalContinue};
}

}  // namespace

FairPrep fair_prepare(PartyContext& ctx, std::span<const MShare> output_masks) {
  FairPrep p;
  p.outputs.assign(output_masks.begin(), output_masks.end());
  p.instance = ctx.next_instance();
  const StreamLabel label(dom::kFair, p.instance);
  const std::size_t n = output_masks.size();
  if (ctx.keys.holds(KeyId::k01)) {
    for (std::size_t j = 0; j < n; ++j) {
      p.rand_lambda1.push_back(ctx.keys.sample_randomness(KeyId::k01, label));
      p.com_lambda1.push_back(commit(element_payload(output_masks[j].lambda1), p.rand_lambda1.back()));
    }
    p.r1 = ctx.keys.sample_u64(KeyId::k01, label);
    p.rand_r1 = ctx.keys.sample_randomness(KeyId::k01, label);
    p.com_r1 = commit(u64_payload(p.r1), p.rand_r1);
  }
  if (ctx.keys.holds(KeyId::k02)) {
    for (std::size_t j = 0; j < n; ++j) {
      p.rand_lambda2.push_back(ctx.keys.sample_randomness(KeyId::k02, label));
      p.com_lambda2.push_back(commit(element_payload(output_masks[j].lambda2), p.rand_lambda2.back()));
    }
    p.r2 = ctx.keys.sample_u64(KeyId::k02, label);
    p.rand_r2 = ctx.keys.sample_randomness(KeyId::k02, label);
    p.com_r2 = commit(u64_payload(p.r2), p.rand_r2);
  }
  return p;
}

void fair_offline_send(PartyContext& ctx, FairPrep& p) {
  if (p.outputs.empty()) return;
  auto send = [&](Party to, const std::vector<Commitment>& cs, const Commitment& r) {
    ctx.ep.send_commitments(to, cs, "fair.commit");
    const std::array<Commitment, 1> one{r};
    ctx.ep.send_commitments(to, one, "fair.commit", Category::Amortized);
  };
  switch (ctx.me) {
    case Party::P0:
      send(Party::P2, p.com_lambda1, p.com_r1);
      send(Party::P1, p.com_lambda2, p.com_r2);
      break;
    case Party::P1: send(Party::P2, p.com_lambda1, p.com_r1); break;
    case Party::P2: send(Party::P1, p.com_lambda2, p.com_r2); break;
  }
}

void fair_offline_recv(PartyContext& ctx, FairPrep& p) {
  if (p.outputs.empty() || ctx.is(Party::P0)) return;
  const std::size_t n = p.outputs.size();
  const Party other = other_evaluator(ctx.me);
  const auto a = ctx.ep.recv_commitments(Party::P0, n);
  const auto ra = ctx.ep.recv_commitments(Party::P0, 1);
  const auto b = ctx.ep.recv_commitments(other, n);
  const auto rb = ctx.ep.recv_commitments(other, 1);
  if (a != b || ra != rb) throw ProtocolAbort("fair.prep");
  if (ctx.is(Party::P2)) {
    p.com_lambda1 = a;
    p.com_r1 = ra[0];
  } else {
    p.com_lambda2 = a;
    p.com_r2 = ra[0];
  }
}

std::vector<RingElement> rec_fair(PartyContext& ctx, const FairPrep& prep, std::span<const MShare> shares) {
  const std::size_t n = shares.size();
  if (n == 0) return {};
  if (n != prep.outputs.size()) throw ContractViolation("rec_fair: share count differs from the prepared outputs");
  const unsigned bits = shares[0].bits();
  const StreamLabel label(dom::kFair, prep.instance);

  // round 1: evaluators commit to m
  std::vector<Commitment> com_m;
  std::vector<Randomness256> rand_m;
  if (is_evaluator(ctx.me)) {
    for (const auto& s : shares) {
      rand_m.push_back(ctx.keys.sample_randomness(KeyId::k12, label));
      com_m.push_back(commit(element_payload(s.m), rand_m.back()));
    }
    ctx.ep.send_commitments(Party::P0, com_m, "fair.commit");
  } else {
    bool ok = true;
    std::array<std::vector<Commitment>, 2> got;
    for (int e = 0; e < 2; ++e) {
      const Frame f = ctx.ep.recv_frame(e == 0 ? Party::P1 : Party::P2);
      if (f.type != MsgType::Commitments) {
        ok = false;
        continue;
      }
      try {
        got[e] = parse_commitments(f, n);
      } catch (const FramingError&) {
        ok = false;
      }
    }
    ok = ok && got[0] == got[1];
    com_m = got[0];
    // round 2: continue, or abort with the proof of origin
    const auto to_p1 = abort_signal(prep.r2, prep.rand_r2);
    const auto to_p2 = abort_signal(prep.r1, prep.rand_r1);
    const std::array<std::uint8_t, 1> cont{kSignalContinue};
    if (ok) {
      ctx.ep.send_signal(Party::P1, cont, "fair.signal", to_p1);
      ctx.ep.send_signal(Party::P2, cont, "fair.signal", to_p2);
    } else {
      ctx.ep.send_signal(Party::P1, to_p1, "fair.signal");
      ctx.ep.send_signal(Party::P2, to_p2, "fair.signal");
      throw ProtocolAbort("fair.commit");
    }
  }

  if (is_evaluator(ctx.me)) {
    const Party other = other_evaluator(ctx.me);
    // P0's abort is genuine if it opens the value P0 shares with the other evaluator;
    // a forwarded abort is genuine if it opens the value this party shares with P0.
    const Commitment& from_p0 = ctx.is(Party::P1) ? prep.com_r2 : prep.com_r1;
    const Commitment& forwarded = ctx.is(Party::P1) ? prep.com_r1 : prep.com_r2;
    const auto sig = signal_of(ctx.ep.recv_frame(Party::P0));
    // round 3: forward what P0 said
    ctx.ep.send_signal(other, sig, "fair.forward");
    const auto fwd = signal_of(ctx.ep.recv_frame(other));
    if (valid_abort(sig, from_p0) || valid_abort(fwd, forwarded)) throw ProtocolAbort("fair.abort");
  }

  // round 4: openings
  std::vector<RingElement> m, l1, l2;
  split(shares, m, l1, l2);
  auto openings = [&](auto value_of, const std::vector<Randomness256>& rand) {
    std::vector<Opening> os;
    for (std::size_t j = 0; j < n; ++j) os.push_back({element_payload(value_of(j)), rand[j]});
    return os;
  };
  switch (ctx.me) {
    case Party::P0:
      ctx.ep.send_openings(Party::P1, openings([&](std::size_t j) { return l2[j]; }, prep.rand_lambda2), "fair.open");
      ctx.ep.send_openings(Party::P2, openings([&](std::size_t j) { return l1[j]; }, prep.rand_lambda1), "fair.open");
      break;
    case Party::P1:
      ctx.ep.send_openings(Party::P2, openings([&](std::size_t j) { return l1[j]; }, prep.rand_lambda1), "fair.open");
      ctx.ep.send_openings(Party::P0, openings([&](std::size_t j) { return m[j]; }, rand_m), "fair.open");
      break;
    case Party::P2:
      ctx.ep.send_openings(Party::P1, openings([&](std::size_t j) { return l2[j]; }, prep.rand_lambda2), "fair.open");
      ctx.ep.send_openings(Party::P0, openings([&](std::size_t j) { return m[j]; }, rand_m), "fair.open");
      break;
  }
  std::array<Party, 2> senders{};
  const std::vector<Commitment>* agreed = nullptr;
  std::vector<RingElement>* target = nullptr;
  switch (ctx.me) {
    case Party::P0: senders = {Party::P1, Party::P2}; agreed = &com_m; target = &m; break;
    case Party::P1: senders = {Party::P0, Party::P2}; agreed = &prep.com_lambda2; target = &l2; break;
    case Party::P2: senders = {Party::P0, Party::P1}; agreed = &prep.com_lambda1; target = &l1; break;
  }
  std::array<std::vector<Opening>, 2> got;
  for (int s = 0; s < 2; ++s) {
    const Frame f = ctx.ep.recv_frame(senders[s]);
    if (f.type != MsgType::Openings) continue;
    try {
      got[s] = parse_openings(f, n);
    } catch (const FramingError&) {
      got[s].clear();
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    bool found = false;
    for (int s = 0; s < 2 && !found; ++s) {
      if (got[s].size() != n) continue;
      const auto& o = got[s][j];
      if (o.payload.size() != element_bytes(bits) || !verify_open((*agreed)[j], o)) continue;
      (*target)[j] = unpack_elements(o.payload, bits, 1)[0];
      found = true;
    }
    if (!found) throw ProtocolAbort("fair.open");
  }
  std::vector<RingElement> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(m[j] - l1[j] - l2[j]);
  return out;
}

// ---- circuits ----

std::vector<RingElement> run_circuit_mal(PartyContext& ctx, const Circuit& c, std::span<const RingElement> mine,
                                         const MalOptions& opts) {
  const unsigned bits = c.bits();
  std::vector<Party> owners;
  for (const auto& in : c.inputs()) owners.push_back(in.owner);

  ctx.enter(Phase::Offline);
  const auto masks = sample_input_masks(ctx, owners, bits);
  std::vector<MShare> w(c.num_wires(), MShare::zero(ctx.me, bits));
  for (std::size_t i = 0; i < owners.size(); ++i) w[c.inputs()[i].wire] = masks.views[i];
  MalOffline off(ctx, bits, c.num_mul(), opts.triples);
  std::vector<std::size_t> mul_index(c.gates().size(), 0);
  std::size_t k = 0;
  for (std::size_t gi = 0; gi < c.gates().size(); ++gi) {
    const auto& g = c.gates()[gi];
    if (g.op == GateOp::Add) {
      w[g.out] = w[g.left] + w[g.right];
    } else {
      off.set_inputs(k, w[g.left], w[g.right]);
      w[g.out] = off.lz(k);
      mul_index[gi] = k++;
    }
  }
  MalVerifier ver(ctx);
  FairPrep fair;
  MalOffline::Hooks hooks;
  if (opts.fair) {
    std::vector<MShare> out_masks;
    for (auto o : c.outputs()) out_masks.push_back(w[o]);
    fair = fair_prepare(ctx, out_masks);
    hooks.round1_send = [&] { fair_offline_send(ctx, fair); };
    hooks.round1_recv = [&] { fair_offline_recv(ctx, fair); };
  }
  off.run(ver, hooks);

  ctx.enter(Phase::Online);
  const auto shared = share_inputs_mal(ctx, owners, masks, mine);
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
        ps.push_back(off.prep(mul_index[gi]));
      }
      const auto zs = mul_online_semi(ctx, xs, ys, ps);
      for (std::size_t j = 0; j < muls.size(); ++j) {
        w[c.gates()[muls[j]].out] = zs[j];
        ver.add(xs[j], ys[j], zs[j], ps[j]);
      }
    }
    for (auto gi : c.add_by_level()[level]) {
      const auto& g = c.gates()[gi];
      w[g.out] = w[g.left] + w[g.right];
    }
  }
  ver.flush();
  ctx.ep.drain_expectations();
  if (ctx.auditor) ctx.auditor->submit(ctx.me, "wires", w);
  std::vector<MShare> outs;
  for (auto o : c.outputs()) outs.push_back(w[o]);
  if (opts.fair) return rec_fair(ctx, fair, outs);
  return rec_mal(ctx, outs);
}

}  // namespace tpc
