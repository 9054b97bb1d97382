#include "tpc/mlpred.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace tpc {

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::LinReg: return "linreg";
    case ModelKind::SvmR: return "svmr";
    case ModelKind::LogR: return "logr";
    case ModelKind::SvmC: return "svmc";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::LinReg, ModelKind::SvmR, ModelKind::LogR, ModelKind::SvmC}) {
    if (s == model_kind_name(k)) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(s) + "' (linreg, svmr, logr, svmc)");
}

bool is_classifier(ModelKind k) { return k == ModelKind::LogR || k == ModelKind::SvmC; }

const char* mode_name(Mode m) { return m == Mode::Semi ? "semi" : "mal"; }

std::vector<double> svm_aggregate(std::span<const double> alpha, std::span<const double> y,
                                  const std::vector<std::vector<double>>& x) {
  if (alpha.size() != y.size() || alpha.size() != x.size())
    throw ContractViolation("svm_aggregate: alpha, y and x differ in length");
  if (x.empty()) throw ContractViolation("svm_aggregate: no support vectors");
  std::vector<double> w(x[0].size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j].size() != w.size()) throw ContractViolation("svm_aggregate: ragged support vectors");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += alpha[j] * y[j] * x[j][i];
  }
  return w;
}

double effective_bias(const Model& m) {
  if (m.kind != ModelKind::LogR) return m.b;
  if (!(m.threshold > 0 && m.threshold < 1)) throw ConfigError("logr threshold must lie in (0, 1)");
  return m.b - std::log(m.threshold / (1 - m.threshold));
}

// ---- files ----

namespace {

struct Tokens {
  std::vector<std::pair<std::string, std::size_t>> items;
  std::size_t pos = 0;

  explicit Tokens(std::string_view text) {
    std::size_t line = 1;
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) items.emplace_back(std::move(cur), line);
      cur.clear();
    };
    bool comment = false;
    for (char c : text) {
      if (c == '\n') {
        flush();
        comment = false;
        ++line;
      } else if (comment) {
        continue;
      } else if (c == '#') {
        flush();
        comment = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        flush();
      } else {
        cur.push_back(c);
      }
    }
    flush();
  }

  bool done() const { return pos >= items.size(); }
  std::size_t line() const { return done() ? (items.empty() ? 1 : items.back().second) : items[pos].second; }
  const std::string& peek() const {
    if (done()) throw ParseError(line(), "unexpected end of input");
    return items[pos].first;
  }
  std::string word() {
    const auto w = peek();
    ++pos;
    return w;
  }
  double number() {
    const auto ln = line();
    const auto w = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used != w.size() || !std::isfinite(v)) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw ParseError(ln, "expected a number, got '" + w + "'");
    }
  }
  std::size_t count() {
    const auto ln = line();
    const double v = number();
    if (v < 1 || v != std::floor(v) || v > 1e8) throw ParseError(ln, "expected a positive count");
    return static_cast<std::size_t>(v);
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Model parse_model(std::string_view text) {
  Tokens t(text);
  Model m;
  const auto kline = t.line();
  try {
    m.kind = parse_model_kind(t.word());
  } catch (const ConfigError& e) {
    throw ParseError(kline, e.what());
  }
  const std::size_t d = t.count();
  const bool svm = m.kind == ModelKind::SvmR || m.kind == ModelKind::SvmC;
  if (svm && !t.done() && t.line() == kline) {
    const std::size_t k = t.count();
    std::vector<double> alpha, y;
    std::vector<std::vector<double>> x;
    for (std::size_t j = 0; j < k; ++j) {
      alpha.push_back(t.number());
      y.push_back(t.number());
      x.emplace_back();
      for (std::size_t i = 0; i < d; ++i) x.back().push_back(t.number());
    }
    m.w = svm_aggregate(alpha, y, x);
  } else {
    for (std::size_t i = 0; i < d; ++i) m.w.push_back(t.number());
  }
  if (t.done() || t.peek() != "bias") throw ParseError(t.line(), "expected 'bias'");
  t.word();
  m.b = t.number();
  if (!t.done()) {
    if (t.peek() != "threshold") throw ParseError(t.line(), "expected 'threshold' or end of file");
    const auto ln = t.line();
    t.word();
    m.threshold = t.number();
    if (!(m.threshold > 0 && m.threshold < 1)) throw ParseError(ln, "threshold must lie in (0, 1)");
  }
  if (!t.done()) throw ParseError(t.line(), "trailing input");
  return m;
}

Model load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string write_model(const Model& m) {
  std::ostringstream out;
  out << std::setprecision(17) << model_kind_name(m.kind) << ' ' << m.d() << '\n';
  for (std::size_t i = 0; i < m.w.size(); ++i) out << m.w[i] << (i + 1 == m.w.size() || i % 8 == 7 ? '\n' : ' ');
  out << "bias " << m.b << '\n';
  if (m.kind == ModelKind::LogR) out << "threshold " << m.threshold << '\n';
  return out.str();
}

std::vector<double> parse_query(std::string_view text) {
  Tokens t(text);
  const std::size_t d = t.count();
  std::vector<double> z;
  for (std::size_t i = 0; i < d; ++i) z.push_back(t.number());
  if (!t.done()) throw ParseError(t.line(), "trailing input");
  return z;
}

std::vector<double> load_query(const std::filesystem::path& path) { return parse_query(read_file(path)); }

std::string write_query(std::span<const double> z) {
  std::ostringstream out;
  out << std::setprecision(17) << z.size() << '\n';
  for (std::size_t i = 0; i < z.size(); ++i) out << z[i] << (i + 1 == z.size() || i % 8 == 7 ? '\n' : ' ');
  return out.str();
}

// ---- plaintext pipeline ----

RingElement fixed_score(const Model& m, std::span<const double> z) {
  if (z.size() != m.d()) throw ContractViolation("query length differs from the model");
  RingElement s = fx_encode(effective_bias(m), kProductFracBits);
  for (std::size_t i = 0; i < z.size(); ++i) s += fx_encode(m.w[i]) * fx_encode(z[i]);
  return s;
}

double plain_score(const Model& m, std::span<const double> z) {
  if (z.size() != m.d()) throw ContractViolation("query length differs from the model");
  double s = effective_bias(m);
  for (std::size_t i = 0; i < z.size(); ++i) s += m.w[i] * z[i];
  return s;
}

double plain_predict(const Model& m, std::span<const double> z) {
  const auto s = fixed_score(m, z);
  if (is_classifier(m.kind)) return 1 - msb(s);
  return fx_decode(s, kProductFracBits);
}

double decode_prediction(ModelKind kind, RingElement opened) {
  if (is_classifier(kind)) return static_cast<double>(opened.value());
  return fx_decode(opened, kProductFracBits);
}

std::array<PredictInputs, 3> stage_prediction(const Model& m, std::span<const double> z, const Seed128& seed) {
  if (z.size() != m.d() || m.d() == 0) throw ContractViolation("stage: query length differs from the model");
  Dealer dealer(seed);
  std::vector<RingElement> we, ze;
  for (double v : m.w) we.push_back(fx_encode(v));
  for (double v : z) ze.push_back(fx_encode(v));
  const auto ws = dealer.share_vector(we);
  const auto zs = dealer.share_vector(ze);
  const auto bs = dealer.share(fx_encode(effective_bias(m), kProductFracBits));
  std::array<PredictInputs, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = {ws[i], zs[i], bs[i]};
  return out;
}

MShare mask_of(const MShare& s) {
  MShare out = s;
  out.m = RingElement::zero(s.bits());
  return out;
}

// ---- dot product ----

DotSemi::DotSemi(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q)
    : ctx_(ctx), d_(p.size()) {
  if (p.size() != q.size() || p.empty()) throw ContractViolation("dot: vectors must have equal, nonzero length");
  const unsigned bits = p[0].bits();
  const StreamLabel label(dom::kDot, ctx.next_instance());
  const auto l1 = joint_sample(ctx, KeyId::k01, label, bits, 1)[0];
  const auto l2 = joint_sample(ctx, KeyId::k02, label, bits, 1)[0];
  g1_ = joint_sample(ctx, KeyId::k01, label, bits, 1)[0];
  g2_ = RingElement::zero(bits);
  lu_ = MShare::from_parts(ctx.me, RingElement::zero(bits), l1, l2);
  lpq_ = RingElement::zero(bits);
  if (ctx.is(Party::P0)) {
    for (std::size_t j = 0; j < d_; ++j) lpq_ += (p[j].lambda1 + p[j].lambda2) * (q[j].lambda1 + q[j].lambda2);
  }
}

void DotSemi::offline() {
  const std::array<RingElement, 1> g2{lpq_ - g1_};
  if (ctx_.is(Party::P0)) {
    g2_ = g2[0];
    ctx_.ep.send_elements(Party::P2, g2, "dot.gamma");
  } else if (ctx_.is(Party::P2)) {
    g2_ = ctx_.ep.recv_elements(Party::P0, lu_.bits(), 1)[0];
  }
}

MShare DotSemi::online(std::span<const MShare> p, std::span<const MShare> q) {
  if (p.size() != d_ || q.size() != d_) throw ContractViolation("dot: length changed since preprocessing");
  MShare u = lu_;
  if (ctx_.is(Party::P0)) return u;
  RingElement s = lu_.own_lambda() + (ctx_.is(Party::P1) ? g1_ : g2_);
  for (std::size_t j = 0; j < d_; ++j) {
    s -= p[j].m * q[j].own_lambda() + q[j].m * p[j].own_lambda();
    if (ctx_.is(Party::P2)) s += p[j].m * q[j].m;
  }
  const Party other = other_evaluator(ctx_.me);
  const std::array<RingElement, 1> mine{s};
  ctx_.ep.send_elements(other, mine, "dot.mu");
  u.m = s + ctx_.ep.recv_elements(other, s.bits(), 1)[0];
  return u;
}

DotMal::DotMal(MalOffline& off, std::size_t first, std::span<const MShare> p, std::span<const MShare> q)
    : off_(off), first_(first), d_(p.size()) {
  if (p.size() != q.size() || p.empty()) throw ContractViolation("dot: vectors must have equal, nonzero length");
  if (first + d_ > off.size()) throw ContractViolation("dot: not enough multiplications reserved");
  for (std::size_t j = 0; j < d_; ++j) off.set_inputs(first + j, mask_of(p[j]), mask_of(q[j]));
}

MShare DotMal::lu() const {
  MShare u = off_.lz(first_);
  for (std::size_t j = 1; j < d_; ++j) u = u + off_.lz(first_ + j);
  return u;
}

MShare DotMal::online(PartyContext& ctx, MalVerifier& ver, std::span<const MShare> p, std::span<const MShare> q) {
  if (p.size() != d_ || q.size() != d_) throw ContractViolation("dot: length changed since preprocessing");
  std::vector<MulPrep> preps;
  for (std::size_t j = 0; j < d_; ++j) preps.push_back(off_.prep(first_ + j));
  MShare u = lu();
  RingElement s = RingElement::zero(u.bits());
  if (is_evaluator(ctx.me)) {
    for (auto v : mul_local_shares(ctx, p, q, preps)) s += v;
    const std::array<RingElement, 1> mine{s};
    ctx.ep.send_elements(other_evaluator(ctx.me), mine, "mul.mz");
  }
  ver.open(p, q, preps);
  ver.send_mstar();
  ver.recv_mstar();
  if (is_evaluator(ctx.me)) u.m = s + ctx.ep.recv_elements(other_evaluator(ctx.me), s.bits(), 1)[0];
  ver.close(u);
  return u;
}

// ---- MSB extraction ----

std::uint64_t bitext_r_bound(unsigned bits, unsigned ka) {
  if (bits < 4 || ka + 3 > bits) throw ContractViolation("bitext: no room for r with this magnitude bound");
  return std::uint64_t{1} << (bits - 2 - ka);
}

std::uint64_t bitext_factor_bound(unsigned bits, unsigned ka) {
  if (bits < 4 || ka + 4 > bits) throw ContractViolation("bitext: no room for r1, r2 with this magnitude bound");
  return std::uint64_t{1} << ((bits - 2 - ka) / 2);
}

namespace {

RingElement sample_factor(PartyContext& ctx, KeyId k, StreamLabel label, std::uint64_t bound, unsigned bits,
                          std::optional<std::uint64_t> forced) {
  if (!ctx.keys.holds(k)) return RingElement::zero(bits);
  const std::uint64_t drawn = 1 + ctx.keys.sample_below(k, label, bound - 1);
  if (forced) {
    if (*forced == 0 || *forced >= bound) throw ContractViolation("bitext: forced factor outside [1, bound)");
    return {*forced, bits};
  }
  return {drawn, bits};
}

}  // namespace

BitExtSemi::BitExtSemi(PartyContext& ctx, unsigned bits, const BitExtOptions& opts) : ctx_(ctx), bits_(bits) {
  const StreamLabel label(dom::kBitExt, ctx.next_instance());
  r_ = sample_factor(ctx, KeyId::k12, label, bitext_r_bound(bits, opts.ka), bits, opts.force_r);
  rp_ = joint_sample(ctx, KeyId::k12, label, bits, 1)[0];
  const std::array<Party, 1> owner{Party::P0};
  q_mask_ = sample_input_masks(ctx, owner, 1);
}

MShare BitExtSemi::online(const MShare& a) {
  if (a.bits() != bits_) throw ContractViolation("bitext: width mismatch");
  RingElement q = RingElement::zero(1);
  if (ctx_.is(Party::P1)) {
    const std::array<RingElement, 1> s{r_ * (a.m - a.lambda1) + rp_};
    ctx_.ep.send_elements(Party::P0, s, "bitext.share");
  } else if (ctx_.is(Party::P2)) {
    const std::array<RingElement, 1> s{-(r_ * a.lambda2) - rp_};
    ctx_.ep.send_elements(Party::P0, s, "bitext.share");
  } else {
    const auto s1 = ctx_.ep.recv_elements(Party::P1, bits_, 1)[0];
    const auto s2 = ctx_.ep.recv_elements(Party::P2, bits_, 1)[0];
    q = RingElement(static_cast<std::uint64_t>(msb(s1 + s2)), 1);
  }
  const std::array<Party, 1> owner{Party::P0};
  std::vector<RingElement> mine;
  if (ctx_.is(Party::P0)) mine.push_back(q);
  // msb(a) = q xor msb(r), and r is positive.
  return share_inputs_semi(ctx_, owner, q_mask_, mine)[0];
}

BitExtMal::BitExtMal(PartyContext& ctx, MalOffline& off, std::size_t first, const MShare& a_mask,
                     const BitExtOptions& opts)
    : ctx_(ctx), off_(off), first_(first), bits_(a_mask.bits()) {
  if (first + 2 > off.size()) throw ContractViolation("bitext: not enough multiplications reserved");
  const StreamLabel label(dom::kBitExt, ctx.next_instance());
  const auto bound = bitext_factor_bound(bits_, opts.ka);
  const auto z = RingElement::zero(bits_);
  const auto r1 = sample_factor(ctx, KeyId::k12, label, bound, bits_, opts.force_r1);
  const auto r2 = sample_factor(ctx, KeyId::k02, label, bound, bits_, opts.force_r2);
  r1_ = MShare::from_parts(ctx.me, r1, z, z);
  r2_ = MShare::from_parts(ctx.me, z, z, -r2);
  const std::array<Party, 1> owner{Party::P1};
  q_mask_ = sample_input_masks(ctx, owner, 1);
  off.set_inputs(first, mask_of(r1_), mask_of(r2_));
  off.set_inputs(first + 1, off.lz(first), mask_of(a_mask));
  r_ = off.lz(first);
}

void BitExtMal::add_hooks(MalOffline::Hooks& hooks, MalVerifier& ver) {
  auto chain = [](std::function<void()> a, std::function<void()> b) -> std::function<void()> {
    if (!a) return b;
    return [a, b] {
      a();
      b();
    };
  };
  auto mine = std::make_shared<RingElement>(RingElement::zero(bits_));
  hooks.round2_send = chain(hooks.round2_send, [this, mine] {
    if (!is_evaluator(ctx_.me)) return;
    const std::array<MulPrep, 1> p{off_.prep(first_)};
    const std::array<MShare, 1> x{r1_}, y{r2_};
    *mine = mul_local_shares(ctx_, x, y, p)[0];
    const std::array<RingElement, 1> s{*mine};
    ctx_.ep.send_elements(other_evaluator(ctx_.me), s, "mul.mz");
  });
  hooks.round2_recv = chain(hooks.round2_recv, [this, mine, &ver] {
    r_ = off_.lz(first_);
    if (is_evaluator(ctx_.me)) r_.m = *mine + ctx_.ep.recv_elements(other_evaluator(ctx_.me), bits_, 1)[0];
    ver.add(r1_, r2_, r_, off_.prep(first_));
    ver.send_mstar();
  });
  hooks.round3_recv = chain(hooks.round3_recv, [&ver] { ver.recv_mstar(); });
}

MShare BitExtMal::online(MalVerifier& ver, const MShare& a) {
  if (a.bits() != bits_) throw ContractViolation("bitext: width mismatch");
  const std::array<MulPrep, 1> p{off_.prep(first_ + 1)};
  const std::array<MShare, 1> x{r_}, y{a};
  MShare ra = off_.lz(first_ + 1);
  RingElement mine = RingElement::zero(bits_);
  if (is_evaluator(ctx_.me)) {
    mine = mul_local_shares(ctx_, x, y, p)[0];
    const std::array<RingElement, 1> s{mine};
    ctx_.ep.send_elements(other_evaluator(ctx_.me), s, "mul.mz");
  }
  ver.open(x, y, p);
  ver.send_mstar();
  ver.recv_mstar();
  if (is_evaluator(ctx_.me)) ra.m = mine + ctx_.ep.recv_elements(other_evaluator(ctx_.me), bits_, 1)[0];
  ver.close(ra);

  const std::array<MShare, 1> open{ra};
  const auto v = rec_mal(ctx_, open, Recipients{true, true, false});

  MShare q = q_mask_.views[0];
  const auto full = q_mask_.full[0];
  switch (ctx_.me) {
    case Party::P0: {
      const RingElement mq = RingElement(static_cast<std::uint64_t>(msb(v[0])), 1) + q.lambda1 + q.lambda2;
      Hasher h;
      h.update(mq);
      ctx_.ep.send_digest(Party::P2, h.finish(), "bitext.digest");
      break;
    }
    case Party::P1: {
      q.m = RingElement(static_cast<std::uint64_t>(msb(v[0])), 1) + full;
      const std::array<RingElement, 1> s{q.m};
      ctx_.ep.send_elements(Party::P2, s, "bitext.q");
      break;
    }
    case Party::P2: {
      q.m = ctx_.ep.recv_elements(Party::P1, 1, 1)[0];
      Hasher h;
      h.update(q.m);
      if (ctx_.ep.recv_digest(Party::P0) != h.finish()) throw ProtocolAbort("bitext.verify");
      break;
    }
  }
  return q;
}

// ---- standalone runs ----

RingElement dot_run_semi(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q) {
  ctx.enter(Phase::Offline);
  DotSemi dot(ctx, p, q);
  dot.offline();
  ctx.enter(Phase::Online);
  const std::array<MShare, 1> u{dot.online(p, q)};
  ctx.enter(Phase::Output);
  return rec_semi(ctx, u)[0];
}

RingElement dot_run_mal(PartyContext& ctx, std::span<const MShare> p, std::span<const MShare> q,
                        const TripleParams& triples) {
  ctx.enter(Phase::Offline);
  MalOffline off(ctx, p.empty() ? 64 : p[0].bits(), p.size(), triples);
  DotMal dot(off, 0, p, q);
  MalVerifier ver(ctx);
  off.run(ver);
  ctx.enter(Phase::Online);
  const std::array<MShare, 1> u{dot.online(ctx, ver, p, q)};
  ctx.enter(Phase::Output);
  ver.flush();
  return rec_mal(ctx, u)[0];
}

RingElement bitext_run_semi(PartyContext& ctx, const MShare& a, const BitExtOptions& opts) {
  ctx.enter(Phase::Offline);
  BitExtSemi cmp(ctx, a.bits(), opts);
  ctx.enter(Phase::Online);
  const std::array<MShare, 1> bit{cmp.online(a)};
  ctx.enter(Phase::Output);
  return rec_semi(ctx, bit)[0];
}

RingElement bitext_run_mal(PartyContext& ctx, const MShare& a, const BitExtOptions& opts,
                           const TripleParams& triples) {
  ctx.enter(Phase::Offline);
  MalOffline off(ctx, a.bits(), 2, triples);
  BitExtMal cmp(ctx, off, 0, mask_of(a), opts);
  MalVerifier ver(ctx);
  MalOffline::Hooks hooks;
  cmp.add_hooks(hooks, ver);
  off.run(ver, hooks);
  ctx.enter(Phase::Online);
  const std::array<MShare, 1> bit{cmp.online(ver, a)};
  ctx.enter(Phase::Output);
  ver.flush();
  return rec_mal(ctx, bit)[0];
}

// ---- prediction ----

RingElement predict(PartyContext& ctx, ModelKind kind, const PredictInputs& in, const PredictOptions& opts) {
  if (in.w.size() != in.z.size() || in.w.empty()) throw ContractViolation("predict: model and query lengths differ");
  const bool cls = is_classifier(kind);
  const unsigned bits = in.b.bits();
  ctx.enter(Phase::Offline);
  if (opts.mode == Mode::Semi) {
    DotSemi dot(ctx, in.w, in.z);
    std::optional<BitExtSemi> cmp;
    if (cls) cmp.emplace(ctx, bits, opts.cmp);
    dot.offline();
    ctx.enter(Phase::Online);
    MShare out = dot.online(in.w, in.z) + in.b;
    if (cls) out = add_constant(cmp->online(out), RingElement::one(1));
    ctx.enter(Phase::Output);
    const std::array<MShare, 1> o{out};
    return rec_semi(ctx, o)[0];
  }
  const std::size_t d = in.w.size();
  MalOffline off(ctx, bits, d + (cls ? 2 : 0), opts.triples);
  DotMal dot(off, 0, in.w, in.z);
  MalVerifier ver(ctx);
  MalOffline::Hooks hooks;
  std::optional<BitExtMal> cmp;
  if (cls) {
    cmp.emplace(ctx, off, d, dot.lu() + mask_of(in.b), opts.cmp);
    cmp->add_hooks(hooks, ver);
  }
  off.run(ver, hooks);
  ctx.enter(Phase::Online);
  MShare out = dot.online(ctx, ver, in.w, in.z) + in.b;
  if (cls) out = add_constant(cmp->online(ver, out), RingElement::one(1));
  ctx.enter(Phase::Output);
  ver.flush();
  ctx.ep.drain_expectations();
  const std::array<MShare, 1> o{out};
  return rec_mal(ctx, o)[0];
}

}  // namespace tpc
