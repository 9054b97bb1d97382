#include "tpc/acceptance.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "tpc/harness.hpp"

namespace tpc {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

RunOptions seeded(std::uint64_t seed, const FaultScript* faults = nullptr, ShareAuditor* auditor = nullptr) {
  RunOptions o;
  o.seed = seed_from_u64(seed);
  o.faults = faults;
  o.auditor = auditor;
  o.timeout = std::chrono::seconds(20);
  return o;
}

bool all_output(const RunResult& r, const std::vector<RingElement>& expected) {
  return std::all_of(r.parties.begin(), r.parties.end(),
                     [&](const PartyOutcome& p) { return p.ok() && p.outputs == expected; });
}

std::string first_problem(const RunResult& r) {
  for (const auto& p : r.parties) {
    if (p.aborted) return party_name(p.me) + " aborted at " + p.abort_check;
    if (!p.error.empty()) return party_name(p.me) + ": " + p.error;
  }
  return "wrong output";
}

bool is_honest(const FaultScript& f, Party p) {
  const auto bad = f.corrupted();
  return std::find(bad.begin(), bad.end(), p) == bad.end();
}

std::uint64_t nonzero_delta(std::mt19937_64& rng) { return rng() | 1; }

std::uint64_t sent_elements(const RunResult& r, std::initializer_list<Phase> phases, Category cat) {
  std::uint64_t n = 0;
  for (auto ph : phases) n += r.sent(ph, cat).elements;
  return n;
}

// ---- AES against OpenSSL ----

std::vector<std::uint8_t> aes_reference(const std::vector<std::uint8_t>& key, const std::vector<std::uint8_t>& pt) {
  std::vector<std::uint8_t> out(32);
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  int len = 0;
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  EVP_EncryptUpdate(ctx, out.data(), &len, pt.data(), static_cast<int>(pt.size()));
  EVP_CIPHER_CTX_free(ctx);
  out.resize(16);
  return out;
}

const Circuit& aes_circuit() {
  static const Circuit c = aes128_circuit();
  return c;
}

struct AesOutcome {
  bool ok = false;
  RunResult run;
  std::string problem;
};

AesOutcome run_aes(CircuitMode mode, const TripleParams& triples, std::uint64_t seed) {
  const auto& c = aes_circuit();
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> key(16), pt(16);
  for (auto& b : key) b = static_cast<std::uint8_t>(rng());
  for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
  auto user = bytes_to_bits(key);
  const auto ptb = bytes_to_bits(pt);
  user.insert(user.end(), ptb.begin(), ptb.end());
  const auto expected = bytes_to_bits(aes_reference(key, pt));
  AesOutcome out;
  out.run = run_mem(circuit_fn(c, c.with_constants(user), mode, triples), seeded(seed));
  out.ok = all_output(out.run, expected);
  if (!out.ok) out.problem = "AES: " + first_problem(out.run);
  return out;
}

// ---- 1, 2: oracle equivalence ----

CriterionResult oracle_equivalence(int id, CircuitMode mode, const TripleParams& triples, double budget,
                                   const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  std::size_t good = 0, oracle_disagree = 0;
  std::string problem;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Circuit c = random_circuit(seed, {32, 200, 8});
    const auto in = seeded_inputs(c, seed);
    const auto expected = eval_plain(c, in);
    if (eval_recursive(c, in) != expected) ++oracle_disagree;
    const auto run = run_mem(circuit_fn(c, in, mode, triples), seeded(seed));
    if (all_output(run, expected)) ++good;
    else if (problem.empty()) problem = "seed " + std::to_string(seed) + ": " + first_problem(run);
    if (opts.log && seed % 25 == 0) opts.log("  " + std::to_string(seed) + "/100 circuits");
  }
  const auto aes = run_aes(mode, triples, 2024);
  if (!aes.ok && problem.empty()) problem = aes.problem;
  r.seconds = since(t0);
  r.pass = good == 100 && oracle_disagree == 0 && aes.ok && r.seconds < budget;
  std::ostringstream d;
  d << good << "/100 random circuits exact, AES-128 " << (aes.ok ? "matches" : "differs from") << " EVP AES-128-ECB";
  if (mode != CircuitMode::Semi) d << ", B=" << triples.B();
  d << ", AES M=" << aes_circuit().num_mul() << ", budget " << budget << " s";
  if (oracle_disagree) d << ", " << oracle_disagree << " oracle disagreements";
  if (!problem.empty()) d << "; first problem: " << problem;
  r.detail = d.str();
  (void)id;
  return r;
}

// ---- 3: meter formulas ----

CriterionResult meter_formulas(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  const std::uint64_t per_gate_b2 = opts.tamper ? 22 : 21;
  const std::uint64_t per_gate_b4 = 9 * 4 + 3;
  std::size_t checks = 0;
  std::vector<std::string> bad;
  auto expect = [&](const std::string& what, std::uint64_t got, std::uint64_t want) {
    ++checks;
    if (got != want && bad.size() < 4)
      bad.push_back(what + " = " + std::to_string(got) + ", expected " + std::to_string(want));
  };
  auto check_semi = [&](const std::string& tag, const Circuit& c, const RunResult& run) {
    const std::uint64_t M = c.num_mul(), I = c.num_inputs(), O = c.num_outputs(), D = c.depth();
    expect(tag + " semi offline elements", run.ring_elements(Phase::Offline), M);
    expect(tag + " semi offline rounds", run.rounds(Phase::Offline), M ? 1 : 0);
    const auto online = sent_elements(run, {Phase::Online, Phase::Output}, Category::Ring);
    expect(tag + " semi online elements", online, input_sharing_elements(c) + 2 * M + 3 * O);
    ++checks;
    if (online > 2 * I + 2 * M + 3 * O) bad.push_back(tag + " semi online exceeds 2I+2M+3O");
    expect(tag + " semi rounds", run.rounds(Phase::Online) + run.rounds(Phase::Output), D + 2);
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Circuit c = random_circuit(seed, {32, 200, 8});
    const auto in = seeded_inputs(c, seed);
    check_semi("seed " + std::to_string(seed), c, run_mem(circuit_fn(c, in, CircuitMode::Semi), seeded(seed)));
  }
  {
    const auto aes = run_aes(CircuitMode::Semi, {}, 7);
    check_semi("AES", aes_circuit(), aes.run);
  }
  for (unsigned B : {2U, 4U}) {
    TripleParams tp;
    tp.bucket = B;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Circuit c = random_circuit(seed, {32, 200, 8});
      const auto in = seeded_inputs(c, seed);
      const auto run = run_mem(circuit_fn(c, in, CircuitMode::Mal, tp), seeded(seed));
      const std::uint64_t M = c.num_mul(), O = c.num_outputs(), D = c.depth();
      const std::string tag = "B=" + std::to_string(B) + " seed " + std::to_string(seed);
      expect(tag + " mal offline elements", run.ring_elements(Phase::Offline), (B == 2 ? per_gate_b2 : per_gate_b4) * M);
      expect(tag + " mal online elements", sent_elements(run, {Phase::Online, Phase::Output}, Category::Ring),
             input_sharing_elements(c) + 4 * M + 3 * O);
      expect(tag + " mal offline rounds", run.rounds(Phase::Offline), 4);
      expect(tag + " mal rounds", run.rounds(Phase::Online) + run.rounds(Phase::Output), D + 4);
    }
  }
  r.seconds = since(t0);
  r.pass = bad.empty();
  std::ostringstream d;
  d << checks << " exact meter checks (semi: M offline, I'+2M+3O online, D+2 rounds; mal: " << per_gate_b2
    << "M offline at B=2, " << per_gate_b4 << "M at B=4, 4 online per gate)";
  for (const auto& b : bad) d << "; " << b;
  r.detail = d.str();
  return r;
}

// ---- 4: fault catalog ----

enum class Target { Circuit, Fair, BitExt };

struct CatalogEntry {
  std::string name;
  Target target;
  std::function<FaultRule(std::mt19937_64&, std::size_t pool)> rule;
};

FaultRule make_rule(std::string point, Party party, FaultOp op, std::uint64_t value = 0,
                    std::optional<Party> to = std::nullopt, std::optional<std::size_t> index = std::nullopt) {
  FaultRule f;
  f.point = std::move(point);
  f.party = party;
  f.op = op;
  f.value = value;
  f.to = to;
  f.index = index;
  return f;
}

std::vector<CatalogEntry> fault_catalog() {
  using R = std::mt19937_64;
  return {
      {"gamma+delta", Target::Circuit,
       [](R& g, std::size_t) { return make_rule("mul.gamma", Party::P0, FaultOp::AddDelta, nonzero_delta(g)); }},
      {"chi1+delta", Target::Circuit,
       [](R& g, std::size_t) { return make_rule("mul.chi", Party::P1, FaultOp::AddDelta, nonzero_delta(g)); }},
      {"mz+delta", Target::Circuit,
       [](R& g, std::size_t) { return make_rule("mul.mz", Party::P1, FaultOp::AddDelta, nonzero_delta(g)); }},
      {"inconsistent-m-at-sharing", Target::Circuit,
       [](R& g, std::size_t) {
         return make_rule("sh.m", Party::P0, FaultOp::AddDelta, nonzero_delta(g), Party::P2);
       }},
      {"wrong-rec-share", Target::Circuit,
       [](R& g, std::size_t) {
         return make_rule("rec.share", Party::P1, FaultOp::AddDelta, nonzero_delta(g), Party::P0);
       }},
      {"wrong-q-in-bitext", Target::BitExt,
       [](R& g, std::size_t) { return make_rule("bitext.q", Party::P1, FaultOp::AddDelta, nonzero_delta(g)); }},
      {"inconsistent-fair-signal", Target::Fair,
       [](R& g, std::size_t) {
         return make_rule("fair.signal", Party::P0, FaultOp::ForgeAbort, g(), Party::P2);
       }},
      {"corrupted-optimistic-triple", Target::Circuit,
       [](R& g, std::size_t pool) {
         return make_rule("trip.gamma", Party::P0, FaultOp::AddDelta, nonzero_delta(g), std::nullopt, g() % pool);
       }},
      {"wrong-mstar", Target::Circuit,
       [](R& g, std::size_t) { return make_rule("mul.mstar", Party::P1, FaultOp::AddDelta, nonzero_delta(g)); }},
      {"dropped-mz", Target::Circuit,
       [](R&, std::size_t) { return make_rule("mul.mz", Party::P2, FaultOp::Drop); }},
  };
}

CriterionResult fault_catalog_check(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  const auto catalog = fault_catalog();
  std::size_t runs = 0, wrong = 0, missed = 0, errors = 0;
  std::vector<std::string> bad;
  for (const auto& entry : catalog) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      std::mt19937_64 rng(seed * 1000 + runs);
      FaultScript script;
      RunResult run;
      std::vector<RingElement> expected;
      if (entry.target == Target::BitExt) {
        const auto a = from_signed(static_cast<std::int64_t>(rng() % (1ULL << 31)) - (1LL << 30), 64);
        Dealer dealer(seed_from_u64(seed));
        const auto sh = dealer.share(a);
        script.rules.push_back(entry.rule(rng, 1));
        expected = {RingElement(static_cast<std::uint64_t>(msb(a)), 1)};
        run = run_mem([&](PartyContext& ctx) { return std::vector<RingElement>{bitext_run_mal(ctx, sh[index_of(ctx.me)])}; },
                      seeded(seed, &script));
      } else {
        const Circuit c = random_circuit(seed, {32, 60, 5});
        const auto in = seeded_inputs(c, seed);
        expected = eval_plain(c, in);
        const TripleParams tp;
        script.rules.push_back(entry.rule(rng, tp.B() * c.num_mul() + tp.C()));
        const auto mode = entry.target == Target::Fair ? CircuitMode::Fair : CircuitMode::Mal;
        run = run_mem(circuit_fn(c, in, mode, tp), seeded(seed, &script));
      }
      ++runs;
      bool honest_abort = false;
      for (const auto& p : run.parties) {
        if (!is_honest(script, p.me)) continue;
        if (!p.error.empty()) {
          ++errors;
          if (bad.size() < 3) bad.push_back(entry.name + " seed " + std::to_string(seed) + ": " + p.error);
        } else if (p.aborted) {
          honest_abort = true;
        } else if (p.outputs != expected) {
          ++wrong;
          if (bad.size() < 3) bad.push_back(entry.name + " seed " + std::to_string(seed) + ": wrong output accepted");
        }
      }
      if (!honest_abort) {
        ++missed;
        if (bad.size() < 3) bad.push_back(entry.name + " seed " + std::to_string(seed) + ": no honest abort");
      }
    }
    if (opts.log) opts.log("  " + entry.name + " done");
  }
  r.seconds = since(t0);
  r.pass = wrong == 0 && missed == 0 && errors == 0;
  std::ostringstream d;
  d << catalog.size() << " scripts x 20 seeds = " << runs << " runs: " << wrong << " wrong accepted outputs, " << missed
    << " runs without an honest abort, " << errors << " errors";
  for (const auto& b : bad) d << "; " << b;
  r.detail = d.str();
  return r;
}

// ---- 5: cut-and-bucket Monte Carlo ----

struct TripleRun {
  bool honest_abort = false;
  bool bad_output = false;
};

TripleRun triple_trial(std::uint64_t seed, const FaultScript& script, const TripleParams& tp, std::size_t n) {
  ShareAuditor auditor;
  const auto run = run_mem(
      [&](PartyContext& ctx) {
        ctx.enter(Phase::Offline);
        const auto ts = gen_triples(ctx, n, 32, tp);
        std::vector<MShare> a, b, c;
        for (const auto& t : ts) {
          a.push_back(t.a);
          b.push_back(t.b);
          c.push_back(t.c);
        }
        ctx.auditor->submit(ctx.me, "a", a);
        ctx.auditor->submit(ctx.me, "b", b);
        ctx.auditor->submit(ctx.me, "c", c);
        return std::vector<RingElement>{};
      },
      seeded(seed, &script, &auditor));
  TripleRun out;
  out.honest_abort = run.at(Party::P1).aborted || run.at(Party::P2).aborted;
  if (!out.honest_abort && run.at(Party::P0).ok()) {
    const auto a = auditor.reconstructed("a"), b = auditor.reconstructed("b"), c = auditor.reconstructed("c");
    for (std::size_t i = 0; i < a.size(); ++i) out.bad_output |= c[i] != a[i] * b[i];
  }
  return out;
}

CriterionResult cut_and_bucket(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  constexpr std::size_t N = 16, runs = 5000;
  TripleParams tp;
  tp.bucket = 2;
  tp.opened = 6;
  const std::size_t pool = N * 2 + 6;
  std::mt19937_64 rng(55);
  std::size_t escapes = 0, bad_outputs = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    FaultScript script;
    script.rules.push_back(make_rule("trip.gamma", Party::P0, FaultOp::AddDelta, nonzero_delta(rng), std::nullopt,
                                     rng() % pool));
    const auto t = triple_trial(100000 + i, script, tp, N);
    if (!t.honest_abort) ++escapes;
    if (t.bad_output) ++bad_outputs;
    if (opts.log && (i + 1) % 1000 == 0) opts.log("  " + std::to_string(i + 1) + "/5000 single-corruption runs");
  }
  // Informational: two optimistic products corrupted with the same delta. The
  // pair slips through the cut-and-bucket stage only when both land unopened in
  // one bucket, probability N / C(BN + C, 2) = 16/703.
  constexpr std::size_t pair_runs = 1000;
  std::size_t pair_escapes = 0;
  for (std::size_t i = 0; i < pair_runs; ++i) {
    const auto delta = nonzero_delta(rng);
    const std::size_t x = rng() % pool;
    std::size_t y = rng() % (pool - 1);
    if (y >= x) ++y;
    FaultScript script;
    script.rules.push_back(make_rule("trip.gamma", Party::P0, FaultOp::AddDelta, delta, std::nullopt, x));
    script.rules.push_back(make_rule("trip.gamma", Party::P0, FaultOp::AddDelta, delta, std::nullopt, y));
    if (!triple_trial(200000 + i, script, tp, N).honest_abort) ++pair_escapes;
  }
  r.seconds = since(t0);
  const double rate = static_cast<double>(escapes) / runs;
  r.pass = rate <= 3.0 / 256 && r.seconds < 120;
  std::ostringstream d;
  d << std::setprecision(4) << "N=16 B=2 C=6, one corrupted product at a uniform index of " << pool << ": " << escapes
    << "/" << runs << " escapes (rate " << rate << ", bound 1/256, accept <= 3/256), " << bad_outputs
    << " bad accepted triples; matched-delta pair (informational): " << pair_escapes << "/" << pair_runs
    << " passed the bucket stage, expected " << 16.0 / 703 * pair_runs;
  r.detail = d.str();
  return r;
}

// ---- 6: tau transfer ----

CriterionResult tau_transfer(const AcceptanceOptions&) {
  CriterionResult r;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(66);
  constexpr std::size_t cases = 1000;
  std::size_t tau_ok = 0, abort_ok = 0, zero = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    const unsigned bits = 64;
    const RingElement a(rng(), bits), b(rng(), bits), d(rng(), bits), e(rng(), bits);
    const RingElement delta = i % 4 == 0 ? RingElement::zero(bits) : RingElement(nonzero_delta(rng), bits);
    if (delta.value() == 0) ++zero;
    Dealer dealer(seed_from_u64(i + 1));
    const std::vector<RingElement> vals{a, b, a * b + delta, d, e, d * e};
    const auto sh = dealer.share_vector(vals);
    ShareAuditor auditor;
    const auto run = run_mem(
        [&](PartyContext& ctx) {
          const auto& s = sh[index_of(ctx.me)];
          ctx.enter(Phase::Online);
          const Triple x{s[0], s[1], s[2]}, y{s[3], s[4], s[5]};
          prc_check(ctx, std::span(&x, 1), std::span(&y, 1));
          return std::vector<RingElement>{};
        },
        seeded(i + 1, nullptr, &auditor));
    const auto tau = auditor.reconstructed("prc.tau");
    if (tau.size() == 1 && tau[0] == delta) ++tau_ok;
    bool any_abort = false;
    for (const auto& p : run.parties) any_abort |= p.aborted;
    const bool clean = std::all_of(run.parties.begin(), run.parties.end(), [](const auto& p) { return p.error.empty(); });
    if (clean && any_abort == (delta.value() != 0)) ++abort_ok;
  }
  r.seconds = since(t0);
  r.pass = tau_ok == cases && abort_ok == cases && zero > 0;
  std::ostringstream d;
  d << cases << " cases (" << zero << " with delta = 0): tau = delta in " << tau_ok << ", abort iff delta != 0 in "
    << abort_ok;
  r.detail = d.str();
  return r;
}

// ---- 7: fair unanimity ----

std::vector<std::pair<std::string, FaultRule>> fair_scripts(std::mt19937_64& g) {
  return {
      {"P0 forges abort to P2", make_rule("fair.signal", Party::P0, FaultOp::ForgeAbort, g(), Party::P2)},
      {"P0 forges abort to P1", make_rule("fair.signal", Party::P0, FaultOp::ForgeAbort, g(), Party::P1)},
      {"P0 withholds signal from P1", make_rule("fair.signal", Party::P0, FaultOp::Drop, 0, Party::P1)},
      {"P1 forwards forged abort", make_rule("fair.forward", Party::P1, FaultOp::ForgeAbort, g())},
      {"P2 drops forward", make_rule("fair.forward", Party::P2, FaultOp::Drop)},
      {"P1 bad commitment to P0", make_rule("fair.commit", Party::P1, FaultOp::AddDelta, nonzero_delta(g), Party::P0)},
      {"P1 bad opening to P2", make_rule("fair.open", Party::P1, FaultOp::AddDelta, nonzero_delta(g), Party::P2)},
      {"P0 withholds openings", make_rule("fair.open", Party::P0, FaultOp::Drop)},
      {"P0 bad commitment to P2", make_rule("fair.commit", Party::P0, FaultOp::AddDelta, nonzero_delta(g), Party::P2)},
      {"P2 bad opening to P0", make_rule("fair.open", Party::P2, FaultOp::AddDelta, nonzero_delta(g), Party::P0)},
  };
}

CriterionResult fair_unanimity(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  std::size_t runs = 0, split = 0, wrong = 0, errors = 0, delivered = 0, aborted = 0;
  std::vector<std::string> bad;
  std::size_t scripts = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Circuit c = random_circuit(seed, {32, 40, 4});
    const auto in = seeded_inputs(c, seed);
    const auto expected = eval_plain(c, in);
    std::mt19937_64 rng(seed * 7919);
    const auto list = fair_scripts(rng);
    scripts = list.size();
    for (const auto& [name, rule] : list) {
      FaultScript script;
      script.rules.push_back(rule);
      const auto run = run_mem(circuit_fn(c, in, CircuitMode::Fair), seeded(seed, &script));
      ++runs;
      if (!run.unanimous(&script)) {
        ++split;
        if (bad.size() < 3) bad.push_back(name + " seed " + std::to_string(seed) + ": honest parties disagree");
      }
      bool any_out = false;
      for (const auto& p : run.parties) {
        if (!is_honest(script, p.me)) continue;
        if (!p.error.empty()) {
          ++errors;
          if (bad.size() < 3) bad.push_back(name + " seed " + std::to_string(seed) + ": " + p.error);
        } else if (!p.aborted) {
          any_out = true;
          if (p.outputs != expected) ++wrong;
        }
      }
      (any_out ? delivered : aborted) += 1;
    }
    if (opts.log && seed % 10 == 0) opts.log("  " + std::to_string(seed) + "/50 seeds");
  }
  // honest-run costs per output
  std::size_t cost_ok = 0;
  std::string cost_problem;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Circuit c = random_circuit(seed, {32, 40, 4});
    const auto in = seeded_inputs(c, seed);
    const auto run = run_mem(circuit_fn(c, in, CircuitMode::Fair), seeded(seed));
    const std::uint64_t O = c.num_outputs();
    const auto off_com = run.sent(Phase::Offline, Category::Commitment).elements;
    const auto on_com = sent_elements(run, {Phase::Online, Phase::Output}, Category::Commitment);
    const auto on_open = sent_elements(run, {Phase::Online, Phase::Output}, Category::Opening);
    const bool ok = all_output(run, eval_plain(c, in)) && off_com == 4 * O && on_com <= 2 * O && on_open == 6 * O;
    if (ok) ++cost_ok;
    else if (cost_problem.empty())
      cost_problem = "seed " + std::to_string(seed) + ": offline commitments " + std::to_string(off_com) +
                     ", online commitments " + std::to_string(on_com) + ", openings " + std::to_string(on_open) +
                     " for O=" + std::to_string(O);
  }
  r.seconds = since(t0);
  r.pass = split == 0 && wrong == 0 && errors == 0 && cost_ok == 50;
  std::ostringstream d;
  d << scripts << " scripts x 50 seeds = " << runs << " runs: " << split << " split outcomes, " << wrong
    << " wrong outputs, " << errors << " errors (" << delivered << " delivered, " << aborted
    << " aborted); honest runs with 4 offline commitments, <= 2 online commitments and 6 openings per output: "
    << cost_ok << "/50";
  for (const auto& b : bad) d << "; " << b;
  if (!cost_problem.empty()) d << "; " << cost_problem;
  r.detail = d.str();
  return r;
}

// ---- 8: dot product costs ----

CriterionResult dot_costs(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  std::vector<std::string> lines, bad;
  for (std::size_t d : {std::size_t{1}, std::size_t{784}, std::size_t{10000}}) {
    std::mt19937_64 rng(d);
    std::vector<RingElement> p, q;
    RingElement want = RingElement::zero(64);
    for (std::size_t i = 0; i < d; ++i) {
      p.emplace_back(rng(), 64);
      q.emplace_back(rng(), 64);
      want += p.back() * q.back();
    }
    Dealer dealer(seed_from_u64(d));
    const auto ps = dealer.share_vector(p), qs = dealer.share_vector(q);
    for (Mode mode : {Mode::Semi, Mode::Mal}) {
      const auto run = run_mem(
          [&](PartyContext& ctx) {
            const auto i = index_of(ctx.me);
            return std::vector<RingElement>{mode == Mode::Semi ? dot_run_semi(ctx, ps[i], qs[i])
                                                               : dot_run_mal(ctx, ps[i], qs[i])};
          },
          seeded(d));
      const auto off = run.ring_elements(Phase::Offline), on = run.ring_elements(Phase::Online);
      const std::uint64_t want_off = mode == Mode::Semi ? 1 : 21 * d, want_on = mode == Mode::Semi ? 2 : 2 * d + 2;
      const bool ok = all_output(run, {want}) && off == want_off && on == want_on;
      std::ostringstream l;
      l << mode_name(mode) << " d=" << d << " " << off << "/" << on;
      lines.push_back(l.str());
      if (!ok) bad.push_back(l.str() + " (want " + std::to_string(want_off) + "/" + std::to_string(want_on) + ")");
    }
    if (opts.log) opts.log("  d=" + std::to_string(d) + " done");
  }
  r.seconds = since(t0);
  r.pass = bad.empty();
  std::ostringstream d;
  d << "offline/online elements:";
  for (const auto& l : lines) d << " " << l << ";";
  for (const auto& b : bad) d << " mismatch " << b << ";";
  r.detail = d.str();
  return r;
}

// ---- 9: comparison ----

CriterionResult comparison(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  std::size_t runs = 0, failures = 0, cost_bad = 0;
  // exhaustive, l = 8, |a| <= 4 = 2^ka
  constexpr unsigned ka = 2;
  const auto rb = bitext_r_bound(8, ka), fb = bitext_factor_bound(8, ka);
  for (int a = -4; a <= 4; ++a) {
    Dealer dealer(seed_from_u64(static_cast<std::uint64_t>(a + 100)));
    const auto sh = dealer.share(from_signed(a, 8));
    const RingElement want(a < 0 ? 1 : 0, 1);
    for (std::uint64_t rr = 1; rr < rb; ++rr) {
      BitExtOptions o;
      o.ka = ka;
      o.force_r = rr;
      const auto run = run_mem(
          [&](PartyContext& ctx) { return std::vector<RingElement>{bitext_run_semi(ctx, sh[index_of(ctx.me)], o)}; },
          seeded(runs + 1));
      ++runs;
      if (!all_output(run, {want})) ++failures;
      if (run.ring_bits(Phase::Online) != 2 * 8 + 2) ++cost_bad;
    }
    for (std::uint64_t r1 = 1; r1 < fb; ++r1) {
      for (std::uint64_t r2 = 1; r2 < fb; ++r2) {
        BitExtOptions o;
        o.ka = ka;
        o.force_r1 = r1;
        o.force_r2 = r2;
        const auto run = run_mem(
            [&](PartyContext& ctx) { return std::vector<RingElement>{bitext_run_mal(ctx, sh[index_of(ctx.me)], o)}; },
            seeded(runs + 1));
        ++runs;
        if (!all_output(run, {want})) ++failures;
        if (run.ring_bits(Phase::Online) != 6 * 8 + 1) ++cost_bad;
      }
    }
  }
  const std::size_t exhaustive = runs;
  if (opts.log) opts.log("  exhaustive l=8 done");
  // l = 64, random admissible inputs, batched 100 per run
  std::mt19937_64 rng(99);
  constexpr std::size_t per_mode = 10000, batch = 100;
  std::size_t random_checked = 0;
  for (Mode mode : {Mode::Semi, Mode::Mal}) {
    for (std::size_t done = 0; done < per_mode; done += batch) {
      std::vector<RingElement> as, want;
      for (std::size_t i = 0; i < batch; ++i) {
        std::int64_t v = 0;
        while (v == 0) v = static_cast<std::int64_t>(rng() % ((1ULL << 32) - 1)) - ((1LL << 31) - 1);
        as.push_back(from_signed(v, 64));
        want.emplace_back(v < 0 ? 1 : 0, 1);
      }
      Dealer dealer(seed_from_u64(rng()));
      const auto sh = dealer.share_vector(as);
      const auto run = run_mem(
          [&](PartyContext& ctx) {
            std::vector<RingElement> out;
            for (const auto& s : sh[index_of(ctx.me)])
              out.push_back(mode == Mode::Semi ? bitext_run_semi(ctx, s) : bitext_run_mal(ctx, s));
            return out;
          },
          seeded(rng()));
      random_checked += batch;
      for (const auto& p : run.parties) {
        if (!p.ok()) {
          failures += batch;
          break;
        }
        for (std::size_t i = 0; i < batch; ++i) failures += p.outputs[i] != want[i];
      }
    }
    if (opts.log) opts.log(std::string("  l=64 ") + mode_name(mode) + " done");
  }
  // single-instance costs at l = 64
  std::uint64_t semi_bits = 0, mal_bits = 0;
  {
    Dealer dealer(seed_from_u64(5));
    const auto sh = dealer.share(from_signed(-12345, 64));
    semi_bits = run_mem([&](PartyContext& ctx) { return std::vector<RingElement>{bitext_run_semi(ctx, sh[index_of(ctx.me)])}; })
                    .ring_bits(Phase::Online);
    mal_bits = run_mem([&](PartyContext& ctx) { return std::vector<RingElement>{bitext_run_mal(ctx, sh[index_of(ctx.me)])}; })
                   .ring_bits(Phase::Online);
    cost_bad += (semi_bits != 2 * 64 + 2) + (mal_bits != 6 * 64 + 1);
  }
  r.seconds = since(t0);
  r.pass = failures == 0 && cost_bad == 0;
  std::ostringstream d;
  d << exhaustive << " exhaustive l=8 runs (every a in [-4, 4], every admissible r), " << random_checked
    << " random l=64 inputs: " << failures << " failures; online bits semi " << semi_bits << " (2l+2 = 130), mal "
    << mal_bits << " (6l+1 = 385); " << cost_bad << " cost mismatches";
  r.detail = d.str();
  return r;
}

// ---- 10: end-to-end prediction ----

CriterionResult prediction(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  constexpr std::size_t d = 784;
  constexpr std::uint64_t l = 64;
  const double tol = (d + 1) * std::ldexp(1.0, -13), margin = std::ldexp(1.0, -10);
  std::size_t runs = 0, failures = 0, skipped = 0;
  double worst = 0;
  std::vector<std::string> bad;
  for (ModelKind kind : {ModelKind::LinReg, ModelKind::SvmR, ModelKind::LogR, ModelKind::SvmC}) {
    for (Mode mode : {Mode::Semi, Mode::Mal}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto m = random_model(kind, d, seed);
        const auto z = random_query(m, seed + 100);
        PredictOptions po;
        po.mode = mode;
        const auto run = run_mem(predict_fn(m, z, po, seed), seeded(seed));
        ++runs;
        if (!run.all_ok()) {
          ++failures;
          bad.push_back(std::string(model_kind_name(kind)) + " " + mode_name(mode) + ": " + first_problem(run));
          continue;
        }
        const auto opened = run.at(Party::P1).outputs.at(0);
        const double got = decode_prediction(kind, opened);
        const double score = plain_score(m, z);
        bool ok = true;
        if (is_classifier(kind)) {
          if (std::abs(score) > margin) ok = got == (score >= 0 ? 1.0 : 0.0);
          else ++skipped;
        } else {
          worst = std::max(worst, std::abs(got - score));
          ok = std::abs(got - score) <= tol && opened == fixed_score(m, z);
        }
        if (!ok) {
          ++failures;
          bad.push_back(std::string(model_kind_name(kind)) + " " + mode_name(mode) + " seed " + std::to_string(seed));
        }
      }
    }
    if (opts.log) opts.log(std::string("  ") + model_kind_name(kind) + " done");
  }
  struct Row {
    ModelKind kind;
    Mode mode;
    std::uint64_t offline, online, rounds;
  };
  const Row table[] = {
      {ModelKind::LinReg, Mode::Semi, l, 2 * l, 1},
      {ModelKind::SvmC, Mode::Semi, l, 4 * l + 2, 3},
      {ModelKind::LinReg, Mode::Mal, 21 * d * l, 2 * d * l + 2 * l, 1},
      {ModelKind::SvmC, Mode::Mal, 21 * d * l + 46 * l, 2 * d * l + 8 * l + 1, 4},
  };
  std::ostringstream costs;
  std::size_t cost_bad = 0;
  for (const auto& row : table) {
    const auto m = random_model(row.kind, d, 11);
    const auto z = random_query(m, 12);
    PredictOptions po;
    po.mode = row.mode;
    const auto run = run_mem(predict_fn(m, z, po), seeded(11));
    const auto off = run.ring_bits(Phase::Offline), on = run.ring_bits(Phase::Online);
    const auto rounds = run.rounds(Phase::Online);
    const bool ok = run.all_ok() && off == row.offline && on == row.online && rounds == row.rounds;
    cost_bad += !ok;
    costs << " " << (is_classifier(row.kind) ? "class" : "reg") << "/" << mode_name(row.mode) << " " << off << "/"
          << on << " bits, " << rounds << (ok ? " rounds;" : " rounds MISMATCH;");
  }
  r.seconds = since(t0);
  r.pass = failures == 0 && cost_bad == 0;
  std::ostringstream det;
  det << std::setprecision(3) << runs << " predictions at d=784: " << failures << " failures, worst regression error "
      << worst << " (tolerance " << tol << "), " << skipped << " classifications inside the 2^-10 margin; offline/online:"
      << costs.str();
  for (const auto& b : bad) det << " " << b << ";";
  r.detail = det.str();
  return r;
}

// ---- 11: transport equivalence ----

bool same_meter(const CommMeter& a, const CommMeter& b, Party me) {
  for (int ph = 0; ph < kPhaseCount; ++ph) {
    const auto phase = static_cast<Phase>(ph);
    if (a.max_stamp(phase) != b.max_stamp(phase)) return false;
    for (Party peer : kAllParties) {
      if (peer == me) continue;
      for (int c = 0; c < kCategoryCount; ++c) {
        const auto cat = static_cast<Category>(c);
        if (!(a.sent(phase, peer, cat) == b.sent(phase, peer, cat))) return false;
        if (!(a.received(phase, peer, cat) == b.received(phase, peer, cat))) return false;
      }
    }
  }
  return true;
}

bool same_run(const RunResult& a, const RunResult& b) {
  for (int i = 0; i < 3; ++i) {
    const auto& x = a.parties[i];
    const auto& y = b.parties[i];
    if (!x.ok() || !y.ok() || x.outputs != y.outputs || x.transcripts != y.transcripts) return false;
    if (!same_meter(x.meter, y.meter, x.me)) return false;
  }
  return true;
}

CriterionResult transport_equivalence(const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  struct Case {
    std::string name;
    PartyFn fn;
  };
  const Circuit c = random_circuit(7, {32, 120, 6});
  const auto in = seeded_inputs(c, 7);
  const auto lin = random_model(ModelKind::LinReg, 16, 3), svm = random_model(ModelKind::SvmC, 16, 4);
  const auto zl = random_query(lin, 5), zs = random_query(svm, 6);
  PredictOptions mal;
  mal.mode = Mode::Mal;
  std::vector<Case> cases = {
      {"circuit/semi", circuit_fn(c, in, CircuitMode::Semi)},
      {"circuit/mal", circuit_fn(c, in, CircuitMode::Mal)},
      {"circuit/fair", circuit_fn(c, in, CircuitMode::Fair)},
      {"linreg/mal", predict_fn(lin, zl, mal)},
      {"svmc/mal", predict_fn(svm, zs, mal)},
  };
  std::size_t same = 0;
  std::uint64_t outputs = 0, frames = 0;
  std::vector<std::string> bad;
  for (const auto& k : cases) {
    const auto a = run_mem(k.fn, seeded(42));
    const auto b = run_mem(k.fn, seeded(42));
    RunResult t;
    std::string tcp_error;
    try {
      t = run_tcp_local(k.fn, seeded(42));
    } catch (const std::exception& e) {
      tcp_error = e.what();
    }
    if (tcp_error.empty() && same_run(a, b) && same_run(a, t)) ++same;
    else bad.push_back(k.name + (tcp_error.empty() ? "" : " (" + tcp_error + ")"));
    for (const auto& p : t.parties) outputs += p.outputs.size();
    for (int ph = 0; ph < kPhaseCount; ++ph)
      for (int cat = 0; cat < kCategoryCount; ++cat)
        frames += t.sent(static_cast<Phase>(ph), static_cast<Category>(cat)).frames;
    if (opts.log) opts.log("  " + k.name + " done");
  }
  r.seconds = since(t0);
  r.pass = same == cases.size();
  std::ostringstream d;
  d << same << "/" << cases.size()
    << " workloads with identical outputs, per-phase transcripts and meters across two in-process runs and a "
       "loopback TCP run ("
    << outputs << " output values, " << frames << " TCP frames); wall-clock latency and throughput are hardware-specific and not asserted";
  for (const auto& b : bad) d << "; differs: " << b;
  r.detail = d.str();
  return r;
}

}  // namespace

const char* criterion_name(int id) {
  switch (id) {
    case 1: return "oracle-semi";
    case 2: return "oracle-mal";
    case 3: return "meter-formulas";
    case 4: return "fault-catalog";
    case 5: return "cut-and-bucket";
    case 6: return "tau-transfer";
    case 7: return "fair-unanimity";
    case 8: return "dot-costs";
    case 9: return "comparison";
    case 10: return "prediction";
    case 11: return "transport-equivalence";
  }
  return "unknown";
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  CriterionResult r;
  const auto t0 = Clock::now();
  try {
    switch (id) {
      case 1: r = oracle_equivalence(1, CircuitMode::Semi, {}, 60, opts); break;
      case 2: {
        TripleParams tp;
        tp.nominal_n = 1024;
        r = oracle_equivalence(2, CircuitMode::Mal, tp, 300, opts);
        break;
      }
      case 3: r = meter_formulas(opts); break;
      case 4: r = fault_catalog_check(opts); break;
      case 5: r = cut_and_bucket(opts); break;
      case 6: r = tau_transfer(opts); break;
      case 7: r = fair_unanimity(opts); break;
      case 8: r = dot_costs(opts); break;
      case 9: r = comparison(opts); break;
      case 10: r = prediction(opts); break;
      case 11: r = transport_equivalence(opts); break;
      default: throw ConfigError("no criterion " + std::to_string(id));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.id = id;
  r.name = criterion_name(id);
  r.seconds = since(t0);
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
    if (opts.log) opts.log("criterion " + std::to_string(id) + " " + criterion_name(id));
    out.push_back(run_criterion(id, opts));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass ? "PASS " : "FAIL ") << std::setw(2) << r.id << " " << r.name << " (" << std::fixed
    << std::setprecision(1) << r.seconds << " s): " << r.detail;
  return s.str();
}

}  // namespace tpc
