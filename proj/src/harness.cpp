#include "tpc/harness.hpp"

#include <cmath>
#include <random>

namespace tpc {

const char* circuit_mode_name(CircuitMode m) {
  switch (m) {
    case CircuitMode::Semi: return "semi";
    case CircuitMode::Mal: return "mal";
    case CircuitMode::Fair: return "fair";
  }
  return "?";
}

CircuitMode parse_circuit_mode(std::string_view s) {
  if (s == "semi") return CircuitMode::Semi;
  if (s == "mal") return CircuitMode::Mal;
  if (s == "fair") return CircuitMode::Fair;
  throw ConfigError("unknown mode '" + std::string(s) + "' (semi, mal, fair)");
}

std::vector<RingElement> seeded_inputs(const Circuit& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RingElement> user;
  for (std::size_t i = 0; i < c.num_user_inputs(); ++i) user.emplace_back(rng(), c.bits());
  return c.with_constants(user);
}

std::uint64_t input_sharing_elements(const Circuit& c) {
  std::uint64_t n = 0;
  for (const auto& in : c.inputs()) n += in.owner == Party::P0 ? 2 : 1;
  return n;
}

PartyFn circuit_fn(const Circuit& c, std::vector<RingElement> all_inputs, CircuitMode mode, const TripleParams& triples) {
  return [&c, inputs = std::move(all_inputs), mode, triples](PartyContext& ctx) {
    const auto mine = c.inputs_of(ctx.me, inputs);
    if (mode == CircuitMode::Semi) return run_circuit_semi(ctx, c, mine);
    MalOptions mo;
    mo.triples = triples;
    mo.fair = mode == CircuitMode::Fair;
    return run_circuit_mal(ctx, c, mine, mo);
  };
}

Model random_model(ModelKind kind, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-0.5, 0.5), bias(-1.0, 1.0), unit(0.0, 1.0);
  Model m;
  m.kind = kind;
  if (kind == ModelKind::SvmR || kind == ModelKind::SvmC) {
    constexpr std::size_t k = 4;
    std::vector<double> alpha, y;
    std::vector<std::vector<double>> x(k);
    for (std::size_t j = 0; j < k; ++j) {
      alpha.push_back(0.25 * unit(rng));
      y.push_back(unit(rng) < 0.5 ? -1.0 : 1.0);
      for (std::size_t i = 0; i < d; ++i) x[j].push_back(2 * unit(rng) - 1);
    }
    m.w = svm_aggregate(alpha, y, x);
  } else {
    for (std::size_t i = 0; i < d; ++i) m.w.push_back(w(rng));
  }
  m.b = bias(rng);
  if (kind == ModelKind::LogR) m.threshold = 0.25 + 0.5 * unit(rng);
  return m;
}

std::vector<double> random_query(const Model& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    std::vector<double> z;
    for (std::size_t i = 0; i < m.d(); ++i) z.push_back(unit(rng));
    if (std::abs(plain_score(m, z)) < 16) return z;
  }
}

PartyFn predict_fn(const Model& m, std::span<const double> z, const PredictOptions& opts, std::uint64_t seed) {
  auto staged = stage_prediction(m, z, seed_from_u64(seed));
  return [staged = std::move(staged), kind = m.kind, opts](PartyContext& ctx) {
    return std::vector<RingElement>{predict(ctx, kind, staged[index_of(ctx.me)], opts)};
  };
}

}  // namespace tpc
