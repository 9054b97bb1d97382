#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpc/circuit.hpp"
#include "tpc/engine_mal.hpp"
#include "tpc/mlpred.hpp"
#include "tpc/runner.hpp"

namespace tpc {

enum class CircuitMode { Semi, Mal, Fair };

const char* circuit_mode_name(CircuitMode m);
CircuitMode parse_circuit_mode(std::string_view s);  // semi | mal | fair; throws ConfigError

/// One value per circuit input (the constant-one wire included), deterministic in seed.
std::vector<RingElement> seeded_inputs(const Circuit& c, std::uint64_t seed);

/// Online ring elements spent on input sharing: 2 per P0-owned input, 1 otherwise.
std::uint64_t input_sharing_elements(const Circuit& c);

/// Party function evaluating `c` on `all_inputs`; each party feeds the inputs it owns.
PartyFn circuit_fn(const Circuit& c, std::vector<RingElement> all_inputs, CircuitMode mode,
                   const TripleParams& triples = {});

/// Model with weights in [-0.5, 0.5] and bias in [-1, 1]; SVM kinds aggregate
/// k = 4 random support vectors.
Model random_model(ModelKind kind, std::size_t d, std::uint64_t seed);

/// Query in [0, 1]^d. Resamples until |w.z + b'| < 16 so the score stays inside
/// the comparison's admissible range.
std::vector<double> random_query(const Model& m, std::uint64_t seed);

/// Stages the dealer shares and returns the per-party prediction function.
PartyFn predict_fn(const Model& m, std::span<const double> z, const PredictOptions& opts,
                   std::uint64_t seed = 1);

}  // namespace tpc
