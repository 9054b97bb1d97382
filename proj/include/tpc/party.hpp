#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tpc/errors.hpp"

namespace tpc {

/// P0 is the distributor (offline work), P1 and P2 are the evaluators.
enum class Party : std::uint8_t { P0 = 0, P1 = 1, P2 = 2 };

inline constexpr std::array<Party, 3> kAllParties{Party::P0, Party::P1, Party::P2};

constexpr int index_of(Party p) { return static_cast<int>(p); }

inline Party party_from_index(int i) {
  if (i < 0 || i > 2) throw ContractViolation("party index out of range: " + std::to_string(i));
  return static_cast<Party>(i);
}

constexpr bool is_evaluator(Party p) { return p != Party::P0; }

/// The evaluator that is not `p` (p must be P1 or P2).
inline Party other_evaluator(Party p) {
  if (p == Party::P1) return Party::P2;
  if (p == Party::P2) return Party::P1;
  throw ContractViolation("other_evaluator: P0 is not an evaluator");
}

inline std::string party_name(Party p) { return "P" + std::to_string(index_of(p)); }

}  // namespace tpc
