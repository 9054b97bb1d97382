#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpc/party.hpp"

namespace tpc {

enum class FaultOp : std::uint8_t { AddDelta, Replace, Drop, ForgeAbort };

const char* fault_op_name(FaultOp op);

/// One tamper directive, applied by the corrupted party's endpoint at send time.
///   point=<id> party=<0|1|2> op=<add-delta|replace|drop|forge-abort> value=<hex>
///   [to=<0|1|2>] [index=<k>|all]
/// add-delta/replace act on element `index` of a ring frame (default 0), or on the
/// first eight payload bytes of a digest, commitment or opening frame.
struct FaultRule {
  std::string point;
  Party party = Party::P0;
  FaultOp op = FaultOp::AddDelta;
  std::uint64_t value = 0;
  std::optional<Party> to;
  std::optional<std::size_t> index;  // nullopt with all_elements=false means 0
  bool all_elements = false;
};

struct FaultScript {
  std::vector<FaultRule> rules;

  bool empty() const { return rules.empty(); }
  /// Parties named by at least one rule.
  std::vector<Party> corrupted() const;
};

/// Blank lines and '#' comments are skipped. Throws ParseError with the line.
FaultScript parse_fault_script(std::string_view text);
FaultScript load_fault_script(const std::filesystem::path& path);
std::string format_fault_rule(const FaultRule& r);

}  // namespace tpc
