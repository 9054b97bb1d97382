#include "tpc/fault.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tpc/errors.hpp"

namespace tpc {

const char* fault_op_name(FaultOp op) {
  switch (op) {
    case FaultOp::AddDelta: return "add-delta";
    case FaultOp::Replace: return "replace";
    case FaultOp::Drop: return "drop";
    case FaultOp::ForgeAbort: return "forge-abort";
  }
  return "?";
}

std::vector<Party> FaultScript::corrupted() const {
  std::vector<Party> out;
  for (const auto& r : rules) {
    if (std::find(out.begin(), out.end(), r.party) == out.end()) out.push_back(r.party);
  }
  return out;
}

namespace {

std::uint64_t parse_hex(std::string_view s, std::size_t line) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  if (s.empty() || s.size() > 16) throw ParseError(line, "bad hex value");
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw ParseError(line, "bad hex digit in value");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

Party parse_party(std::string_view s, std::size_t line) {
  if (s == "0") return Party::P0;
  if (s == "1") return Party::P1;
  if (s == "2") return Party::P2;
  throw ParseError(line, "party must be 0, 1 or 2");
}

}  // namespace

FaultScript parse_fault_script(std::string_view text) {
  FaultScript script;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::string word;
    FaultRule rule;
    bool any = false, has_point = false, has_party = false, has_op = false, has_value = false;
    while (words >> word) {
      any = true;
      const auto eq = word.find('=');
      if (eq == std::string::npos) throw ParseError(line, "expected key=value, got '" + word + "'");
      const std::string key = word.substr(0, eq);
      const std::string val = word.substr(eq + 1);
      if (key == "point") {
        if (val.empty()) throw ParseError(line, "empty point");
        rule.point = val;
        has_point = true;
      } else if (key == "party") {
        rule.party = parse_party(val, line);
        has_party = true;
      } else if (key == "op") {
        if (val == "add-delta") rule.op = FaultOp::AddDelta;
        else if (val == "replace") rule.op = FaultOp::Replace;
        else if (val == "drop") rule.op = FaultOp::Drop;
        else if (val == "forge-abort") rule.op = FaultOp::ForgeAbort;
        else throw ParseError(line, "unknown op '" + val + "'");
        has_op = true;
      } else if (key == "value") {
        rule.value = parse_hex(val, line);
        has_value = true;
      } else if (key == "to") {
        rule.to = parse_party(val, line);
      } else if (key == "index") {
        if (val == "all") {
          rule.all_elements = true;
        } else {
          try {
            std::size_t used = 0;
            rule.index = std::stoull(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
          } catch (const std::exception&) {
            throw ParseError(line, "bad index '" + val + "'");
          }
        }
      } else {
        throw ParseError(line, "unknown key '" + key + "'");
      }
    }
    if (!any) continue;
    if (!has_point || !has_party || !has_op) throw ParseError(line, "point, party and op are required");
    if (!has_value && (rule.op == FaultOp::AddDelta || rule.op == FaultOp::Replace))
      throw ParseError(line, "value is required for " + std::string(fault_op_name(rule.op)));
    if (rule.to && *rule.to == rule.party) throw ParseError(line, "to= names the corrupted party itself");
    script.rules.push_back(std::move(rule));
  }
  return script;
}

FaultScript load_fault_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fault script: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fault_script(ss.str());
}

std::string format_fault_rule(const FaultRule& r) {
  std::ostringstream o;
  o << "point=" << r.point << " party=" << index_of(r.party) << " op=" << fault_op_name(r.op) << " value=" << std::hex
    << r.value << std::dec;
  if (r.to) o << " to=" << index_of(*r.to);
  if (r.all_elements) o << " index=all";
  else if (r.index) o << " index=" << *r.index;
  return o.str();
}

}  // namespace tpc
