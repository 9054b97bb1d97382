#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tpc {

inline constexpr int kCriterionCount = 11;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty: every criterion
  /// Self-test: expect 22 instead of 21 offline elements per malicious gate,
  /// which must make criterion 3 fail.
  bool tamper = false;
  std::function<void(const std::string&)> log;  // progress notes, may be empty
};

const char* criterion_name(int id);
CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS  3 meter-formulas (1.2 s): detail"
std::string format_result(const CriterionResult& r);

}  // namespace tpc
