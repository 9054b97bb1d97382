#include <iostream>

#include "CLI11.hpp"
#include "tpc/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-11"};
  std::vector<int> only;
  bool tamper = false, verbose = false;
  app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, tpc::kCriterionCount));
  app.add_flag("--tamper", tamper, "perturb the malicious offline constant (criterion 3 must fail)");
  app.add_flag("-v,--verbose", verbose, "progress on stderr");
  CLI11_PARSE(app, argc, argv);

  tpc::AcceptanceOptions opts;
  opts.only = only;
  opts.tamper = tamper;
  if (verbose) opts.log = [](const std::string& s) { std::cerr << s << std::endl; };
  int failed = 0;
  for (int id = 1; id <= tpc::kCriterionCount; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto r = tpc::run_criterion(id, opts);
    std::cout << tpc::format_result(r) << std::endl;
    failed += !r.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " failing" << std::endl;
  return failed ? 1 : 0;
}
