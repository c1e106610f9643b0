#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oconnell {

struct CheckResult {
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string note;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  std::string error;  // exception text if the run aborted

  bool pass() const;
};

struct VerificationReport {
  std::vector<CriterionResult> criteria;
  bool pass() const;
};

// Runs `simulate` with the given arguments under a worker count and returns
// the produced bytes. Criterion 17 needs one; without it the check fails.
using SimulateRunner = std::function<std::string(const std::vector<std::string>& args, unsigned threads)>;

struct VerifyOptions {
  bool fast = false;  // skip Monte Carlo parts of quadrature criteria
  std::uint64_t seed = 20240611;
  SimulateRunner simulate;
};

struct CriterionInfo {
  int id;
  const char* suite;  // specfun, whittaker, densities or pathsim
  const char* title;
  bool quadrature_only;
};

const std::vector<CriterionInfo>& criteria();
// Criterion ids of a suite ("all" selects every criterion).
std::vector<int> suite_criteria(const std::string& suite, bool fast);

CriterionResult run_criterion(int id, const VerifyOptions& opt);
VerificationReport run_criteria(const std::vector<int>& ids, const VerifyOptions& opt,
                                const std::function<void(const CriterionResult&)>& on_done = {});

std::string to_json(const VerificationReport& r);
// One summary line for the criterion followed by one line per check.
std::string to_text(const CriterionResult& r);

}  // namespace oconnell
