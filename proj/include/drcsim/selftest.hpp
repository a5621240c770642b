#pragma once

#include <string>
#include <vector>

namespace drcsim {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;  // one-line diagnostic, filled on pass and fail alike
};

// Fast invariant suite: reward-table enumeration, MLP gradient vs. central
// finite differences, queue conservation, state-index round-trip, and a
// value-iteration oracle for tabular Q-learning on a tiny deterministic MDP.
// `inject_gradient_fault` flips the analytic gradient's sign inside the
// gradient check so the suite's ability to fail can itself be tested.
std::vector<SelftestResult> run_selftests(bool inject_gradient_fault = false);

}  // namespace drcsim
