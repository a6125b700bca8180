#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace calibr {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  /// Named measurements behind the verdict, in evaluation order.
  std::vector<std::pair<std::string, double>> metrics;
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  int threads = 0;
  /// Criterion ids to run; empty runs all.
  std::vector<int> only;
};

inline constexpr int kCriterionCount = 12;

std::string criterion_name(int id);
CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});
/// Runs the selected criteria in order; `on_result` sees each result as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace calibr
