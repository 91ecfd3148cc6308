#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aliased_ac {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool checks_passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string detail;

  bool passed() const { return checks_passed && seconds <= budget_seconds; }
};

struct AcceptanceOptions {
  int jobs = 1;
  std::uint64_t seed = 0;
  /// Scratch space for the determinism check; a temporary directory when empty.
  std::filesystem::path scratch;
};

std::vector<int> criterion_ids();

/// Runs one criterion. Exceptions are caught and reported as failures.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// "PASS  4  title (12.3 s / 300 s): detail"
std::string format_line(const CriterionResult& result);

}  // namespace aliased_ac
