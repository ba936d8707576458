#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dioph::verify {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  double limit_seconds = 0;
};

struct SuiteOptions {
  unsigned workers = 1;
  std::uint64_t seed = 20240601;
};

constexpr int kCriteria = 11;

/// Runs one acceptance criterion (1..kCriteria). A criterion also fails when
/// it exceeds its runtime limit.
CriterionResult run_criterion(int id, const SuiteOptions& options = {});

/// All criteria in order; `progress` sees each result as soon as it is known.
std::vector<CriterionResult> run_suite(const SuiteOptions& options = {},
                                       const std::function<void(const CriterionResult&)>& progress = {});

/// Informational checks reported next to the suite but not gating it.
struct Diagnostic {
  std::string name;
  std::string detail;
};

std::vector<Diagnostic> diagnostics(const SuiteOptions& options = {});

/// "PASS [id] title: detail (seconds)" style line.
std::string format_line(const CriterionResult& result);

}  // namespace dioph::verify
