#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace radlab {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // limit it was compared against
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Names accepted by run_verify, "all" last.
const std::vector<std::string>& verify_suites();

/// Runs one invariant suite (or every suite for "all"). Throws
/// std::invalid_argument for an unknown name.
VerifyReport run_verify(std::string_view suite, unsigned jobs = 1);

std::string report_json(const VerifyReport& report);

}  // namespace radlab
