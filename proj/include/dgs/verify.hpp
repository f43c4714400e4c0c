#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dgs {

struct CheckResult {
  std::string key;  // module/property
  bool passed = false;
  std::string detail;
};

/// Invariant suite across all modules, driven by the fixture directory.
std::vector<CheckResult> run_verify_suite(const std::string& fixture_dir, std::uint64_t seed = 1);

}  // namespace dgs
