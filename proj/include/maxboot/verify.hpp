#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maxboot {

struct VerifyCheck {
  std::string suite;
  std::string name;
  double value = 0.0;      // observed discrepancy
  double tolerance = 0.0;  // pass when value <= tolerance
  bool passed = false;
};

/// Oracle suites behind `maxboot verify`: Stein residuals and kernel closed
/// forms, small-d rectangle-integral cross-checks, weight-moment checks.
std::vector<VerifyCheck> verify_stein();
std::vector<VerifyCheck> verify_integrals();
std::vector<VerifyCheck> verify_weights(long long draws = 1'000'000, std::uint64_t seed = 7);
std::vector<VerifyCheck> run_verification(std::uint64_t seed = 7);

}  // namespace maxboot
