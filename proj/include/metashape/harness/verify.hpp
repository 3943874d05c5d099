#pragma once

#include <string>
#include <vector>

#include "metashape/harness/config.hpp"

namespace metashape::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  ///< worst residual observed
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Q*_{M'} = Q*_M - phi for random phi ~ U[-1, 1], tolerance 1e-8, with
/// matching argmax sets, over random obstacle maps.
CheckResult verify_invariance(const VerifyParams& params);
/// With phi = V*_M: shaped rewards <= 1e-10, zero exactly on argmax actions,
/// V*_{M'} == 0 within 1e-8.
CheckResult verify_nonpositive(const VerifyParams& params);
/// Tabular alternating adaptation reaches ||V - V*|| <= 1e-3 within the
/// sweep budget; (A*, V*) is a fixed point within 1e-10.
CheckResult verify_alternating(const VerifyParams& params);

VerifyReport run_verify(const VerifyParams& params);
std::string format_report(const VerifyReport& report);

}  // namespace metashape::harness
