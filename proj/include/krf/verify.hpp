#ifndef KRF_VERIFY_HPP
#define KRF_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace krf {
namespace verify {

struct PropertyResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed value (error / margin)
  double tolerance = 0.0;
  std::string note;
};

/// Runs the selected property suite(s). Selectors: algebra, geometry,
/// functionals, invariants, flow, all.
std::vector<PropertyResult> run_suite(const std::string& selector,
                                      std::uint64_t seed = 2026);

/// Analytic random perturbation families (closed-form derivative bundles).
struct RandomStateFamily;

}  // namespace verify
}  // namespace krf

#endif
