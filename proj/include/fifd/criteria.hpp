#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fifd::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  double measured = 0.0;
  std::string relation;  // how measured compares to threshold when passing
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

// One line, key=value fields.
std::string format_result(const CheckResult& r);

CheckResult oracle_equivalence();       // 1
CheckResult update_round_trip();        // 2
CheckResult determinant_identity();     // 3
CheckResult frt_cases();                // 4
CheckResult rank_swinging();            // 5
CheckResult regret_linearity();         // 6
CheckResult growing_window_sublinear(); // 7
CheckResult adaptive_vs_fixed();        // 8
CheckResult l2_error_bound();           // 9
CheckResult ellipsoid_coverage();       // 10
std::vector<CheckResult> regret_bounds_and_decomposition();  // 11, 12
CheckResult determinism(const std::filesystem::path& scratch);  // 13

std::vector<std::string_view> suite_names();

// oracle: 1, 2   identities: 3, 4   bounds: 11, 12   coverage: 10.
// Throws std::invalid_argument for an unknown suite.
std::vector<CheckResult> run_suite(std::string_view suite);

}  // namespace fifd::checks
