#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fifd/diagnostics.hpp"
#include "fifd/simharness.hpp"

namespace fifd {

inline constexpr std::string_view kTraceHeader =
    "run_id,algorithm,t,y_hat,pseudo_regret,abs_loss,cum_regret,l2_error,lambda,lambda_delta,"
    "rank,min_eig,frt,beta,ellipsoid_valid,window_size";
inline constexpr std::string_view kSummaryHeader = "t,mean,std_error,runs,stderr_defined";
inline constexpr std::string_view kBoundHeader =
    "run_id,algorithm,bound_value,regret_actual,holds,conditions_met,zeta,eta";

// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct TraceFile {
  int run_id = 0;
  std::string algorithm;
  std::vector<StepRecord> steps;  // serialized columns only
};
// Throws StructuralError on a header or row mismatch.
TraceFile read_trace_csv(std::istream& in);

void write_summary_csv(std::ostream& out, const AggregateCurve& curve, long first_t);

struct BoundRow {
  int run_id = 0;
  std::string algorithm;
  BoundReport report;
  double eta = 0.0;
};
void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows);

}  // namespace fifd
