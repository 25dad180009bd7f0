#include "fifd/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace fifd {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.steps) {
    out << trace.run_id << ',' << trace.algorithm << ',' << r.t << ',' << format_double(r.y_hat)
        << ',' << format_double(r.pseudo_regret) << ',' << format_double(r.abs_loss) << ','
        << format_double(r.cum_regret) << ',' << format_double(r.l2_error) << ','
        << format_double(r.lambda) << ',' << format_double(r.lambda_delta) << ',' << r.rank << ','
        << format_double(r.min_eig) << ',' << format_double(r.frt) << ','
        << format_double(r.beta) << ',' << (r.ellipsoid_valid ? 1 : 0) << ',' << r.window_size
        << '\n';
  }
}

namespace {

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw StructuralError("bad number '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw StructuralError("bad integer '" + s + "'");
  return v;
}

}  // namespace

TraceFile read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw StructuralError("trace header mismatch");
  }
  TraceFile out;
  std::vector<std::string> f;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    f.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 16) throw StructuralError("trace row has " + std::to_string(f.size()) + " fields");
    out.run_id = static_cast<int>(to_long(f[0]));
    out.algorithm = f[1];
    StepRecord r;
    r.t = to_long(f[2]);
    r.y_hat = to_double(f[3]);
    r.pseudo_regret = to_double(f[4]);
    r.abs_loss = to_double(f[5]);
    r.cum_regret = to_double(f[6]);
    r.l2_error = to_double(f[7]);
    r.lambda = to_double(f[8]);
    r.lambda_delta = to_double(f[9]);
    r.rank = static_cast<int>(to_long(f[10]));
    r.min_eig = to_double(f[11]);
    r.frt = to_double(f[12]);
    r.beta = to_double(f[13]);
    r.ellipsoid_valid = to_long(f[14]) != 0;
    r.window_size = static_cast<std::size_t>(to_long(f[15]));
    out.steps.push_back(r);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const AggregateCurve& curve, long first_t) {
  out << kSummaryHeader << '\n';
  for (std::size_t i = 0; i < curve.mean.size(); ++i) {
    out << first_t + static_cast<long>(i) << ',' << format_double(curve.mean[i]) << ','
        << format_double(curve.std_error[i]) << ',' << curve.runs << ','
        << (curve.stderr_defined ? 1 : 0) << '\n';
  }
}

void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
  out << kBoundHeader << '\n';
  for (const auto& b : rows) {
    out << b.run_id << ',' << b.algorithm << ',' << format_double(b.report.bound_value) << ','
        << format_double(b.report.regret_actual) << ',' << (b.report.holds ? 1 : 0) << ','
        << (b.report.conditions_met ? 1 : 0) << ',' << format_double(b.report.zeta) << ','
        << format_double(b.eta) << '\n';
  }
}

}  // namespace fifd
