#include <cstdio>
#include <ostream>
#include <string>

#include "gpo/bnb.hpp"

namespace gpo {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace, std::size_t nvars) {
  os << "m,branch_id,lambda_m,lambda_star,longest_edge,volume";
  for (std::size_t i = 0; i < nvars; ++i) os << ",center_" << i + 1;
  os << ",f_center,ineq_violation_sum,eq_violation_sum,gap\n";
  for (const auto& r : trace) {
    os << r.m << ',' << r.branch_id << ',' << num(r.lambda_m) << ',' << num(r.lambda_star) << ','
       << num(r.longest_edge) << ',' << num(r.volume);
    for (double c : r.center) os << ',' << num(c);
    os << ',' << num(r.f_center) << ',' << num(r.ineq_violation_sum) << ','
       << num(r.eq_violation_sum) << ',' << num(r.gap) << '\n';
  }
}

}  // namespace gpo
