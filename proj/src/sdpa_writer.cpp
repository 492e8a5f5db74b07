#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "gpo/sdp.hpp"

namespace gpo::sdp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_sdpa(std::ostream& os, const Problem& problem) {
  problem.validate();
  const int nb = static_cast<int>(problem.block_dims.size());
  const bool has_lp = problem.free_vars > 0;
  const int lp_block = nb + 1;
  os << "\"gpo sdp: SDPA dual form, F0 = -C\"\n";
  os << problem.constraints.size() << " = mDIM\n";
  os << nb + (has_lp ? 1 : 0) << " = nBLOCK\n";
  for (int d : problem.block_dims) os << d << ' ';
  if (has_lp) os << -2 * problem.free_vars;
  os << " = bLOCKsTRUCT\n";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    os << (i ? " " : "") << num(problem.constraints[i].rhs);
  }
  os << '\n';
  // F0 = -C; free u = u+ - u- contributes c_f to both LP slots with opposite signs.
  for (const auto& e : problem.objective) {
    if (e.value == 0.0) continue;
    os << "0 " << e.block + 1 << ' ' << std::min(e.row, e.col) + 1 << ' '
       << std::max(e.row, e.col) + 1 << ' ' << num(-e.value) << '\n';
  }
  for (int j = 0; j < problem.free_vars; ++j) {
    const double c = problem.free_objective[static_cast<std::size_t>(j)];
    if (c == 0.0) continue;
    os << "0 " << lp_block << ' ' << 2 * j + 1 << ' ' << 2 * j + 1 << ' ' << num(-c) << '\n';
    os << "0 " << lp_block << ' ' << 2 * j + 2 << ' ' << 2 * j + 2 << ' ' << num(c) << '\n';
  }
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    for (const auto& e : con.entries) {
      if (e.value == 0.0) continue;
      os << i + 1 << ' ' << e.block + 1 << ' ' << std::min(e.row, e.col) + 1 << ' '
         << std::max(e.row, e.col) + 1 << ' ' << num(e.value) << '\n';
    }
    for (const auto& [j, v] : con.free_coefficients) {
      if (v == 0.0) continue;
      os << i + 1 << ' ' << lp_block << ' ' << 2 * j + 1 << ' ' << 2 * j + 1 << ' ' << num(v) << '\n';
      os << i + 1 << ' ' << lp_block << ' ' << 2 * j + 2 << ' ' << 2 * j + 2 << ' ' << num(-v) << '\n';
    }
  }
}

}  // namespace gpo::sdp
