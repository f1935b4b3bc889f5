// Exponent-grid sweeps: one row per (a, b) pair combining the criterion
// verdict, the solved competitor, its verification, and (optionally) the
// descent oracle's length.  Rows compute in a worker pool but land in
// lexicographic (a, b) order by construction, and per-row failures are
// recorded in the row instead of aborting the sweep.
#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "srlab/competitor.hpp"
#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"
#include "srlab/optimizer.hpp"
#include "srlab/structure.hpp"

namespace srlab {

// Absent values (non-constructible rows, skipped optimizer) are quiet NaN
// in memory and empty cells in CSV.
struct SweepRow {
  int a = 0, b = 0, c = 2;
  double eps = 0.0;
  bool constructible = false;
  double margin = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double L_gamma = std::numeric_limits<double>::quiet_NaN();
  double L_omega = std::numeric_limits<double>::quiet_NaN();
  double gain_net = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double optimizer_length = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the row completed cleanly
};

// One (a, b) cell.  Any library error is captured into row.error; fields
// computed before the failure keep their values.
inline SweepRow sweep_row(int a, int b, int c, double eps,
                          bool with_optimizer, std::size_t verify_nodes = 32768,
                          std::size_t optimizer_nodes = 400) {
  SweepRow row;
  row.a = a;
  row.b = b;
  row.c = c;
  row.eps = eps;
  try {
    const StructureDef s = StructureDef::polynomial(a, b, c);
    const CriterionReport cr = criterion(s);
    row.margin = cr.margin;
    row.constructible = cr.constructible;
    if (cr.constructible) {
      const CompetitorParams cp = solve_params(eps, s);
      const VerificationReport vr = verify_competitor(cp, s, verify_nodes);
      row.rho = cp.rho;
      row.delta = cp.delta;
      row.L_gamma = vr.L_gamma;
      row.L_omega = vr.L_omega;
      row.gain_net = vr.gain_net;
      row.residual = vr.constraint_residual;
      if (with_optimizer)
        row.optimizer_length =
            optimize_multistart(eps, s, optimizer_nodes, {}, false)
                .best.length;
    }
  } catch (const error& e) {
    row.error = e.what();
  }
  return row;
}

inline std::vector<SweepRow> sweep(const std::vector<int>& a_values,
                                   const std::vector<int>& b_values, int c,
                                   double eps, bool with_optimizer,
                                   std::size_t workers = 0) {
  if (a_values.empty() || b_values.empty())
    throw domain_error("sweep: exponent ranges must be nonempty");
  if (c < 2) throw domain_error("sweep: c must be >= 2");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw domain_error("sweep: eps must be positive and finite");
  std::vector<std::pair<int, int>> cells;
  cells.reserve(a_values.size() * b_values.size());
  for (int a : a_values)
    for (int b : b_values) cells.emplace_back(a, b);

  std::vector<SweepRow> rows(cells.size());
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<std::size_t>(workers, cells.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      rows[i] = sweep_row(cells[i].first, cells[i].second, c, eps,
                          with_optimizer);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  return rows;
}

namespace detail {

// RFC-4180 quoting for the error column; numbers never need it.
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string csv_opt(double v) {
  return std::isnan(v) ? std::string() : fmt17(v);
}

}  // namespace detail

// Header plus one line per row; 17 significant digits; absent fields are
// empty cells.  Byte-identical across runs with identical inputs.
inline void write_sweep_csv(std::ostream& os,
                            const std::vector<SweepRow>& rows) {
  os << "a,b,c,eps,constructible,margin,rho,delta,L_gamma,L_omega,gain_net,"
        "residual,optimizer_length,error\n";
  for (const SweepRow& r : rows) {
    os << r.a << ',' << r.b << ',' << r.c << ',' << fmt17(r.eps) << ','
       << (r.constructible ? "true" : "false") << ',' << fmt17(r.margin)
       << ',' << detail::csv_opt(r.rho) << ',' << detail::csv_opt(r.delta)
       << ',' << detail::csv_opt(r.L_gamma) << ','
       << detail::csv_opt(r.L_omega) << ',' << detail::csv_opt(r.gain_net)
       << ',' << detail::csv_opt(r.residual) << ','
       << detail::csv_opt(r.optimizer_length) << ','
       << detail::csv_quote(r.error) << '\n';
  }
}

}  // namespace srlab
