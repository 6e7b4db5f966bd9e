#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nnmarket/equilibrium.hpp"
#include "nnmarket/market.hpp"
#include "nnmarket/parallel.hpp"

namespace nnmarket {

struct TAxis {
  double lo = 0.05;
  double hi = 6.0;
  std::size_t steps = 60;

  double at(std::size_t i) const {
    if (steps <= 1) return lo;
    return i + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

struct TGrid {
  TAxis tn;
  TAxis tnon;
  std::size_t cells() const { return tn.steps * tnon.steps; }
};

/// One cell of a sweep. Optional columns are empty when the cell has no
/// verified equilibrium or could not be analysed.
struct SweepRow {
  double tn = 0.0;
  double tnon = 0.0;
  std::string regime;
  std::string label;  ///< a..e, NONE, UNSUPPORTED or benchmark
  std::optional<double> pn, pnon, ptilde, nn, nnon, pi_n, pi_non, pi_cp, euw;
  std::optional<double> pn_b, pnon_b, pi_n_b, pi_non_b, euw_b;
  std::optional<double> d_pi_n, d_pi_non, d_euw;
  std::string status = "ok";
  std::optional<double> disc_n, disc_non;  ///< benchmark price minus equilibrium price
  std::size_t equilibria = 0;
};

inline void fill_benchmark(SweepRow& row, const Outcome& b) {
  row.pn_b = b.profile.pn;
  row.pnon_b = b.profile.pnon;
  row.pi_n_b = b.pi_n;
  row.pi_non_b = b.pi_non;
  row.euw_b = b.euw;
}

inline void fill_outcome(SweepRow& row, const Outcome& o) {
  row.label = std::string(to_string(o.label));
  row.pn = o.profile.pn;
  row.pnon = o.profile.pnon;
  row.ptilde = o.profile.ptilde;
  row.nn = o.alloc.nn;
  row.nnon = o.alloc.nnon;
  row.pi_n = o.pi_n;
  row.pi_non = o.pi_non;
  row.pi_cp = o.pi_cp;
  row.euw = o.euw;
  if (row.pi_n_b) {
    row.d_pi_n = o.pi_n - *row.pi_n_b;
    row.d_pi_non = o.pi_non - *row.pi_non_b;
    row.d_euw = o.euw - *row.euw_b;
    row.disc_n = *row.pn_b - o.profile.pn;
    row.disc_non = *row.pnon_b - o.profile.pnon;
  }
}

/// Row for a single parameter set; `which` picks the equilibrium reported
/// when several verify.
inline SweepRow make_row(const MarketParams& p, const SolveResult& res, const Outcome& bench,
                         std::size_t which = 0) {
  SweepRow row;
  row.tn = p.tn;
  row.tnon = p.tnon;
  row.regime = std::string(to_string(res.regime));
  row.equilibria = res.equilibria.size();
  fill_benchmark(row, bench);
  if (res.equilibria.empty()) {
    row.label = "NONE";
  } else {
    fill_outcome(row, res.equilibria.at(which));
    if (res.equilibria.size() > 1) row.status = "multiple-spne";
  }
  return row;
}

inline SweepRow benchmark_row(const MarketParams& p, const Outcome& bench) {
  SweepRow row;
  row.tn = p.tn;
  row.tnon = p.tnon;
  row.regime = std::string(to_string(p.regime()));
  fill_benchmark(row, bench);
  fill_outcome(row, bench);
  return row;
}

inline SweepRow sweep_cell(MarketParams p, double tn, double tnon, const Tolerances& tol = {}) {
  p.tn = tn;
  p.tnon = tnon;
  try {
    const MarketParams v = validate_params(p);
    return make_row(v, solve_spne(v, tol), solve_benchmark(v));
  } catch (const Error& err) {
    SweepRow row;
    row.tn = tn;
    row.tnon = tnon;
    row.regime = "none";
    row.label = "UNSUPPORTED";
    row.status = std::string("error:") + std::string(to_string(err.code()));
    return row;
  }
}

/// Cells in (tn, tnon) lexicographic index order.
inline std::vector<SweepRow> sweep_region_map(const MarketParams& base, const TGrid& grid,
                                              const Tolerances& tol = {}) {
  if (grid.cells() == 0) throw Error(ErrorCode::EmptySweep, "transport grid has no cells");
  std::vector<SweepRow> rows(grid.cells());
  parallel_for(rows.size(), [&](std::size_t k) {
    const std::size_t i = k / grid.tnon.steps;
    const std::size_t j = k % grid.tnon.steps;
    rows[k] = sweep_cell(base, grid.tn.at(i), grid.tnon.at(j), tol);
  });
  return rows;
}

/// Same cells as sweep_region_map; a verified equilibrium that pays the
/// neutral ISP more than the benchmark is marked as an invariant violation.
inline std::vector<SweepRow> sweep_compare(const MarketParams& base, const TGrid& grid,
                                           const Tolerances& tol = {}) {
  std::vector<SweepRow> rows = sweep_region_map(base, grid, tol);
  for (SweepRow& row : rows) {
    if (row.d_pi_n && *row.d_pi_n > tol.tol) row.status = "invariant-violation:d_pi_n>0";
  }
  return rows;
}

struct MonotonicityReport {
  std::size_t label_returns_to_a = 0;
  std::size_t nnon_increases = 0;
  std::size_t ptilde_increases = 0;
  std::size_t multiple_spne = 0;
  bool clean() const {
    return label_returns_to_a + nnon_increases + ptilde_increases + multiple_spne == 0;
  }
};

/// Soft structural checks over a full sweep, walking each grid line in the
/// direction of increasing transport cost.
inline MonotonicityReport check_monotonicity(const std::vector<SweepRow>& rows, const TGrid& grid,
                                             double eps = 1e-9) {
  MonotonicityReport rep;
  const std::size_t ni = grid.tn.steps, nj = grid.tnon.steps;
  if (rows.size() != ni * nj) return rep;
  auto at = [&](std::size_t i, std::size_t j) -> const SweepRow& { return rows[i * nj + j]; };
  auto interior = [](const SweepRow& r) { return r.label == "b" || r.label == "c"; };
  auto step = [&](const SweepRow& prev, const SweepRow& next, bool& left_a) {
    if (prev.label == "a" && next.label != "a") left_a = true;
    if (left_a && next.label == "a") ++rep.label_returns_to_a;
    if (interior(prev) && interior(next) && *next.nnon > *prev.nnon + eps) ++rep.nnon_increases;
    if (interior(prev) && prev.label == next.label && *next.ptilde > *prev.ptilde + eps)
      ++rep.ptilde_increases;
  };
  for (std::size_t i = 0; i < ni; ++i) {
    bool left_a = false;
    for (std::size_t j = 1; j < nj; ++j) step(at(i, j - 1), at(i, j), left_a);
  }
  for (std::size_t j = 0; j < nj; ++j) {
    bool left_a = false;
    for (std::size_t i = 1; i < ni; ++i) step(at(i - 1, j), at(i, j), left_a);
  }
  for (const SweepRow& r : rows) rep.multiple_spne += r.equilibria > 1 ? 1 : 0;
  return rep;
}

}  // namespace nnmarket
