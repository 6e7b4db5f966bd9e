#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "nnmarket/equilibrium.hpp"
#include "nnmarket/market.hpp"
#include "nnmarket/parallel.hpp"
#include "nnmarket/stage_game.hpp"

namespace nnmarket {

/// Uniform price grid shared by both ISPs.
struct GridSpec {
  double price_lo = 0.0;
  double price_hi = 1.0;
  std::size_t steps = 2001;
  std::size_t quality_steps = 301;
  /// Overrides the approximate-Nash tolerance derived from the grid step.
  std::optional<double> nash_tol;

  double step() const { return (price_hi - price_lo) / static_cast<double>(steps - 1); }
  double price(std::size_t i) const {
    return i + 1 == steps ? price_hi : price_lo + step() * static_cast<double>(i);
  }
};

inline GridSpec default_grid(const MarketParams& p, std::size_t steps = 2001) {
  return GridSpec{p.c, p.c + 2.0 * p.transport() + p.ku * p.qp, steps, 301, std::nullopt};
}

inline void check_grid(const GridSpec& g) {
  if (g.steps < 3 || !(g.price_hi > g.price_lo) || g.quality_steps < 2)
    throw Error(ErrorCode::Config, "grid needs steps >= 3, quality_steps >= 2 and price_hi > price_lo");
}

/// The non-neutral game is only searched where the region ordering holds;
/// the benchmark game has no regime restriction.
inline void check_mode(const MarketParams& p, GameMode mode) {
  if (mode == GameMode::NonNeutral) require_large_transport(p);
}

struct GridResponse {
  double price = 0.0;
  double payoff = 0.0;
  std::size_t index = 0;
};

namespace detail {

inline std::pair<double, double> grid_payoffs(double pn, double pnon, const MarketParams& p,
                                              GameMode mode) {
  const InducedPlay play = resolve_play(pn, pnon, p, mode);
  return {play.outcome.pi_n, play.outcome.pi_non};
}

/// Discrete state of the induced play; payoffs are smooth in own price while
/// this stays fixed.
inline auto play_state(const InducedPlay& play) {
  return std::make_tuple(play.z_choice, play.profile.qn, play.profile.qnon,
                         play.outcome.alloc.nn == 0.0, play.outcome.alloc.nn == 1.0);
}

/// Largest own-price slope over neighbouring grid points that share a play
/// state, sampled along a subset of opponent prices.
inline double estimate_lipschitz(Isp isp, const MarketParams& p, const GridSpec& g, GameMode mode) {
  const std::size_t rows = std::min<std::size_t>(64, g.steps);
  double best = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double opp = g.price(r * (g.steps - 1) / (rows - 1));
    std::optional<InducedPlay> prev;
    for (std::size_t i = 0; i < g.steps; ++i) {
      const double own = g.price(i);
      InducedPlay cur = isp == Isp::N ? resolve_play(own, opp, p, mode) : resolve_play(opp, own, p, mode);
      if (prev && play_state(*prev) == play_state(cur)) {
        const double a = isp == Isp::N ? prev->outcome.pi_n : prev->outcome.pi_non;
        const double b = isp == Isp::N ? cur.outcome.pi_n : cur.outcome.pi_non;
        best = std::max(best, std::abs(b - a) / g.step());
      }
      prev = std::move(cur);
    }
  }
  return best;
}

}  // namespace detail

/// Argmax of the ISP's payoff over the grid; ties go to the lowest price.
inline GridResponse grid_best_response(Isp isp, double opponent_price, const MarketParams& p,
                                       const GridSpec& g, GameMode mode = GameMode::NonNeutral) {
  check_grid(g);
  check_mode(p, mode);
  GridResponse best{g.price(0), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < g.steps; ++i) {
    const double own = g.price(i);
    const auto [pi_n, pi_non] = isp == Isp::N ? detail::grid_payoffs(own, opponent_price, p, mode)
                                              : detail::grid_payoffs(opponent_price, own, p, mode);
    const double payoff = isp == Isp::N ? pi_n : pi_non;
    if (payoff > best.payoff) best = GridResponse{own, payoff, i};
  }
  return best;
}

struct GridPoint {
  std::size_t i = 0;  ///< index of pn
  std::size_t j = 0;  ///< index of pnon
  double pn = 0.0;
  double pnon = 0.0;
  double pi_n = 0.0;
  double pi_non = 0.0;
};

struct GridNashResult {
  std::vector<GridPoint> points;  ///< ordered by (i, j)
  double step = 0.0;
  double lipschitz_n = 0.0;
  double lipschitz_non = 0.0;
  double tol_n = 0.0;
  double tol_non = 0.0;

  bool has_point_near(double pn, double pnon, double radius) const {
    return std::any_of(points.begin(), points.end(), [&](const GridPoint& q) {
      return std::abs(q.pn - pn) <= radius && std::abs(q.pnon - pnon) <= radius;
    });
  }
};

/// All grid profiles at which neither ISP gains more than the tolerance by
/// moving to its grid best response.
inline GridNashResult grid_nash_search(const MarketParams& p, const GridSpec& g,
                                       GameMode mode = GameMode::NonNeutral) {
  check_grid(g);
  check_mode(p, mode);
  GridNashResult res;
  res.step = g.step();
  res.lipschitz_n = detail::estimate_lipschitz(Isp::N, p, g, mode);
  res.lipschitz_non = detail::estimate_lipschitz(Isp::NoN, p, g, mode);
  res.tol_n = g.nash_tol.value_or(2.0 * res.step * res.lipschitz_n);
  res.tol_non = g.nash_tol.value_or(2.0 * res.step * res.lipschitz_non);

  const std::size_t n = g.steps;
  std::vector<double> best_n(n), best_non(n);
  parallel_for(n, [&](std::size_t j) {
    best_n[j] = grid_best_response(Isp::N, g.price(j), p, g, mode).payoff;
  });
  parallel_for(n, [&](std::size_t i) {
    best_non[i] = grid_best_response(Isp::NoN, g.price(i), p, g, mode).payoff;
  });

  std::vector<std::vector<GridPoint>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const double pn = g.price(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double pnon = g.price(j);
      const auto [pi_n, pi_non] = detail::grid_payoffs(pn, pnon, p, mode);
      if (pi_n >= best_n[j] - res.tol_n && pi_non >= best_non[i] - res.tol_non)
        rows[i].push_back(GridPoint{i, j, pn, pnon, pi_n, pi_non});
    }
  });
  for (auto& row : rows) res.points.insert(res.points.end(), row.begin(), row.end());
  return res;
}

struct BrIteration {
  double pn = 0.0;
  double pnon = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Alternating grid best responses (N first) until neither price moves.
inline BrIteration grid_br_iteration(const MarketParams& p, const GridSpec& g, double pn0,
                                     double pnon0, GameMode mode = GameMode::NonNeutral,
                                     std::size_t max_iter = 500) {
  BrIteration it{pn0, pnon0, 0, false};
  for (; it.iterations < max_iter; ++it.iterations) {
    const double pn = grid_best_response(Isp::N, it.pnon, p, g, mode).price;
    const double pnon = grid_best_response(Isp::NoN, pn, p, g, mode).price;
    const bool fixed = pn == it.pn && pnon == it.pnon;
    it.pn = pn;
    it.pnon = pnon;
    if (fixed) {
      it.converged = true;
      break;
    }
  }
  return it;
}

struct CpChoice {
  double qn = 0.0;
  double qnon = 0.0;
  int z = 0;
  double payoff = 0.0;
};

/// Exhaustive CP search over the quality rectangle [0,qf] x [0,qp]; premium
/// delivery is implied by qnon > qf. The qnon axis also carries qf itself.
/// Scans qualities upward and keeps the first maximizer, so flat directions
/// resolve to the lowest qualities.
inline CpChoice cp_brute_force(double pn, double pnon, double ptilde, const MarketParams& p,
                               std::size_t quality_steps = 301) {
  if (quality_steps < 2) throw Error(ErrorCode::Config, "quality_steps must be >= 2");
  const double last = static_cast<double>(quality_steps - 1);
  std::vector<double> qnon_axis{p.qf};
  for (std::size_t b = 0; b < quality_steps; ++b)
    qnon_axis.push_back(b + 1 == quality_steps ? p.qp : p.qp * static_cast<double>(b) / last);
  std::sort(qnon_axis.begin(), qnon_axis.end());
  qnon_axis.erase(std::unique(qnon_axis.begin(), qnon_axis.end()), qnon_axis.end());
  CpChoice best{0.0, 0.0, 0, -std::numeric_limits<double>::infinity()};
  for (std::size_t a = 0; a < quality_steps; ++a) {
    const double qn = a + 1 == quality_steps ? p.qf : p.qf * static_cast<double>(a) / last;
    for (double qnon : qnon_axis) {
      const int z = qnon > p.qf ? 1 : 0;
      const StrategyProfile s{pn, pnon, ptilde, qn, qnon, z};
      const double payoff = cp_payoff(s, eu_allocation(pn, pnon, qn, qnon, p), p);
      if (payoff > best.payoff + kTieEps) best = CpChoice{qn, qnon, z, payoff};
    }
  }
  return best;
}

struct OracleCheck {
  std::string label;
  bool verified = false;
  bool grid_match = false;
  double pn = 0.0;
  double pnon = 0.0;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  std::size_t grid_points = 0;
  double step = 0.0;
  double tol_n = 0.0;
  double tol_non = 0.0;
  bool agree = false;
};

/// Compares solve_spne with grid_nash_search. Every verified equilibrium
/// needs a grid Nash point within one step; when nothing verifies, no
/// candidate profile may have one.
inline OracleReport cross_check(const MarketParams& p, const GridSpec& g, const Tolerances& tol = {}) {
  const SolveResult res = solve_spne(p, tol);
  const GridNashResult grid = grid_nash_search(p, g);
  OracleReport rep;
  rep.grid_points = grid.points.size();
  rep.step = grid.step;
  rep.tol_n = grid.tol_n;
  rep.tol_non = grid.tol_non;
  rep.agree = true;
  for (const Candidate& cand : all_candidates(p)) {
    OracleCheck chk;
    chk.label = std::string(to_string(cand.label));
    chk.pn = cand.profile.pn;
    chk.pnon = cand.profile.pnon;
    chk.verified = std::any_of(res.equilibria.begin(), res.equilibria.end(),
                               [&](const Outcome& o) { return o.label == cand.label; });
    chk.grid_match = grid.has_point_near(chk.pn, chk.pnon, grid.step);
    if (chk.verified && !chk.grid_match) rep.agree = false;
    if (res.equilibria.empty() && chk.grid_match) rep.agree = false;
    rep.checks.push_back(chk);
  }
  return rep;
}

}  // namespace nnmarket
