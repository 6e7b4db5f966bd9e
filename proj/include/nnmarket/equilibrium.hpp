#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nnmarket/market.hpp"
#include "nnmarket/stage_game.hpp"

namespace nnmarket {

enum class Isp { N, NoN };

inline std::string_view to_string(Isp i) { return i == Isp::N ? "N" : "NoN"; }

struct Tolerances {
  double tol = 1e-9;  ///< a deviation must gain more than this to count
  double dev = 1e-6;  ///< inward offset from open region endpoints
};

/// A named closed-form check. Advisory checks are reported but do not gate
/// verification.
struct Condition {
  std::string name;
  bool holds = false;
  double slack = 0.0;
  bool advisory = false;
};

struct Candidate {
  Label label = Label::ad_hoc;
  StrategyProfile profile;
  std::vector<Condition> conditions;
};

struct DeviationReport {
  Isp isp = Isp::N;
  double price = 0.0;
  double payoff = 0.0;
  double incumbent_payoff = 0.0;
  double gain = 0.0;
  bool profitable = false;
};

struct Rejection {
  Label label = Label::ad_hoc;
  std::string reason;
  std::optional<DeviationReport> deviation;
};

struct SolveResult {
  std::vector<Outcome> equilibria;
  std::map<Label, Rejection> rejected;
  Regime regime = Regime::LargeTransport;
};

namespace detail {

inline Condition at_most(std::string name, double lhs, double rhs) {
  return Condition{std::move(name), lhs <= rhs + kBoundaryEps, rhs - lhs, false};
}

/// Open interval membership with the boundary tolerance applied inward.
inline Condition inside_open(std::string name, double x, double lo, double hi) {
  const double slack = std::min(x - lo, hi - x);
  return Condition{std::move(name), slack > kBoundaryEps, slack, false};
}

inline Condition premium_dominance(const StrategyProfile& s, const MarketParams& p) {
  const InducedPlay play = resolve_play(s.pn, s.pnon, p);
  const double slack = play.pi_non_z1 ? *play.pi_non_z1 - play.pi_non_z0
                                      : -std::numeric_limits<double>::infinity();
  const bool matches = play.z_choice == 1 && play.profile.qn == s.qn;
  return Condition{"z-branch dominance", matches, slack, false};
}

inline double cand_dp(const Candidate& cand) { return cand.profile.pnon - cand.profile.pn; }

inline bool near(double x, double cut) { return std::abs(x - cut) <= kBoundaryEps; }

}  // namespace detail

inline Candidate candidate_a(const MarketParams& p) {
  Candidate cand;
  cand.label = Label::a;
  cand.profile = StrategyProfile{p.c, p.c + p.ku * p.qp - p.tnon, side_payment_pt1(p), 0.0, p.qp, 1};
  const RegionCuts k = region_cuts(p);
  cand.conditions.push_back(detail::at_most("dp in A", detail::cand_dp(cand), k.a_b1));
  cand.conditions.push_back(detail::at_most("(tn+2tnon)/(ku+kad) <= qp",
                                            (p.tn + 2.0 * p.tnon) / (p.ku + p.kad), p.qp));
  cand.conditions.push_back(detail::premium_dominance(cand.profile, p));
  Condition cost = detail::at_most("pnon >= c", p.c, cand.profile.pnon);
  cost.advisory = true;
  cand.conditions.push_back(cost);
  return cand;
}

inline Candidate candidate_b(const MarketParams& p) {
  const double T = p.transport();
  Candidate cand;
  cand.label = Label::b;
  const double pnon = p.c + (p.tnon + 2.0 * p.tn + p.qp * (p.ku - 2.0 * p.kad)) / 3.0;
  const double pn = p.c + (2.0 * p.tnon + p.tn - p.qp * (p.ku + p.kad)) / 3.0;
  const double nnon = (2.0 * p.tn + p.tnon + p.qp * (p.ku + p.kad)) / (3.0 * T);
  cand.profile = StrategyProfile{pn, pnon, side_payment_pt2(nnon, p), 0.0, p.qp, 1};
  const RegionCuts k = region_cuts(p);
  const double dp = pnon - pn;
  if (p.regime() == Regime::LargeTransport) {
    if (detail::near(dp, k.c_b2)) {
      cand.conditions.push_back(Condition{"boundary-excluded", false, 0.0, false});
    } else {
      Condition b1 = detail::inside_open("dp in B1", dp, k.a_b1, k.b1_c);
      Condition b2 = detail::inside_open("dp in B2", dp, k.c_b2, k.b2_d);
      cand.conditions.push_back(
          Condition{"dp in B1 or B2", b1.holds || b2.holds, std::max(b1.slack, b2.slack), false});
    }
  } else {
    cand.conditions.push_back(detail::inside_open("dp in premium interior", dp, k.a_b1, k.b2_d));
  }
  cand.conditions.push_back(
      detail::at_most("qp <= (2tnon+tn)/(ku+kad)", p.qp, (2.0 * p.tnon + p.tn) / (p.ku + p.kad)));
  cand.conditions.push_back(detail::premium_dominance(cand.profile, p));
  return cand;
}

inline Candidate candidate_c(const MarketParams& p) {
  const double T = p.transport();
  const double dq = p.qp - p.qf;
  Candidate cand;
  cand.label = Label::c;
  const double pnon = p.c + (p.tnon + 2.0 * p.tn + dq * (p.ku - 2.0 * p.kad)) / 3.0;
  const double pn = p.c + (2.0 * p.tnon + p.tn - dq * (p.ku + p.kad)) / 3.0;
  const double nnon = (2.0 * p.tn + p.tnon + dq * (p.ku + p.kad)) / (3.0 * T);
  cand.profile = StrategyProfile{pn, pnon, side_payment_pt3(nnon, p), p.qf, p.qp, 1};
  const RegionCuts k = region_cuts(p);
  const double dp = pnon - pn;
  if (detail::near(dp, k.c_b2) || detail::near(dp, k.b1_c)) {
    cand.conditions.push_back(Condition{"boundary-excluded", false, 0.0, false});
  } else {
    cand.conditions.push_back(detail::inside_open("dp in C", dp, k.b1_c, k.c_b2));
  }
  cand.conditions.push_back(
      detail::at_most("qp-qf <= (2tnon+tn)/(ku+kad)", dq, (2.0 * p.tnon + p.tn) / (p.ku + p.kad)));
  cand.conditions.push_back(detail::premium_dominance(cand.profile, p));
  return cand;
}

inline Candidate candidate_d(const MarketParams& p) {
  const double T = p.transport();
  Candidate cand;
  cand.label = Label::d;
  const double pn = p.c - p.ku * (2.0 * p.qp - p.qf) + p.tnon;
  const double nnon = (T - p.ku * p.qp) / T;
  cand.profile = StrategyProfile{pn, p.c, side_payment_pt3(nnon, p), p.qf, p.qp, 1};
  cand.conditions.push_back(detail::at_most("2qp-qf <= tnon/ku", 2.0 * p.qp - p.qf, p.tnon / p.ku));
  cand.conditions.push_back(detail::premium_dominance(cand.profile, p));
  return cand;
}

inline Candidate candidate_e(const MarketParams& p) {
  Candidate cand;
  cand.label = Label::e;
  const double pn = p.c + (2.0 * p.tnon + p.tn) / 3.0;
  const double pnon = p.c + (2.0 * p.tn + p.tnon) / 3.0;
  const InducedPlay play = resolve_play(pn, pnon, p);
  cand.profile = StrategyProfile{pn, pnon, play.ptilde_threshold + 1.0, p.qf, p.qf, 0};
  const double slack = play.pi_non_z1 ? play.pi_non_z0 - *play.pi_non_z1
                                      : std::numeric_limits<double>::infinity();
  cand.conditions.push_back(Condition{"free branch dominance", play.z_choice == 0, slack, false});
  return cand;
}

/// Searches ISP `isp`'s own price for the most profitable unilateral move.
/// Payoffs are piecewise quadratic in own price with breaks at the region
/// cuts, so the supremum is attained at a first-order point or at an
/// endpoint of some piece.
inline DeviationReport best_deviation(Isp isp, double opponent_price, double incumbent_payoff,
                                      const MarketParams& p, GameMode mode = GameMode::NonNeutral,
                                      const Tolerances& tol = {},
                                      std::optional<double> incumbent_price = std::nullopt) {
  const RegionCuts k = region_cuts(p);
  std::vector<double> dp_cuts{-p.tnon, p.tn};
  if (mode == GameMode::NonNeutral) {
    dp_cuts.insert(dp_cuts.end(), {k.a_b1, k.b1_c, k.c_b2, k.b2_d});
  }
  const bool own_non = isp == Isp::NoN;
  std::vector<double> breaks;
  for (double cut : dp_cuts) breaks.push_back(own_non ? opponent_price + cut : opponent_price - cut);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double dq = p.qp - p.qf;
  std::vector<double> vertices;
  if (own_non) {
    vertices = {(p.tn + opponent_price + p.c) / 2.0,
                (p.tn + p.ku * p.qp + opponent_price + p.c - p.kad * p.qp) / 2.0,
                (p.tn + p.ku * dq + opponent_price + p.c - p.kad * dq) / 2.0};
  } else {
    vertices = {(p.tnon + opponent_price + p.c) / 2.0,
                (p.tnon - p.ku * p.qp + opponent_price + p.c) / 2.0,
                (p.tnon - p.ku * dq + opponent_price + p.c) / 2.0};
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prices{p.c};
  if (incumbent_price) prices.push_back(*incumbent_price);
  prices.insert(prices.end(), breaks.begin(), breaks.end());
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double l = i == 0 ? -inf : breaks[i - 1];
    const double r = i == breaks.size() ? inf : breaks[i];
    double lo = l + tol.dev;
    double hi = r - tol.dev;
    if (lo > hi) lo = hi = 0.5 * (l + r);
    if (std::isfinite(lo)) prices.push_back(lo);
    if (std::isfinite(hi)) prices.push_back(hi);
    for (double v : vertices) prices.push_back(std::clamp(v, lo, hi));
  }
  std::sort(prices.begin(), prices.end());

  DeviationReport best;
  best.isp = isp;
  best.incumbent_payoff = incumbent_payoff;
  best.payoff = -inf;
  for (double price : prices) {
    const double pn = own_non ? opponent_price : price;
    const double pnon = own_non ? price : opponent_price;
    const InducedPlay play = resolve_play(pn, pnon, p, mode);
    const double payoff = own_non ? play.outcome.pi_non : play.outcome.pi_n;
    if (payoff > best.payoff) {
      best.payoff = payoff;
      best.price = price;
    }
  }
  best.gain = best.payoff - incumbent_payoff;
  best.profitable = best.payoff > incumbent_payoff + tol.tol;
  return best;
}

inline std::string describe(const Condition& cond) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "condition failed: %s (slack %.6g)", cond.name.c_str(), cond.slack);
  return buf;
}

inline std::string describe(const DeviationReport& dev) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "profitable deviation: ISP %s to price %.9g gains %.6g",
                std::string(to_string(dev.isp)).c_str(), dev.price, dev.gain);
  return buf;
}

inline std::variant<Outcome, Rejection> verify_ne(const Candidate& cand, const MarketParams& p,
                                                  const Tolerances& tol = {}) {
  for (const Condition& cond : cand.conditions) {
    if (!cond.advisory && !cond.holds) return Rejection{cand.label, describe(cond), std::nullopt};
  }
  const StrategyProfile& s = cand.profile;
  const InducedPlay play = resolve_play(s.pn, s.pnon, p);
  for (Isp isp : {Isp::N, Isp::NoN}) {
    const bool own_non = isp == Isp::NoN;
    const DeviationReport dev =
        best_deviation(isp, own_non ? s.pn : s.pnon,
                       own_non ? play.outcome.pi_non : play.outcome.pi_n, p,
                       GameMode::NonNeutral, tol, own_non ? s.pnon : s.pn);
    if (dev.profitable) return Rejection{cand.label, describe(dev), dev};
  }
  Outcome out = play.outcome;
  out.label = cand.label;
  return out;
}

inline std::vector<Candidate> all_candidates(const MarketParams& p) {
  return {candidate_a(p), candidate_b(p), candidate_c(p), candidate_d(p), candidate_e(p)};
}

inline SolveResult solve_spne(const MarketParams& raw, const Tolerances& tol = {}) {
  const MarketParams p = validate_params(raw);
  SolveResult result;
  result.regime = p.regime();
  const bool small = result.regime == Regime::SmallTransport;
  std::vector<Candidate> cands{candidate_a(p), candidate_b(p)};
  if (small) {
    for (Label l : {Label::c, Label::d, Label::e})
      result.rejected[l] = Rejection{l, "not evaluated in the small-transport regime", std::nullopt};
  } else {
    cands.push_back(candidate_c(p));
    cands.push_back(candidate_d(p));
    cands.push_back(candidate_e(p));
  }
  for (const Candidate& cand : cands) {
    auto verdict = verify_ne(cand, p, tol);
    if (auto* out = std::get_if<Outcome>(&verdict)) {
      result.equilibria.push_back(*out);
    } else {
      result.rejected[cand.label] = std::get<Rejection>(verdict);
    }
  }
  return result;
}

inline Outcome solve_benchmark(const MarketParams& raw) {
  const MarketParams p = validate_params(raw);
  const StrategyProfile s{p.c + (2.0 * p.tnon + p.tn) / 3.0, p.c + (2.0 * p.tn + p.tnon) / 3.0,
                          0.0, p.qf, p.qf, 0};
  return make_outcome(s, eu_allocation(s.pn, s.pnon, s.qn, s.qnon, p), p, Label::benchmark);
}

}  // namespace nnmarket
