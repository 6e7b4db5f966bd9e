#pragma once

#include <optional>
#include <utility>

#include "nnmarket/market.hpp"

namespace nnmarket {

/// Payoff differences smaller than this are treated as ties when ISP NoN
/// picks between the premium and free branches.
inline constexpr double kTieEps = 1e-12;

struct SidePaymentThresholds {
  double pt1;
  double pt2;
  double pt3;
  double nnon_b;  ///< share argument of pt2
  double nnon_c;  ///< share argument of pt3
};

inline double side_payment_pt1(const MarketParams& p) { return p.kad * (1.0 - p.qf / p.qp); }
inline double side_payment_pt2(double nnon, const MarketParams& p) {
  return p.kad * (nnon - p.qf / p.qp);
}
inline double side_payment_pt3(double nnon, const MarketParams& p) {
  return p.kad * nnon * (1.0 - p.qf / p.qp);
}

inline SidePaymentThresholds thresholds(double pn, double pnon, const MarketParams& p) {
  require_large_transport(p);
  const double dp = pnon - pn;
  SidePaymentThresholds t;
  t.nnon_b = (p.tn + p.ku * p.qp - dp) / p.transport();
  t.nnon_c = (p.tn + p.ku * (p.qp - p.qf) - dp) / p.transport();
  t.pt1 = side_payment_pt1(p);
  t.pt2 = side_payment_pt2(t.nnon_b, p);
  t.pt3 = side_payment_pt3(t.nnon_c, p);
  return t;
}

/// Qualities (qn, qnon) the CP picks when it does not buy premium delivery.
inline std::pair<double, double> cp_best_response_z0(double dp, const MarketParams& p) {
  if (dp <= -p.tnon + kBoundaryEps) return {0.0, p.qf};
  if (dp < p.tn - kBoundaryEps) return {p.qf, p.qf};
  return {p.qf, 0.0};
}

/// Qualities the CP picks when it buys premium delivery, by region.
inline std::pair<double, double> cp_best_response_z1(DpRegion region, const MarketParams& p) {
  switch (region) {
    case DpRegion::C: return {p.qf, p.qp};
    case DpRegion::D:
      throw Error(ErrorCode::InfeasiblePremium, "no premium subscribers in region D");
    default: return {0.0, p.qp};
  }
}

/// The CP's best premium option at fixed prices, independent of the side
/// payment (every premium option pays ptilde * qp). Options that leave ISP
/// NoN without subscribers are not offered. Valid in both regimes; in the
/// large-transport regime it reproduces cp_best_response_z1 region by region.
struct PremiumOption {
  bool feasible = false;
  double qn = 0.0;
  Allocation alloc;
  double value = 0.0;  ///< advertising revenue kad*(nn*qn + nnon*qp)
};

inline PremiumOption premium_option(double pn, double pnon, const MarketParams& p) {
  const double dp = pnon - pn;
  const RegionCuts k = region_cuts(p);
  PremiumOption o;
  if (dp >= k.b2_d - kBoundaryEps) return o;
  o.feasible = true;
  const bool both_interior = dp > k.a_b1 + kBoundaryEps;
  const bool shared_feasible = dp < k.c_b2 - kBoundaryEps;
  o.qn = (both_interior && shared_feasible && dp >= k.b1_c - kBoundaryEps) ? p.qf : 0.0;
  o.alloc = eu_allocation(pn, pnon, o.qn, p.qp, p);
  o.value = p.kad * (o.alloc.nn * o.qn + o.alloc.nnon * p.qp);
  return o;
}

/// Stage-3 resolution for an explicit side payment. The CP takes premium
/// delivery when it is at least as good as the free-quality best response,
/// whose revenue is always kad*qf.
inline StrategyProfile cp_response(double pn, double pnon, double ptilde, const MarketParams& p) {
  StrategyProfile s{pn, pnon, ptilde, 0.0, 0.0, 0};
  const PremiumOption prem = premium_option(pn, pnon, p);
  if (prem.feasible && prem.value - ptilde * p.qp >= p.kad * p.qf - kTieEps) {
    s.qn = prem.qn;
    s.qnon = p.qp;
    s.z = 1;
  } else {
    std::tie(s.qn, s.qnon) = cp_best_response_z0(pnon - pn, p);
  }
  return s;
}

enum class GameMode {
  NonNeutral,  ///< ISP NoN may sell premium delivery
  Benchmark,   ///< both ISPs neutral, z = 0 always
};

struct InducedPlay {
  std::optional<DpRegion> region;  ///< set in the large-transport regime only
  int z_choice = 0;
  StrategyProfile profile;
  Outcome outcome;
  double ptilde_threshold = 0.0;
  std::optional<double> pi_non_z1;  ///< unset when premium is infeasible
  double pi_non_z0 = 0.0;
};

/// Resolves Stages 2-4 at a fixed price pair in either regime.
inline InducedPlay resolve_play(double pn, double pnon, const MarketParams& p,
                                GameMode mode = GameMode::NonNeutral) {
  InducedPlay play;
  if (p.regime() == Regime::LargeTransport) play.region = classify_dp_region(pnon - pn, p);

  const PremiumOption prem = premium_option(pn, pnon, p);
  play.ptilde_threshold =
      prem.feasible ? (prem.value - p.kad * p.qf) / p.qp : side_payment_pt1(p);

  StrategyProfile free_play{pn, pnon, play.ptilde_threshold + 1.0, 0.0, 0.0, 0};
  std::tie(free_play.qn, free_play.qnon) = cp_best_response_z0(pnon - pn, p);
  const Allocation free_alloc = eu_allocation(pn, pnon, free_play.qn, free_play.qnon, p);
  Outcome free_outcome = make_outcome(free_play, free_alloc, p, Label::ad_hoc);
  play.pi_non_z0 = free_outcome.pi_non;

  if (mode == GameMode::NonNeutral && prem.feasible) {
    const StrategyProfile prem_play{pn, pnon, play.ptilde_threshold, prem.qn, p.qp, 1};
    Outcome prem_outcome = make_outcome(prem_play, prem.alloc, p, Label::ad_hoc);
    play.pi_non_z1 = prem_outcome.pi_non;
    if (prem_outcome.pi_non > free_outcome.pi_non + kTieEps) {
      play.z_choice = 1;
      play.profile = prem_play;
      play.outcome = prem_outcome;
      return play;
    }
  }
  play.profile = free_play;
  play.outcome = free_outcome;
  return play;
}

/// Large-transport evaluation kernel used by the deviation checks.
inline InducedPlay evaluate_profile(double pn, double pnon, const MarketParams& p) {
  require_large_transport(p);
  return resolve_play(pn, pnon, p, GameMode::NonNeutral);
}

}  // namespace nnmarket
