#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nnmarket {

/// Error categories surfaced by the library. Every thrown nnmarket::Error
/// carries one of these so front ends can map them to exit codes.
enum class ErrorCode {
  NonPositiveParameter,
  QualityOrderViolation,
  RegimeUnsupported,
  InfeasiblePremium,
  EmptySweep,
  WriteFailure,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::QualityOrderViolation: return "QualityOrderViolation";
    case ErrorCode::RegimeUnsupported: return "RegimeUnsupported";
    case ErrorCode::InfeasiblePremium: return "InfeasiblePremium";
    case ErrorCode::EmptySweep: return "EmptySweep";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Absolute tolerance used when comparing a price difference against a
/// region cut point.
inline constexpr double kBoundaryEps = 1e-12;

enum class Regime {
  LargeTransport,  ///< tn + tnon > ku * qp
  SmallTransport,  ///< tn + tnon <= ku * qp
};

inline std::string_view to_string(Regime r) {
  return r == Regime::LargeTransport ? "large-transport" : "small-transport";
}

struct MarketParams {
  double qf = 1.0;
  double qp = 1.5;
  double c = 1.0;
  double ku = 1.0;
  double kad = 0.5;
  double tn = 1.0;
  double tnon = 1.0;

  double transport() const { return tn + tnon; }
  Regime regime() const {
    return transport() > ku * qp ? Regime::LargeTransport : Regime::SmallTransport;
  }
  bool operator==(const MarketParams&) const = default;
};

inline MarketParams validate_params(double qf, double qp, double c, double ku, double kad,
                                    double tn, double tnon) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::NonPositiveParameter, std::string(name) + " must be finite and > 0");
  };
  positive(qf, "qf");
  positive(qp, "qp");
  positive(ku, "ku");
  positive(kad, "kad");
  positive(tn, "tn");
  positive(tnon, "tnon");
  if (!(c >= 0.0) || !std::isfinite(c))
    throw Error(ErrorCode::NonPositiveParameter, "c must be finite and >= 0");
  if (!(qp > qf)) throw Error(ErrorCode::QualityOrderViolation, "qp must exceed qf");
  return MarketParams{qf, qp, c, ku, kad, tn, tnon};
}

inline MarketParams validate_params(const MarketParams& p) {
  return validate_params(p.qf, p.qp, p.c, p.ku, p.kad, p.tn, p.tnon);
}

struct StrategyProfile {
  double pn = 0.0;
  double pnon = 0.0;
  double ptilde = 0.0;
  double qn = 0.0;
  double qnon = 0.0;
  int z = 0;
};

struct Allocation {
  double xn = 0.0;
  double nn = 0.0;
  double nnon = 1.0;
};

enum class DpRegion { A, B1, C, B2, D };

inline std::string_view to_string(DpRegion r) {
  switch (r) {
    case DpRegion::A: return "A";
    case DpRegion::B1: return "B1";
    case DpRegion::C: return "C";
    case DpRegion::B2: return "B2";
    case DpRegion::D: return "D";
  }
  return "?";
}

/// Region cut points on the dp = pnon - pn axis, in increasing order for the
/// large-transport regime.
struct RegionCuts {
  double a_b1;   ///< ku*qp - tnon
  double b1_c;   ///< ku*(2qp - qf) - tnon
  double c_b2;   ///< tn + ku*(qp - qf)
  double b2_d;   ///< tn + ku*qp
};

inline RegionCuts region_cuts(const MarketParams& p) {
  return RegionCuts{p.ku * p.qp - p.tnon, p.ku * (2.0 * p.qp - p.qf) - p.tnon,
                    p.tn + p.ku * (p.qp - p.qf), p.tn + p.ku * p.qp};
}

/// Label of an outcome. Ad-hoc marks an evaluated price pair that is not one
/// of the closed-form candidates.
enum class Label { a, b, c, d, e, benchmark, ad_hoc };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::a: return "a";
    case Label::b: return "b";
    case Label::c: return "c";
    case Label::d: return "d";
    case Label::e: return "e";
    case Label::benchmark: return "benchmark";
    case Label::ad_hoc: return "ad-hoc";
  }
  return "?";
}

struct Outcome {
  StrategyProfile profile;
  Allocation alloc;
  double pi_n = 0.0;
  double pi_non = 0.0;
  double pi_cp = 0.0;
  double euw = 0.0;
  Label label = Label::ad_hoc;
};

inline Allocation eu_allocation(double pn, double pnon, double qn, double qnon,
                                const MarketParams& p) {
  Allocation a;
  a.xn = (p.tnon + p.ku * (qn - qnon) + pnon - pn) / p.transport();
  a.nn = std::min(1.0, std::max(0.0, a.xn));
  a.nnon = 1.0 - a.nn;
  return a;
}

struct IspPayoffs {
  double pi_n;
  double pi_non;
};

inline IspPayoffs isp_payoffs(const StrategyProfile& s, const Allocation& a,
                              const MarketParams& p) {
  return IspPayoffs{(s.pn - p.c) * a.nn,
                    (s.pnon - p.c) * a.nnon + s.z * s.qnon * s.ptilde};
}

inline double cp_payoff(const StrategyProfile& s, const Allocation& a, const MarketParams& p) {
  return a.nn * p.kad * s.qn + a.nnon * p.kad * s.qnon - s.z * s.ptilde * s.qnon;
}

inline double eu_welfare(const StrategyProfile& s, const Allocation& a, const MarketParams& p) {
  return (p.ku * s.qn - s.pn) * a.nn - 0.5 * p.tn * a.nn * a.nn +
         (p.ku * s.qnon - s.pnon) * a.nnon - 0.5 * p.tnon * a.nnon * a.nnon;
}

/// Builds an Outcome whose payoffs are computed from profile and allocation.
inline Outcome make_outcome(const StrategyProfile& s, const Allocation& a,
                            const MarketParams& p, Label label) {
  Outcome o;
  o.profile = s;
  o.alloc = a;
  auto isp = isp_payoffs(s, a, p);
  o.pi_n = isp.pi_n;
  o.pi_non = isp.pi_non;
  o.pi_cp = cp_payoff(s, a, p);
  o.euw = eu_welfare(s, a, p);
  o.label = label;
  return o;
}

inline void require_large_transport(const MarketParams& p) {
  if (p.regime() != Regime::LargeTransport)
    throw Error(ErrorCode::RegimeUnsupported,
                "region ordering requires tn + tnon > ku * qp");
}

inline DpRegion classify_dp_region(double dp, const MarketParams& p) {
  require_large_transport(p);
  const RegionCuts k = region_cuts(p);
  if (dp <= k.a_b1 + kBoundaryEps) return DpRegion::A;
  if (dp < k.b1_c - kBoundaryEps) return DpRegion::B1;
  if (dp < k.c_b2 - kBoundaryEps) return DpRegion::C;
  if (dp < k.b2_d - kBoundaryEps) return DpRegion::B2;
  return DpRegion::D;
}

}  // namespace nnmarket
