#include <gtest/gtest.h>

#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "nnmarket/emit.hpp"
#include "nnmarket/sweep.hpp"
#include "test_support.hpp"

namespace nnmarket {
namespace {

using testing::canonical;

const MarketParams kBase = canonical(1, 1);

std::string emitted(const std::vector<SweepRow>& rows, Format f, bool discounts = false) {
  std::ostringstream out;
  emit(rows, f, out, discounts);
  return out.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(SweepCell, EqualsSolverComposition) {
  const SweepRow row = sweep_cell(kBase, 10, 10);
  const MarketParams p = canonical(10, 10);
  const SolveResult r = solve_spne(p);
  const Outcome b = solve_benchmark(p);
  ASSERT_EQ(r.equilibria.size(), 1u);
  EXPECT_EQ(row.label, "c");
  EXPECT_EQ(row.regime, "large-transport");
  EXPECT_EQ(*row.pn, r.equilibria[0].profile.pn);
  EXPECT_EQ(*row.pi_non, r.equilibria[0].pi_non);
  EXPECT_EQ(*row.euw, r.equilibria[0].euw);
  EXPECT_EQ(*row.pi_n_b, b.pi_n);
  EXPECT_EQ(*row.euw_b, b.euw);
  EXPECT_EQ(row.status, "ok");
}

TEST(SweepCell, WitnessIsNone) {
  const SweepRow row = sweep_cell(kBase, 3, 2);
  EXPECT_EQ(row.label, "NONE");
  EXPECT_FALSE(row.pn.has_value());
  EXPECT_FALSE(row.d_pi_n.has_value());
  EXPECT_TRUE(row.pi_n_b.has_value());
}

TEST(SweepCell, InvalidParametersBecomeUnsupported) {
  const SweepRow row = sweep_cell(kBase, -1.0, 1.0);
  EXPECT_EQ(row.label, "UNSUPPORTED");
  EXPECT_EQ(row.status, "error:NonPositiveParameter");
  MarketParams bad = kBase;
  bad.qp = 0.5;
  EXPECT_EQ(sweep_cell(bad, 1, 1).status, "error:QualityOrderViolation");
}

TEST(SweepCell, DeltasRecomputeFromAbsoluteColumns) {
  for (const SweepRow& r : sweep_compare(kBase, TGrid{{0.05, 6, 12}, {0.05, 6, 12}})) {
    if (!r.d_pi_n) continue;
    EXPECT_EQ(*r.d_pi_n, *r.pi_n - *r.pi_n_b);
    EXPECT_EQ(*r.d_pi_non, *r.pi_non - *r.pi_non_b);
    EXPECT_EQ(*r.d_euw, *r.euw - *r.euw_b);
    EXPECT_EQ(*r.disc_non, *r.pnon_b - *r.pnon);
  }
}

TEST(SweepCompare, NonNeutralIspCanLose) {
  const MarketParams base{1, 1.03, 1, 0.85, 0.85, 1, 1};
  const SweepRow r = sweep_compare(base, TGrid{{0.05, 0.05, 1}, {0.8, 0.8, 1}}).at(0);
  ASSERT_TRUE(r.d_pi_non.has_value()) << r.label;
  EXPECT_LT(*r.d_pi_non, 0.0);
}

TEST(SweepCompare, SmallTransportOutcomeALowersWelfare) {
  for (double t : {0.05, 0.1, 0.2}) {
    const SweepRow r = sweep_cell(kBase, t, t);
    ASSERT_EQ(r.label, "a");
    EXPECT_LT(*r.d_euw, 0.0);
  }
}

TEST(SweepCompare, VerifiedRowsPinCpPayoff) {
  for (const SweepRow& r : sweep_compare(kBase, TGrid{{0.05, 6, 15}, {0.05, 6, 15}})) {
    if (r.pi_cp) EXPECT_NEAR(*r.pi_cp, kBase.kad * kBase.qf, 1e-9);
    EXPECT_EQ(r.status.rfind("invariant-violation", 0), std::string::npos);
  }
}

TEST(RegionMap, QualitativePattern) {
  const TGrid grid;
  for (auto [ku, kad] : {std::pair{1.0, 0.5}, {0.5, 1.0}}) {
    MarketParams base = kBase;
    base.ku = ku;
    base.kad = kad;
    const auto rows = sweep_region_map(base, grid);
    ASSERT_EQ(rows.size(), 3600u);
    std::map<std::string, int> counts;
    for (const SweepRow& r : rows) {
      ++counts[r.label];
      EXPECT_LE(r.equilibria, 1u);
      if ((r.tn + 2 * r.tnon) / (ku + kad) <= base.qp) EXPECT_EQ(r.label, "a") << r.tn << "," << r.tnon;
    }
    EXPECT_EQ(counts.count("d"), 0u);
    EXPECT_EQ(counts.count("e"), 0u);
    EXPECT_GT(counts["b"], 0);
    EXPECT_GT(counts["c"], 0);
    EXPECT_GT(counts["NONE"], 0);
    // The far corner of the plane is (c).
    EXPECT_EQ(rows.back().label, "c");
  }
}

TEST(RegionMap, RowOrderIsLexicographic) {
  const TGrid grid{{0.5, 2, 4}, {0.5, 2, 3}};
  const auto rows = sweep_region_map(kBase, grid);
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].tn, grid.tn.at(k / 3));
    EXPECT_EQ(rows[k].tnon, grid.tnon.at(k % 3));
  }
}

TEST(RegionMap, EmptyGridIsEmptySweep) {
  try {
    sweep_region_map(kBase, TGrid{{0.5, 2, 0}, {0.5, 2, 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySweep);
  }
}

TEST(RegionMap, MonotonicityReportIsSoft) {
  const TGrid grid;
  const auto rows = sweep_region_map(kBase, grid);
  const MonotonicityReport rep = check_monotonicity(rows, grid);
  EXPECT_EQ(rep.label_returns_to_a, 0u);
  EXPECT_EQ(rep.multiple_spne, 0u);
  // Share and side-payment increases are reported only.
  RecordProperty("nnon_increases", static_cast<int>(rep.nnon_increases));
  RecordProperty("ptilde_increases", static_cast<int>(rep.ptilde_increases));
}

TEST(RegionMap, ThreadCountDoesNotChangeOutput) {
  const TGrid grid{{0.05, 6, 20}, {0.05, 6, 20}};
  ::setenv("NNMARKET_THREADS", "1", 1);
  const std::string one = emitted(sweep_compare(kBase, grid), Format::csv, true);
  ::setenv("NNMARKET_THREADS", "4", 1);
  const std::string four = emitted(sweep_compare(kBase, grid), Format::csv, true);
  ::unsetenv("NNMARKET_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Emit, EmptyRowsThrow) {
  std::ostringstream out;
  try {
    emit({}, Format::csv, out);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySweep);
  }
}

TEST(Emit, OneRowGivesHeaderAndOneLine) {
  const std::string csv = emitted({sweep_cell(kBase, 10, 10)}, Format::csv);
  EXPECT_EQ(count_lines(csv), 2u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "tn,tnon,regime,label,pn,pnon,ptilde,nn,nnon,pi_n,pi_non,pi_cp,euw,pn_b,pnon_b,pi_n_b,"
            "pi_non_b,euw_b,d_pi_n,d_pi_non,d_euw,status");
}

TEST(Emit, MissingValuesAreBlankOrNull) {
  const SweepRow none = sweep_cell(kBase, 3, 2);
  const std::string csv = emitted({none}, Format::csv);
  EXPECT_NE(csv.find("3,2,large-transport,NONE,,,,,,,,,,"), std::string::npos);
  const auto j = nlohmann::json::parse(emitted({none}, Format::json));
  EXPECT_TRUE(j[0]["pn"].is_null());
  EXPECT_EQ(j[0]["label"], "NONE");
}

TEST(Emit, TwelveSignificantDigits) {
  SweepRow r;
  r.tn = 1.0 / 3.0;
  r.tnon = 2.0;
  r.label = "NONE";
  const std::string csv = emitted({r}, Format::csv);
  EXPECT_NE(csv.find("\n0.333333333333,2,"), std::string::npos);
}

TEST(Emit, JsonKeysFollowCsvOrder) {
  const auto rows = sweep_compare(kBase, TGrid{{1, 2, 2}, {1, 2, 2}});
  const std::string json = emitted(rows, Format::json, true);
  const auto j = nlohmann::ordered_json::parse(json);
  ASSERT_EQ(j.size(), 4u);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j[0].items()) keys.push_back(k);
  const std::string csv = emitted(rows, Format::csv, true);
  std::string header;
  for (std::size_t k = 0; k < keys.size(); ++k) header += (k ? "," : "") + keys[k];
  EXPECT_EQ(csv.substr(0, csv.find('\n')), header);
  EXPECT_EQ(keys.back(), "disc_non");
}

TEST(Emit, RerunsAreByteIdentical) {
  const TGrid grid{{0.05, 6, 15}, {0.05, 6, 15}};
  EXPECT_EQ(emitted(sweep_compare(kBase, grid), Format::csv), emitted(sweep_compare(kBase, grid), Format::csv));
  EXPECT_EQ(emitted(sweep_compare(kBase, grid), Format::json), emitted(sweep_compare(kBase, grid), Format::json));
}

TEST(Emit, StringsAreEscaped) {
  SweepRow r;
  r.label = "NONE";
  r.status = "error:\"x\",y";
  EXPECT_NE(emitted({r}, Format::csv).find("\"error:\"\"x\"\",y\""), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(emitted({r}, Format::json))[0]["status"], "error:\"x\",y");
}

TEST(Emit, WriteFailureIsReported) {
  std::ostringstream out;
  out.setstate(std::ios::badbit);
  try {
    emit({sweep_cell(kBase, 1, 1)}, Format::csv, out);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WriteFailure);
  }
  EXPECT_THROW(OutputTarget("/nonexistent-dir/out.csv"), Error);
}

}  // namespace
}  // namespace nnmarket
