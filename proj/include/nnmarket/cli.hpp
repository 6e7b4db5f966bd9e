#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nnmarket/emit.hpp"
#include "nnmarket/equilibrium.hpp"
#include "nnmarket/grid_oracle.hpp"
#include "nnmarket/market.hpp"
#include "nnmarket/sweep.hpp"

namespace nnmarket {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"solve", "benchmark", "sweep-map", "sweep-compare",
                                              "verify-oracle"};
  return names;
}

struct RunConfig {
  std::string command;
  MarketParams params;
  std::optional<double> grid_lo;
  std::optional<double> grid_hi;
  std::size_t grid_steps = 2001;
  double t_lo = 0.05;
  double t_hi = 6.0;
  std::size_t t_steps = 60;
  std::string out = "-";
  std::optional<Format> format;
  double tol = 1e-9;

  bool operator==(const RunConfig&) const = default;

  Format output_format() const {
    if (format) return *format;
    return command.rfind("sweep", 0) == 0 ? Format::csv : Format::json;
  }
  TGrid t_grid() const { return TGrid{{t_lo, t_hi, t_steps}, {t_lo, t_hi, t_steps}}; }
};

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw Error(ErrorCode::Config, "format must be csv or json, got '" + s + "'");
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  if (!cfg.command.empty()) j["command"] = cfg.command;
  j["qf"] = cfg.params.qf;
  j["qp"] = cfg.params.qp;
  j["c"] = cfg.params.c;
  j["ku"] = cfg.params.ku;
  j["kad"] = cfg.params.kad;
  j["tn"] = cfg.params.tn;
  j["tnon"] = cfg.params.tnon;
  if (cfg.grid_lo) j["grid_lo"] = *cfg.grid_lo;
  if (cfg.grid_hi) j["grid_hi"] = *cfg.grid_hi;
  j["grid_steps"] = cfg.grid_steps;
  j["t_lo"] = cfg.t_lo;
  j["t_hi"] = cfg.t_hi;
  j["t_steps"] = cfg.t_steps;
  j["out"] = cfg.out;
  if (cfg.format) j["format"] = std::string(to_string(*cfg.format));
  j["tol"] = cfg.tol;
  return j;
}

/// Reads a flat config object on top of `base`. Unknown keys and values of
/// the wrong type are configuration errors.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") base.command = value.get<std::string>();
      else if (key == "qf") base.params.qf = value.get<double>();
      else if (key == "qp") base.params.qp = value.get<double>();
      else if (key == "c") base.params.c = value.get<double>();
      else if (key == "ku") base.params.ku = value.get<double>();
      else if (key == "kad") base.params.kad = value.get<double>();
      else if (key == "tn") base.params.tn = value.get<double>();
      else if (key == "tnon") base.params.tnon = value.get<double>();
      else if (key == "grid_lo") base.grid_lo = value.get<double>();
      else if (key == "grid_hi") base.grid_hi = value.get<double>();
      else if (key == "grid_steps") base.grid_steps = value.get<std::size_t>();
      else if (key == "t_lo") base.t_lo = value.get<double>();
      else if (key == "t_hi") base.t_hi = value.get<double>();
      else if (key == "t_steps") base.t_steps = value.get<std::size_t>();
      else if (key == "out") base.out = value.get<std::string>();
      else if (key == "format") base.format = parse_format(value.get<std::string>());
      else if (key == "tol") base.tol = value.get<double>();
      else throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  return base;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

namespace detail {

/// Raised for results that contradict a guaranteed property (exit code 2).
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline GridSpec oracle_grid(const RunConfig& cfg, const MarketParams& p) {
  GridSpec g = default_grid(p, cfg.grid_steps);
  double lowest = p.c;
  for (const Candidate& cand : all_candidates(p))
    lowest = std::min({lowest, cand.profile.pn, cand.profile.pnon});
  g.price_lo = cfg.grid_lo.value_or(lowest);
  if (cfg.grid_hi) g.price_hi = *cfg.grid_hi;
  return g;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
  const MarketParams p = validate_params(cfg.params);
  if (!(cfg.tol >= 0.0)) throw Error(ErrorCode::Config, "tol must be >= 0");
  Tolerances tol;
  tol.tol = cfg.tol;
  OutputTarget target(cfg.out);
  std::ostream& dest = cfg.out.empty() || cfg.out == "-" ? out : target.stream();
  const Format fmt = cfg.output_format();

  if (cfg.command == "solve") {
    const SolveResult res = solve_spne(p, tol);
    const Outcome bench = solve_benchmark(p);
    std::vector<SweepRow> rows;
    if (res.equilibria.empty()) rows.push_back(make_row(p, res, bench));
    for (std::size_t k = 0; k < res.equilibria.size(); ++k) rows.push_back(make_row(p, res, bench, k));
    emit_solve(rows, res, fmt, dest);
    for (const Outcome& o : res.equilibria) {
      if (std::abs(o.pi_cp - p.kad * p.qf) > 1e-9)
        throw InvariantViolation("CP payoff differs from kad*qf at a verified equilibrium");
      if (o.pi_n > bench.pi_n + tol.tol)
        throw InvariantViolation("neutral ISP gains over the benchmark at a verified equilibrium");
    }
    return 0;
  }
  if (cfg.command == "benchmark") {
    emit({benchmark_row(p, solve_benchmark(p))}, fmt, dest);
    return 0;
  }
  if (cfg.command == "sweep-map" || cfg.command == "sweep-compare") {
    const bool compare = cfg.command == "sweep-compare";
    const auto rows = compare ? sweep_compare(p, cfg.t_grid(), tol) : sweep_region_map(p, cfg.t_grid(), tol);
    emit(rows, fmt, dest, compare);
    for (const SweepRow& r : rows) {
      if (r.status.rfind("invariant-violation", 0) == 0)
        throw InvariantViolation("cell tn=" + number(r.tn) + " tnon=" + number(r.tnon) + ": " + r.status);
    }
    return 0;
  }
  if (cfg.command == "verify-oracle") {
    const OracleReport rep = cross_check(p, oracle_grid(cfg, p), tol);
    emit_oracle(rep, fmt, dest);
    if (!rep.agree) throw InvariantViolation("closed-form solver and grid oracle disagree");
    return 0;
  }
  throw Error(ErrorCode::Config, "unknown command '" + cfg.command + "'");
}

}  // namespace detail

/// Command-line entry point. Returns 0 on success (an empty equilibrium set
/// included), 1 on usage or configuration errors and 2 when a result
/// violates a guaranteed property.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Equilibrium solver for a two-ISP market with paid prioritization"};
  app.name("nnmarket");
  app.require_subcommand(0, 1);

  std::optional<std::string> config_path;
  std::optional<double> qf, qp, c, ku, kad, tn, tnon, grid_lo, grid_hi, t_lo, t_hi, tolv;
  std::optional<std::size_t> grid_steps, t_steps;
  std::optional<std::string> out_path, format;

  app.add_option("--config", config_path, "flat JSON config; flags override its values");
  app.add_option("--qf", qf, "free quality level");
  app.add_option("--qp", qp, "premium quality level");
  app.add_option("--c", c, "marginal cost per subscriber");
  app.add_option("--ku", ku, "end-user quality sensitivity");
  app.add_option("--kad", kad, "CP advertising sensitivity");
  app.add_option("--tn", tn, "transport cost of the neutral ISP");
  app.add_option("--tnon", tnon, "transport cost of the non-neutral ISP");
  app.add_option("--grid-lo", grid_lo, "lowest grid price (verify-oracle)");
  app.add_option("--grid-hi", grid_hi, "highest grid price (verify-oracle)");
  app.add_option("--grid-steps", grid_steps, "grid points per price axis (verify-oracle)");
  app.add_option("--t-lo", t_lo, "lowest transport cost in sweeps");
  app.add_option("--t-hi", t_hi, "highest transport cost in sweeps");
  app.add_option("--t-steps", t_steps, "transport grid points per axis in sweeps");
  app.add_option("--out", out_path, "output file, '-' for standard output");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", tolv, "minimum payoff gain that counts as a profitable deviation");
  for (const std::string& name : commands()) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "nnmarket: error[Usage]: " << e.what() << '\n';
    return 1;
  }

  try {
    RunConfig cfg = config_path ? load_config(*config_path) : RunConfig{};
    if (!app.get_subcommands().empty()) cfg.command = app.get_subcommands().front()->get_name();
    if (qf) cfg.params.qf = *qf;
    if (qp) cfg.params.qp = *qp;
    if (c) cfg.params.c = *c;
    if (ku) cfg.params.ku = *ku;
    if (kad) cfg.params.kad = *kad;
    if (tn) cfg.params.tn = *tn;
    if (tnon) cfg.params.tnon = *tnon;
    if (grid_lo) cfg.grid_lo = *grid_lo;
    if (grid_hi) cfg.grid_hi = *grid_hi;
    if (grid_steps) cfg.grid_steps = *grid_steps;
    if (t_lo) cfg.t_lo = *t_lo;
    if (t_hi) cfg.t_hi = *t_hi;
    if (t_steps) cfg.t_steps = *t_steps;
    if (out_path) cfg.out = *out_path;
    if (format) cfg.format = parse_format(*format);
    if (tolv) cfg.tol = *tolv;
    if (cfg.command.empty()) throw Error(ErrorCode::Config, "no command given");
    return detail::dispatch(cfg, out);
  } catch (const detail::InvariantViolation& e) {
    err << "nnmarket: error[InvariantViolation]: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "nnmarket: error[" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"nnmarket"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nnmarket
