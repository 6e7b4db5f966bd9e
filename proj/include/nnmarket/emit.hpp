#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "nnmarket/equilibrium.hpp"
#include "nnmarket/grid_oracle.hpp"
#include "nnmarket/sweep.hpp"

namespace nnmarket {

enum class Format { csv, json };

inline std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

namespace detail {

using Cell = std::variant<std::string, std::optional<double>, bool>;

struct Field {
  const char* name;
  Cell value;
};

inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

inline std::string csv_string(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline std::string render(const Cell& cell, Format f) {
  if (const auto* s = std::get_if<std::string>(&cell)) return f == Format::csv ? csv_string(*s) : json_string(*s);
  if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
  const auto& v = std::get<std::optional<double>>(cell);
  if (!v || !std::isfinite(*v)) return f == Format::csv ? "" : "null";
  return number(*v);
}

inline void write_table(std::ostream& out, const std::vector<std::vector<Field>>& records, Format f) {
  if (f == Format::csv) {
    if (records.empty()) return;
    const auto& head = records.front();
    for (std::size_t k = 0; k < head.size(); ++k) out << (k ? "," : "") << head[k].name;
    out << '\n';
    for (const auto& rec : records) {
      for (std::size_t k = 0; k < rec.size(); ++k) out << (k ? "," : "") << render(rec[k].value, f);
      out << '\n';
    }
    return;
  }
  out << '[';
  for (std::size_t r = 0; r < records.size(); ++r) {
    out << (r ? ",\n " : "\n ") << '{';
    for (std::size_t k = 0; k < records[r].size(); ++k)
      out << (k ? "," : "") << json_string(records[r][k].name) << ':' << render(records[r][k].value, f);
    out << '}';
  }
  out << (records.empty() ? "]" : "\n]");
}

inline std::vector<Field> row_fields(const SweepRow& r, bool discounts) {
  std::vector<Field> f{
      {"tn", std::optional<double>(r.tn)}, {"tnon", std::optional<double>(r.tnon)},         {"regime", r.regime},
      {"label", r.label},   {"pn", r.pn},             {"pnon", r.pnon},
      {"ptilde", r.ptilde}, {"nn", r.nn},             {"nnon", r.nnon},
      {"pi_n", r.pi_n},     {"pi_non", r.pi_non},     {"pi_cp", r.pi_cp},
      {"euw", r.euw},       {"pn_b", r.pn_b},         {"pnon_b", r.pnon_b},
      {"pi_n_b", r.pi_n_b}, {"pi_non_b", r.pi_non_b}, {"euw_b", r.euw_b},
      {"d_pi_n", r.d_pi_n}, {"d_pi_non", r.d_pi_non}, {"d_euw", r.d_euw},
      {"status", r.status}};
  if (discounts) {
    f.push_back({"disc_n", r.disc_n});
    f.push_back({"disc_non", r.disc_non});
  }
  return f;
}

inline void check_stream(const std::ostream& out) {
  if (!out) throw Error(ErrorCode::WriteFailure, "output stream rejected the write");
}

}  // namespace detail

/// Writes sweep rows. Column order is fixed; `discounts` appends the two
/// access-fee discount columns used by sweep-compare.
inline void emit(const std::vector<SweepRow>& rows, Format format, std::ostream& out,
                 bool discounts = false) {
  if (rows.empty()) throw Error(ErrorCode::EmptySweep, "no rows to emit");
  std::vector<std::vector<detail::Field>> records;
  records.reserve(rows.size());
  for (const SweepRow& r : rows) records.push_back(detail::row_fields(r, discounts));
  detail::write_table(out, records, format);
  if (format == Format::json) out << '\n';
  out.flush();
  detail::check_stream(out);
}

/// Solve output: one row per verified equilibrium (a single NONE row when
/// there is none) followed by one record per rejected candidate.
inline void emit_solve(const std::vector<SweepRow>& rows, const SolveResult& res, Format format,
                       std::ostream& out) {
  if (rows.empty()) throw Error(ErrorCode::EmptySweep, "no rows to emit");
  std::vector<std::vector<detail::Field>> eq, rej;
  for (const SweepRow& r : rows) eq.push_back(detail::row_fields(r, false));
  for (const auto& [label, r] : res.rejected) {
    std::optional<double> price, gain;
    std::string isp;
    if (r.deviation) {
      isp = std::string(to_string(r.deviation->isp));
      price = r.deviation->price;
      gain = r.deviation->gain;
    }
    rej.push_back({{"label", std::string(to_string(label))},
                   {"reason", r.reason},
                   {"isp", isp},
                   {"deviation_price", price},
                   {"gain", gain}});
  }
  if (format == Format::csv) {
    detail::write_table(out, eq, format);
    if (!rej.empty()) {
      out << '\n';
      detail::write_table(out, rej, format);
    }
  } else {
    out << "{\"regime\":" << detail::json_string(std::string(to_string(res.regime)))
        << ",\"equilibria\":" << res.equilibria.size() << ",\"rows\":";
    detail::write_table(out, eq, format);
    out << ",\"rejected\":";
    detail::write_table(out, rej, format);
    out << "}\n";
  }
  out.flush();
  detail::check_stream(out);
}

inline void emit_oracle(const OracleReport& rep, Format format, std::ostream& out) {
  std::vector<std::vector<detail::Field>> recs;
  for (const OracleCheck& c : rep.checks) {
    recs.push_back({{"label", c.label},
                    {"verified", c.verified},
                    {"grid_match", c.grid_match},
                    {"pn", std::optional<double>(c.pn)},
                    {"pnon", std::optional<double>(c.pnon)}});
  }
  if (format == Format::csv) {
    detail::write_table(out, recs, format);
    out << "\nagree,grid_points,step,tol_n,tol_non\n"
        << (rep.agree ? "true" : "false") << ',' << rep.grid_points << ','
        << detail::number(rep.step) << ',' << detail::number(rep.tol_n) << ','
        << detail::number(rep.tol_non) << '\n';
  } else {
    out << "{\"agree\":" << (rep.agree ? "true" : "false") << ",\"grid_points\":" << rep.grid_points
        << ",\"step\":" << detail::number(rep.step) << ",\"tol_n\":" << detail::number(rep.tol_n)
        << ",\"tol_non\":" << detail::number(rep.tol_non) << ",\"checks\":";
    detail::write_table(out, recs, format);
    out << "}\n";
  }
  out.flush();
  detail::check_stream(out);
}

/// Opens `path` for writing, or returns std::cout for "-" or an empty path.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error(ErrorCode::WriteFailure, "cannot open " + path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace nnmarket
