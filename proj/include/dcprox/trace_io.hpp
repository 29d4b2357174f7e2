#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcprox/errors.hpp"
#include "dcprox/trace.hpp"

namespace dcprox {

/// Bit-exact trace CSV column contract. Absent quantities serialize as empty
/// fields; floats print with 17 significant digits for lossless round-trip.
inline constexpr const char* kTraceCsvHeader =
    "k,f,d_norm,m_k,eta_k,grad_res,sum_d_sq,energy_lo,energy_hi,lyapunov,"
    "coupling_norm,wall_time_s";

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string opt_g17(const std::optional<double>& v) {
  return v ? g17(*v) : std::string();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const char* field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw TraceParseError(std::string("trace: bad number in column ") + field);
  }
  if (pos != s.size()) {
    throw TraceParseError(std::string("trace: trailing junk in column ") + field);
  }
  return v;
}

inline std::optional<double> parse_opt(const std::string& s, const char* field) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, field);
}

}  // namespace detail

/// Wall time is recorded in memory but serialized only on request: the column
/// would otherwise break byte-for-byte reproducibility of identical runs.
inline std::string trace_to_csv(const Trace& tr, bool record_wall_time = false) {
  std::ostringstream out;
  out << kTraceCsvHeader << '\n';
  for (const auto& r : tr.records) {
    out << r.k << ',' << detail::g17(r.f_x) << ',' << detail::g17(r.d_norm)
        << ',' << (r.m_k ? std::to_string(*r.m_k) : std::string()) << ','
        << detail::opt_g17(r.eta_k) << ',' << detail::opt_g17(r.grad_residual)
        << ',' << detail::g17(r.sum_d_sq) << ',' << detail::opt_g17(r.energy_lo)
        << ',' << detail::opt_g17(r.energy_hi) << ','
        << detail::opt_g17(r.lyapunov) << ','
        << detail::opt_g17(r.coupling_norm) << ','
        << (record_wall_time ? detail::g17(r.wall_time_s) : std::string())
        << '\n';
  }
  return out.str();
}

/// Whole-file atomic write: temp file in the target directory, then rename.
inline void atomic_write_file(const std::string& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline void write_trace_csv(const Trace& tr, const std::string& path,
                            bool record_wall_time = false) {
  atomic_write_file(path, trace_to_csv(tr, record_wall_time));
}

/// Scalar rows of a stored trace (the iterate vectors are not serialized).
struct CsvTrace {
  struct Row {
    int k = 0;
    double f = 0.0;
    double d_norm = 0.0;
    std::optional<int> m_k;
    std::optional<double> eta_k;
    std::optional<double> grad_res;
    double sum_d_sq = 0.0;
    std::optional<double> energy_lo, energy_hi, lyapunov, coupling_norm;
    std::optional<double> wall_time_s;
  };
  std::vector<Row> rows;

  bool looks_inertial() const {
    return !rows.empty() && rows.front().energy_lo.has_value();
  }
};

inline CsvTrace parse_trace_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw TraceParseError("trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) {
    throw TraceParseError("trace: header does not match the CSV contract");
  }
  CsvTrace tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 12) {
      throw TraceParseError("trace: expected 12 columns, got " +
                            std::to_string(f.size()));
    }
    CsvTrace::Row row;
    row.k = static_cast<int>(detail::parse_double(f[0], "k"));
    row.f = detail::parse_double(f[1], "f");
    row.d_norm = detail::parse_double(f[2], "d_norm");
    if (!f[3].empty()) {
      row.m_k = static_cast<int>(detail::parse_double(f[3], "m_k"));
    }
    row.eta_k = detail::parse_opt(f[4], "eta_k");
    row.grad_res = detail::parse_opt(f[5], "grad_res");
    row.sum_d_sq = detail::parse_double(f[6], "sum_d_sq");
    row.energy_lo = detail::parse_opt(f[7], "energy_lo");
    row.energy_hi = detail::parse_opt(f[8], "energy_hi");
    row.lyapunov = detail::parse_opt(f[9], "lyapunov");
    row.coupling_norm = detail::parse_opt(f[10], "coupling_norm");
    row.wall_time_s = detail::parse_opt(f[11], "wall_time_s");
    tr.rows.push_back(row);
  }
  if (tr.rows.empty()) throw TraceParseError("trace: no data rows");
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    if (tr.rows[i].k != static_cast<int>(i)) {
      throw TraceParseError("trace: k must run 0..N-1 without gaps");
    }
  }
  return tr;
}

inline CsvTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceParseError("trace: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

}  // namespace dcprox
