#pragma once

// CSV input and output. Numbers are written with 17 significant digits so
// that a write/read round trip is exact.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xqr/regions.hpp"
#include "xqr/samplers.hpp"

namespace xqr {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool is_missing_cell(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

// Full-cell numeric parse; nullopt on any trailing garbage.
inline std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct CsvSchema {
  std::string y1 = "y1";
  std::string y2 = "y2";      // used only when `bivariate`
  std::string covariate;      // empty: no covariate
  std::string date = "date";  // kept when present
  bool bivariate = false;
};

struct Dataset {
  std::vector<std::string> dates;  // empty when the file has no date column
  std::vector<double> y1, y2, covariate;
  std::vector<std::size_t> dropped_rows;  // 1-based data-row indices

  std::size_t size() const { return y1.size(); }
  bool bivariate() const { return !y2.empty(); }
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Dataset read_csv(std::istream& in, const CsvSchema& schema, const std::string& source = "input") {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(source + ": missing header row");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw CsvError(source + ": column '" + name + "' not found in header");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_y1 = column(schema.y1, true);
  const auto c_y2 = schema.bivariate ? column(schema.y2, true) : std::nullopt;
  const auto c_cov = schema.covariate.empty() ? std::nullopt : column(schema.covariate, true);
  const auto c_date = schema.date.empty() ? std::nullopt : column(schema.date, false);

  Dataset d;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw CsvError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                     " fields, header has " + std::to_string(header.size()));
    bool missing = false;
    auto numeric = [&](std::optional<std::size_t> c) -> double {
      if (!c) return 0.0;
      const auto& cell = cells[*c];
      if (is_missing_cell(cell)) {
        missing = true;
        return 0.0;
      }
      const auto v = parse_number(cell);
      if (!v || !std::isfinite(*v))
        throw CsvError(source + ": row " + std::to_string(row) + ", column '" + header[*c] +
                       "': cannot parse '" + cell + "' as a number");
      return *v;
    };
    const double a = numeric(c_y1);
    const double b = numeric(c_y2);
    const double z = numeric(c_cov);
    if (missing) {
      d.dropped_rows.push_back(row);
      continue;
    }
    d.y1.push_back(a);
    if (c_y2) d.y2.push_back(b);
    if (c_cov) d.covariate.push_back(z);
    if (c_date) d.dates.push_back(cells[*c_date]);
  }
  if (d.y1.empty()) throw CsvError(source + ": no usable rows");
  return d;
}

inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");
  return read_csv(in, schema, path);
}

inline void write_dataset_csv(std::ostream& os, const Dataset& d, const CsvSchema& schema = {}) {
  const bool dates = !d.dates.empty();
  const bool cov = !d.covariate.empty();
  if (dates) os << schema.date << ',';
  os << schema.y1;
  if (d.bivariate()) os << ',' << schema.y2;
  if (cov) os << ',' << (schema.covariate.empty() ? "covariate" : schema.covariate);
  os << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (dates) os << d.dates[i] << ',';
    os << format_double(d.y1[i]);
    if (d.bivariate()) os << ',' << format_double(d.y2[i]);
    if (cov) os << ',' << format_double(d.covariate[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Chains

namespace detail {

inline void write_margin_header(std::ostream& os, const std::string& prefix) {
  os << prefix << "beta0," << prefix << "beta1," << prefix << "beta2," << prefix << "sigma," << prefix
     << "gamma";
}

inline void write_margin(std::ostream& os, const MarginalModel& m) {
  os << format_double(m.beta0) << ',' << format_double(m.beta1) << ',' << format_double(m.beta2) << ','
     << format_double(m.sigma) << ',' << format_double(m.gamma);
}

inline MarginalModel read_margin(const std::vector<std::string>& cells, std::size_t at) {
  auto num = [&](std::size_t i) {
    auto v = parse_number(cells.at(i));
    if (!v) throw CsvError("draws: cannot parse '" + cells.at(i) + "'");
    return *v;
  };
  return {num(at), num(at + 1), num(at + 2), num(at + 3), num(at + 4)};
}

}  // namespace detail

inline void write_univariate_draws(std::ostream& os, const UnivariateChain& c) {
  os << "iteration,";
  detail::write_margin_header(os, "");
  os << ",accepted,tau,accept_prob\n";
  for (long i = 0; i < c.size(); ++i) {
    os << i + 1 << ',';
    detail::write_margin(os, c.draws[i]);
    os << ',' << int(c.accepted[i]) << ',' << format_double(c.tau[i]) << ','
       << format_double(c.accept_prob[i]) << '\n';
  }
}

// eta is written as one space-separated field since its length varies with
// kappa.
inline void write_bivariate_draws(std::ostream& os, const BivariateChain& c) {
  os << "iteration,";
  detail::write_margin_header(os, "m1_");
  os << ',';
  detail::write_margin_header(os, "m2_");
  os << ",kappa,eta,accepted1,accepted2,accepted_dep,tau1,tau2,accept_prob1,accept_prob2\n";
  for (long i = 0; i < c.size(); ++i) {
    const auto& d = c.draws[i];
    os << i + 1 << ',';
    detail::write_margin(os, d.theta1);
    os << ',';
    detail::write_margin(os, d.theta2);
    os << ',' << d.eta.kappa << ',';
    for (std::size_t j = 0; j < d.eta.eta.size(); ++j) os << (j ? " " : "") << format_double(d.eta.eta[j]);
    os << ',' << int(c.accepted1[i]) << ',' << int(c.accepted2[i]) << ',' << int(c.accepted_dep[i]) << ','
       << format_double(c.tau1[i]) << ',' << format_double(c.tau2[i]) << ','
       << format_double(c.accept_prob1[i]) << ',' << format_double(c.accept_prob2[i]) << '\n';
  }
}

// Reads a file written by write_bivariate_draws. k1, k2, n and burn_in are
// not part of the file and must be filled in by the caller.
inline BivariateChain read_bivariate_draws(std::istream& in, const std::string& source = "draws") {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(source + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 20 || header[11] != "kappa" || header[12] != "eta")
    throw CsvError(source + ": not a bivariate draws file");
  BivariateChain c;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw CsvError(source + ": row " + std::to_string(row) + " is malformed");
    auto num = [&](std::size_t i) {
      auto v = parse_number(cells[i]);
      if (!v) throw CsvError(source + ": row " + std::to_string(row) + ", column '" + header[i] + "' is malformed");
      return *v;
    };
    BivariateDraw d;
    d.theta1 = detail::read_margin(cells, 1);
    d.theta2 = detail::read_margin(cells, 6);
    d.eta.kappa = static_cast<int>(num(11));
    std::istringstream es(cells[12]);
    std::string tok;
    while (es >> tok) {
      auto v = parse_number(tok);
      if (!v) throw CsvError(source + ": row " + std::to_string(row) + ": malformed eta");
      d.eta.eta.push_back(*v);
    }
    if (static_cast<int>(d.eta.eta.size()) != d.eta.kappa)
      throw CsvError(source + ": row " + std::to_string(row) + ": eta length does not match kappa");
    c.draws.push_back(std::move(d));
    c.accepted1.push_back(static_cast<std::uint8_t>(num(13)));
    c.accepted2.push_back(static_cast<std::uint8_t>(num(14)));
    c.accepted_dep.push_back(static_cast<std::uint8_t>(num(15)));
    c.tau1.push_back(num(16));
    c.tau2.push_back(num(17));
    c.accept_prob1.push_back(num(18));
    c.accept_prob2.push_back(num(19));
  }
  return c;
}

// Reads a file written by write_univariate_draws; k, n and burn_in are left
// to the caller.
inline UnivariateChain read_univariate_draws(std::istream& in, const std::string& source = "draws") {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(source + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 9 || header[1] != "beta0" || header[6] != "accepted")
    throw CsvError(source + ": not a univariate draws file");
  UnivariateChain c;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw CsvError(source + ": row " + std::to_string(row) + " is malformed");
    auto num = [&](std::size_t i) {
      auto v = parse_number(cells[i]);
      if (!v) throw CsvError(source + ": row " + std::to_string(row) + ", column '" + header[i] + "' is malformed");
      return *v;
    };
    c.draws.push_back(detail::read_margin(cells, 1));
    c.accepted.push_back(static_cast<std::uint8_t>(num(6)));
    c.tau.push_back(num(7));
    c.accept_prob.push_back(num(8));
  }
  return c;
}

// Columns w,x_mean,y_mean,x_lo,x_hi,y_lo,y_hi,p,level.
inline void write_region_csv(std::ostream& os, const RegionCurve& c) {
  os << "w,x_mean,y_mean,x_lo,x_hi,y_lo,y_hi,p,level\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    os << format_double(c.w[i]) << ',' << format_double(c.mean[i].x) << ',' << format_double(c.mean[i].y)
       << ',' << format_double(c.lo[i].x) << ',' << format_double(c.hi[i].x) << ','
       << format_double(c.lo[i].y) << ',' << format_double(c.hi[i].y) << ',' << format_double(c.p)
       << ',' << format_double(c.level) << '\n';
}

inline void write_band_csv(std::ostream& os, const Band& b, double level) {
  os << "w,mean,lo,hi,level\n";
  for (std::size_t i = 0; i < b.size(); ++i)
    os << format_double(b.w[i]) << ',' << format_double(b.mean[i]) << ',' << format_double(b.lo[i]) << ','
       << format_double(b.hi[i]) << ',' << format_double(level) << '\n';
}

inline void write_histograms_csv(std::ostream& os, const std::vector<QuantileSummary>& qs,
                                 const std::string& label = "") {
  os << "margin,p,scale,bin_lo,bin_hi,density\n";
  for (const auto& q : qs) {
    const char* scale = std::isnan(q.log_value.mean) ? "data" : "log";
    for (std::size_t b = 0; b < q.histogram.density.size(); ++b)
      os << label << ',' << format_double(q.p) << ',' << scale << ',' << format_double(q.histogram.edges[b])
         << ',' << format_double(q.histogram.edges[b + 1]) << ',' << format_double(q.histogram.density[b])
         << '\n';
  }
}

}  // namespace xqr
