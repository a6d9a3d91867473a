#pragma once

#include <cstdio>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "art/errors.hpp"
#include "art/simulation.hpp"

// Fixed-schema CSV emission for experiment rows.  The header is always
// written and real values are printed with six significant digits so replays
// are byte-identical.

namespace art {

inline const char* kCsvHeader =
    "experiment,N_total,N_clusters,b,c,inner,distribution,op_class,hops_mean,"
    "hops_p50,hops_p99,hops_max,skeleton_hops_mean,success_rate,"
    "max_routing_entries,cluster_size_max,violations,seed,config_hash";

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_line(const MetricsRow& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.n_total << ',' << r.n_clusters << ',' << r.b << ','
     << r.c << ',' << r.inner << ',' << r.distribution << ',' << r.op_class << ','
     << format_real(r.hops_mean) << ',' << format_real(r.hops_p50) << ','
     << format_real(r.hops_p99) << ',' << r.hops_max << ','
     << format_real(r.skeleton_hops_mean) << ',' << format_real(r.success_rate) << ','
     << r.max_routing_entries << ',' << r.cluster_size_max << ',' << r.violations << ','
     << r.seed << ',' << r.config_hash;
  return os.str();
}

inline std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const MetricsRow& r : rows) {
    out += csv_line(r);
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// Parse rows back (used by the report stage); throws SchemaMismatch when the
// header or a row does not conform.
inline std::vector<MetricsRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw SchemaMismatch("missing or malformed CSV header");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 19)
      throw SchemaMismatch("row " + std::to_string(line_no) + " has " +
                           std::to_string(f.size()) + " fields, expected 19");
    try {
      MetricsRow r;
      r.experiment = f[0];
      r.n_total = std::stoull(f[1]);
      r.n_clusters = std::stoull(f[2]);
      r.b = std::stoull(f[3]);
      r.c = static_cast<std::uint32_t>(std::stoul(f[4]));
      r.inner = f[5];
      r.distribution = f[6];
      r.op_class = f[7];
      r.hops_mean = std::stod(f[8]);
      r.hops_p50 = std::stod(f[9]);
      r.hops_p99 = std::stod(f[10]);
      r.hops_max = std::stoull(f[11]);
      r.skeleton_hops_mean = std::stod(f[12]);
      r.success_rate = std::stod(f[13]);
      r.max_routing_entries = std::stoull(f[14]);
      r.cluster_size_max = std::stoull(f[15]);
      r.violations = std::stoull(f[16]);
      r.seed = std::stoull(f[17]);
      r.config_hash = f[18];
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw SchemaMismatch("row " + std::to_string(line_no) + " is not parseable");
    }
  }
  return rows;
}

}  // namespace art
