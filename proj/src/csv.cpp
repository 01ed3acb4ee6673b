#include "flashcrowd/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flashcrowd {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string::npos) pos = content.size();
    std::string line = content.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = pos + 1;
  }
  return lines;
}

double parse_double_field(const std::string& s, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw IoError(std::string("malformed ") + what + " value: '" + s + "'");
  }
  return v;
}

std::int64_t parse_int_field(const std::string& s, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw IoError(std::string("malformed ") + what + " value: '" + s + "'");
  }
  return v;
}

void expect_header(const std::vector<std::string>& lines, const char* header) {
  if (lines.empty()) throw IoError("empty CSV input");
  if (lines[0] != header) {
    throw IoError(std::string("unexpected CSV header '") + lines[0] + "', want '" + header + "'");
  }
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      out.close();
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("rename to " + path + " failed: " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path);
  return buf.str();
}

namespace {

const char* policy_column(ModelKind model) {
  switch (model) {
    case ModelKind::kPeersimMin: return "min";
    case ModelKind::kPeersimRandom: return "random";
    default: return "-";
  }
}

constexpr char kEstimatesHeader[] = "model,policy,rho,N,reps,statistic,mean,stderr";
constexpr char kSlopesHeader[] = "statistic,mode,slope,intercept,r_squared";

}  // namespace

std::string estimates_csv(ModelKind model, double rho, const std::vector<Estimate>& rows) {
  std::string out = kEstimatesHeader;
  out += '\n';
  for (const auto& e : rows) {
    out += to_string(model);
    out += ',';
    out += policy_column(model);
    out += ',';
    out += format_double(rho);
    out += ',';
    out += std::to_string(e.n);
    out += ',';
    out += std::to_string(e.reps);
    out += ',';
    out += to_string(e.statistic);
    out += ',';
    out += format_double(e.mean);
    out += ',';
    out += format_double(e.stderr_of_mean);
    out += '\n';
  }
  return out;
}

std::vector<EstimateRow> parse_estimates_csv(const std::string& content) {
  auto lines = split_lines(content);
  expect_header(lines, kEstimatesHeader);
  std::vector<EstimateRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_line(lines[i]);
    if (f.size() != 8) throw IoError("estimate row needs 8 fields: '" + lines[i] + "'");
    EstimateRow r;
    r.model = f[0];
    r.policy = f[1];
    r.rho = parse_double_field(f[2], "rho");
    r.n = parse_int_field(f[3], "N");
    r.reps = parse_int_field(f[4], "reps");
    r.statistic = f[5];
    r.mean = parse_double_field(f[6], "mean");
    r.stderr_of_mean = parse_double_field(f[7], "stderr");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string trace_csv(const IdleTrace& trace) {
  std::string out = "t,idle_fraction,servers,asleep\n";
  for (const auto& s : trace) {
    out += format_fixed6(s.t);
    out += ',';
    out += format_fixed6(s.idle_fraction);
    out += ',';
    out += std::to_string(s.servers);
    out += ',';
    out += std::to_string(s.asleep);
    out += '\n';
  }
  return out;
}

namespace {

std::string opt_int(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::string milestones_csv(const MilestoneRecord& record) {
  std::string out = "statistic,value\n";
  out += "nu1," + opt_int(record.nu1) + '\n';
  out += "t1," + opt_double(record.t1) + '\n';
  out += "nu2," + opt_int(record.nu2) + '\n';
  out += "t2," + opt_double(record.t2) + '\n';
  out += "nu3," + opt_int(record.nu3) + '\n';
  out += "t3," + opt_double(record.t3) + '\n';
  out += "nu4," + opt_int(record.nu4) + '\n';
  out += "t4," + opt_double(record.t4) + '\n';
  out += "completion_time," + opt_double(record.completion_time) + '\n';
  out += "prop1_violations," + std::to_string(record.prop1_violations) + '\n';
  return out;
}

std::string occupancy_csv(const Occupancy& occ) {
  std::string out = "urn_index,count\n";
  for (std::int64_t i = 1; i <= occ.k_max(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += std::to_string(occ.eta[static_cast<std::size_t>(i - 1)]);
    out += '\n';
  }
  return out;
}

std::string realization_csv(const RandomUrnRealization& realization, std::int64_t k) {
  if (k < 0 || k > realization.k_max()) {
    throw std::out_of_range("realization_csv: k outside realized prefix");
  }
  std::string out = "n,T_n,P_n\n";
  for (std::int64_t n = 1; n <= k; ++n) {
    out += std::to_string(n);
    out += ',';
    out += format_double(realization.T(n));
    out += ',';
    out += format_double(realization.P(n));
    out += '\n';
  }
  return out;
}

std::string slopes_csv(const std::vector<SlopeRow>& rows) {
  std::string out = kSlopesHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.statistic;
    out += ',';
    out += r.mode;
    out += ',';
    out += format_double(r.slope);
    out += ',';
    out += format_double(r.intercept);
    out += ',';
    out += format_double(r.r_squared);
    out += '\n';
  }
  return out;
}

std::vector<SlopeRow> parse_slopes_csv(const std::string& content) {
  auto lines = split_lines(content);
  expect_header(lines, kSlopesHeader);
  std::vector<SlopeRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_line(lines[i]);
    if (f.size() != 5) throw IoError("slope row needs 5 fields: '" + lines[i] + "'");
    SlopeRow r;
    r.statistic = f[0];
    r.mode = f[1];
    r.slope = parse_double_field(f[2], "slope");
    r.intercept = parse_double_field(f[3], "intercept");
    r.r_squared = parse_double_field(f[4], "r_squared");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string table1_csv(const SlopeComparison& cmp) {
  std::string out = "policy,statistic,reference,fitted,deviation,flagged\n";
  for (const auto& row : cmp.rows) {
    out += to_string(row.policy);
    out += ',';
    out += to_string(row.statistic);
    out += ',';
    out += format_double(row.reference);
    out += ',';
    out += row.fitted ? format_double(*row.fitted) : std::string();
    out += ',';
    out += row.deviation ? format_double(*row.deviation) : std::string();
    out += ',';
    out += row.flagged ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string table1_text(const SlopeComparison& cmp) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "growth-rate comparison (tolerance %.4g)\n", cmp.tolerance);
  out += buf;
  out += "policy  statistic   reference  fitted     deviation  flag\n";
  for (const auto& row : cmp.rows) {
    std::snprintf(buf, sizeof buf, "%-7s %-11s %-10.4f", to_string(row.policy),
                  to_string(row.statistic), row.reference);
    out += buf;
    if (row.fitted) {
      std::snprintf(buf, sizeof buf, " %-10.4f %-10.4f %s\n", *row.fitted, *row.deviation,
                    row.flagged ? "EXCEEDS" : "ok");
    } else {
      std::snprintf(buf, sizeof buf, " %-10s %-10s %s\n", "-", "-", "missing");
    }
    out += buf;
  }
  return out;
}

}  // namespace flashcrowd
