#include "bcusum/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bcusum {

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& field, const char* what) {
  double out = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error(std::string("malformed CSV: bad ") + what +
                             " value '" + field + "'");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("malformed CSV: unterminated quote");
  fields.push_back(cur);
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void strip_bom(std::string& line) {
  if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
      line[2] == '\xBF')
    line.erase(0, 3);
}

nlohmann::json meta_json(const ReportMeta& meta) {
  return {{"seed", meta.seed}, {"reps", meta.reps},
          {"build", build_identifier()}};
}

std::string horizon_string(const Horizon& hz) { return hz.label(); }

}  // namespace

std::string build_identifier() {
#ifdef BCUSUM_BUILD_ID
  return BCUSUM_BUILD_ID;
#else
  return "unknown";
#endif
}

namespace {

Dataset read_rows(std::istream& in, bool require_sample) {
  std::string line;
  if (!std::getline(in, line)) {
    if (!require_sample) return Dataset{};  // empty observation stream
    throw std::runtime_error("empty dataset: missing header row");
  }
  strip_bom(line);
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "y")
    throw std::runtime_error(
        "malformed CSV: header must start with column 'y'");
  const std::size_t n_cols = header.size();

  std::vector<double> ys;
  std::vector<double> xs;  // row-major, n_cols-1 per row
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n_cols)
      throw std::runtime_error("malformed CSV: line " +
                               std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(n_cols));
    ys.push_back(parse_double(fields[0], "y"));
    for (std::size_t j = 1; j < n_cols; ++j)
      xs.push_back(parse_double(fields[j], header[j].c_str()));
  }
  if (require_sample && ys.empty()) throw std::runtime_error("empty dataset");

  const std::size_t T = ys.size();
  const std::size_t k = n_cols;  // implicit intercept + n_cols-1 regressors
  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(T));
  data.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(T),
                                 static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < T; ++t) {
    data.y(static_cast<Eigen::Index>(t)) = ys[t];
    for (std::size_t j = 1; j < k; ++j)
      data.X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
          xs[t * (k - 1) + (j - 1)];
  }
  if (require_sample) data.validate();
  return data;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) { return read_rows(in, true); }

Dataset read_observations_csv(std::istream& in) {
  return read_rows(in, false);
}

Dataset load_dataset(const std::string& path) {
  if (path == "-") return read_dataset_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

std::string test_report_json(const TestReport& report,
                             const ReportMeta& meta) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["metadata"] = meta_json(meta);
  j["detector"] = to_string(report.detector);
  j["statistic"] = report.statistic;
  j["lambda"] = report.lambda;
  j["reject"] = report.reject;
  if (report.first_crossing)
    j["first_crossing"] = *report.first_crossing;
  else
    j["first_crossing"] = nullptr;
  if (!report.per_t.empty()) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [value, boundary] : report.per_t)
      trace.push_back({{"value", value}, {"boundary", boundary}});
    j["trace"] = trace;
  }
  return j.dump(2);
}

std::string break_estimate_json(const BreakEstimate& est,
                                const ReportMeta& meta) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["metadata"] = meta_json(meta);
  j["method"] = est.method == BreakMethod::ml ? "ml" : "bq";
  j["t_hat"] = est.t_hat;
  j["tau_hat"] = est.tau_hat;
  if (est.tau_hat_detection)
    j["tau_hat_detection"] = *est.tau_hat_detection;
  return j.dump(2);
}

std::string critval_table_json(const CriticalValueTable& table) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["metadata"] = {{"seed", table.seed},
                   {"n_reps", table.n_reps},
                   {"n_grid", table.n_grid},
                   {"build", build_identifier()}};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : table.entries)
    entries.push_back({{"kind", to_string(e.kind)},
                       {"nu", e.nu},
                       {"alpha", e.alpha},
                       {"horizon", horizon_string(e.horizon)},
                       {"lambda", e.lambda}});
  j["entries"] = entries;
  return j.dump(2);
}

std::string critval_table_csv(const CriticalValueTable& table) {
  std::ostringstream os;
  os << "# schema_version," << kSchemaVersion << "\n";
  os << "# seed," << table.seed << "\n";
  os << "# n_reps," << table.n_reps << "\n";
  os << "# n_grid," << table.n_grid << "\n";
  os << "# build," << csv_escape(build_identifier()) << "\n";
  os << "kind,nu,alpha,horizon,lambda\n";
  for (const auto& e : table.entries)
    os << to_string(e.kind) << ',' << e.nu << ',' << fmt_full(e.alpha) << ','
       << csv_escape(horizon_string(e.horizon)) << ',' << fmt_full(e.lambda)
       << "\n";
  return os.str();
}

std::string experiment_report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["table_id"] = report.table_id;
  j["metadata"] = {{"seed", report.seed},
                   {"reps", report.reps},
                   {"runtime_seconds", report.runtime_seconds},
                   {"build", build_identifier()}};
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells)
    cells.push_back(
        {{"row", c.row}, {"col", c.col}, {"value", c.value}, {"se", c.se}});
  j["cells"] = cells;
  return j.dump(2);
}

std::string experiment_report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "# schema_version," << kSchemaVersion << "\n";
  os << "# table_id," << csv_escape(report.table_id) << "\n";
  os << "# seed," << report.seed << "\n";
  os << "# reps," << report.reps << "\n";
  os << "# runtime_seconds," << fmt_full(report.runtime_seconds) << "\n";
  os << "# build," << csv_escape(build_identifier()) << "\n";
  os << "row,col,value,se\n";
  for (const auto& c : report.cells)
    os << csv_escape(c.row) << ',' << csv_escape(c.col) << ','
       << fmt_full(c.value) << ',' << fmt_full(c.se) << "\n";
  return os.str();
}

ExperimentReport experiment_report_from_csv(std::istream& in) {
  ExperimentReport report;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) strip_bom(line);
    if (line.empty() || line == "\r") continue;
    if (line.rfind("# ", 0) == 0) {
      const auto fields = split_csv_line(line.substr(2));
      if (fields.size() < 2) continue;
      const std::string& key = fields[0];
      const std::string& value = fields[1];
      if (key == "table_id") report.table_id = value;
      else if (key == "seed") report.seed = std::stoull(value);
      else if (key == "reps") report.reps = std::stoull(value);
      else if (key == "runtime_seconds")
        report.runtime_seconds = parse_double(value, "runtime_seconds");
      else if (key == "schema_version" &&
               std::stoi(value) != kSchemaVersion)
        throw std::runtime_error("report CSV: unsupported schema version");
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"row", "col", "value", "se"})
        throw std::runtime_error("report CSV: unexpected header row");
      header_seen = true;
      continue;
    }
    if (fields.size() != 4)
      throw std::runtime_error("report CSV: bad cell row at line " +
                               std::to_string(line_no));
    report.cells.push_back({fields[0], fields[1],
                            parse_double(fields[2], "value"),
                            parse_double(fields[3], "se")});
  }
  if (!header_seen)
    throw std::runtime_error("report CSV: missing header row");
  return report;
}

std::string curve_csv(const std::string& x_name, const std::string& y_name,
                      const std::vector<std::pair<double, double>>& points) {
  std::ostringstream os;
  os << csv_escape(x_name) << ',' << csv_escape(y_name) << "\n";
  for (const auto& [x, y] : points)
    os << fmt_full(x) << ',' << fmt_full(y) << "\n";
  return os.str();
}

}  // namespace bcusum
