#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bcusum/breakpoint.hpp"
#include "bcusum/dataset.hpp"
#include "bcusum/detectors.hpp"
#include "bcusum/limit_sim.hpp"
#include "bcusum/replication.hpp"

namespace bcusum {

// Identifier of this build (version-control describe string when the
// build system provides one), embedded in every report metadata block.
std::string build_identifier();

// Comma-separated, '.' decimal, UTF-8, header row required:
//   y,x1,...,x{k-1}
// The intercept column is implicit and prepended on read.
Dataset read_dataset_csv(std::istream& in);
// path "-" reads standard input
Dataset load_dataset(const std::string& path);

// Same format as read_dataset_csv but without the minimum-length
// requirement, for monitoring observation streams (may hold any number
// of rows, including zero).
Dataset read_observations_csv(std::istream& in);

struct ReportMeta {
  std::uint64_t seed = 0;
  std::size_t reps = 0;
};

// JSON documents all carry schema_version and a metadata block
// (seed, reps, build) sufficient to reproduce the run.
std::string test_report_json(const TestReport& report, const ReportMeta& meta);
std::string break_estimate_json(const BreakEstimate& est,
                                const ReportMeta& meta);
std::string critval_table_json(const CriticalValueTable& table);
std::string critval_table_csv(const CriticalValueTable& table);
std::string experiment_report_json(const ExperimentReport& report);
std::string experiment_report_csv(const ExperimentReport& report);
// Inverse of experiment_report_csv; cell data, table_id, seed, and reps
// round-trip exactly.
ExperimentReport experiment_report_from_csv(std::istream& in);

// Plot-ready curve: header then one "abscissa,value" row per point.
std::string curve_csv(const std::string& x_name, const std::string& y_name,
                      const std::vector<std::pair<double, double>>& points);

}  // namespace bcusum
