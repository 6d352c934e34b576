// Command-line surface for the structural-change detector library:
//   test           retrospective CUSUM tests on a CSV regression sample
//   monitor        online monitoring over an observation stream
//   critval        Monte Carlo critical values for the limiting statistics
//   replicate      Monte Carlo study tables
//   estimate-break breakpoint estimation
// Exit codes: 0 = success / no rejection, 1 = error, 2 = rejection.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bcusum/breakpoint.hpp"
#include "bcusum/detectors.hpp"
#include "bcusum/io.hpp"
#include "bcusum/limit_sim.hpp"
#include "bcusum/monitor.hpp"
#include "bcusum/replication.hpp"

namespace {

using namespace bcusum;

constexpr std::size_t kDeskGrid = 2000;
constexpr std::size_t kDeskReps = 20000;
constexpr std::size_t kPaperGrid = 10000;
constexpr std::size_t kPaperReps = 100000;
// The tabulated monitoring critical values are tied to this bridge-grid
// resolution (the infinite-horizon statistic is grid-defined).
constexpr std::size_t kMonitorGrid = 10000;

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t generated =
      (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << generated << " (generated; pass --seed to "
            << "reproduce)\n";
  return generated;
}

Horizon parse_horizon(const std::string& text) {
  if (text == "ret" || text == "retro" || text == "retrospective")
    return Horizon::retro();
  if (text == "inf" || text == "infinite") return Horizon::infinite();
  std::string num = text;
  if (num.rfind("m=", 0) == 0) num = num.substr(2);
  try {
    return Horizon::fixed(std::stod(num));
  } catch (const std::exception&) {
    throw CLI::ValidationError("horizon",
                               "expected 'ret', 'inf', or a number m > 1");
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("matrix file: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("matrix file is empty: " + path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
  return out;
}

// ---------------------------------------------------------------- test

struct TestArgs {
  std::string input;
  std::string detector = "bq";
  double alpha = 0.05;
  std::optional<double> lambda;
  std::string projection;
  bool trace = false;
  std::string output;
  std::string format = "json";
};

int run_test(const TestArgs& args) {
  const Dataset data = load_dataset(args.input);
  DetectorConfig cfg;
  cfg.kind = detector_kind_from_string(args.detector);
  cfg.alpha = args.alpha;
  cfg.lambda = args.lambda;
  cfg.keep_trace = args.trace;
  if (!args.projection.empty()) cfg.H = read_matrix_csv(args.projection);
  const TestReport report = retrospective_test(data, cfg);
  if (args.format == "csv") {
    std::vector<std::pair<double, double>> points;
    for (std::size_t t = 0; t < report.per_t.size(); ++t)
      points.emplace_back(static_cast<double>(t + 1), report.per_t[t].first);
    write_output(curve_csv("t", "value", points), args.output);
  } else {
    write_output(test_report_json(report, {}), args.output);
  }
  return report.reject ? 2 : 0;
}

// ------------------------------------------------------------- monitor

struct MonitorArgs {
  std::string history;
  std::string stream;
  std::string state_in;
  std::string state_out;
  std::string detector = "sbq";
  std::string boundary = "linear";
  double alpha = 0.05;
  std::optional<double> lambda;
  std::string m = "inf";
  bool stop_on_detect = false;
};

int run_monitor(const MonitorArgs& args) {
  MonitorState state = [&] {
    if (!args.state_in.empty()) {
      std::ifstream in(args.state_in);
      if (!in)
        throw std::runtime_error("cannot open state file: " + args.state_in);
      std::stringstream ss;
      ss << in.rdbuf();
      return MonitorState::from_json(ss.str());
    }
    if (args.history.empty())
      throw std::runtime_error("monitor: need --history or --state-in");
    MonitorConfig cfg;
    cfg.kind = detector_kind_from_string(args.detector);
    cfg.boundary = boundary_kind_from_string(args.boundary);
    cfg.alpha = args.alpha;
    cfg.lambda = args.lambda;
    cfg.m = (args.m == "inf") ? std::numeric_limits<double>::infinity()
                              : std::stod(args.m);
    return MonitorState::init(load_dataset(args.history), cfg);
  }();

  bool crossed = state.stopped_at().has_value();
  if (!args.stream.empty()) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (args.stream != "-") {
      file.open(args.stream);
      if (!file)
        throw std::runtime_error("cannot open stream file: " + args.stream);
      in = &file;
    }
    const Dataset obs = read_observations_csv(*in);
    if (obs.T() > 0 && obs.k() != state.k())
      throw std::runtime_error(
          "monitor: stream has " + std::to_string(obs.k()) +
          " regressor columns, state expects " + std::to_string(state.k()));
    std::cout << "t,value,boundary,crossed,stopping_time\n";
    const double m = state.config().m;
    for (std::size_t i = 0; i < obs.T(); ++i) {
      if (std::isfinite(m) &&
          state.t_now() + 1 >
              static_cast<std::size_t>(m * static_cast<double>(state.T())))
        break;
      const MonitorStatus st = state.step(
          obs.X.row(static_cast<Eigen::Index>(i)).transpose(), obs.y(i));
      std::cout << st.t << ',' << st.value << ',' << st.boundary_at_t << ','
                << (st.crossed ? "true" : "false") << ',';
      if (st.stopping_time) std::cout << *st.stopping_time;
      std::cout << '\n';
      crossed = crossed || st.crossed;
      if (crossed && args.stop_on_detect) break;
    }
  }
  if (!args.state_out.empty()) {
    std::ofstream out(args.state_out);
    if (!out)
      throw std::runtime_error("cannot open state file: " + args.state_out);
    out << state.to_json();
  }
  return crossed ? 2 : 0;
}

// ------------------------------------------------------------- critval

struct CritvalArgs {
  std::string kind = "sbq";
  std::vector<std::size_t> nus = {1};
  std::vector<double> alphas = {0.05};
  std::vector<std::string> horizons = {"ret"};
  std::optional<std::size_t> grid;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool paper_scale = false;
  std::string output;
  std::string format = "json";
};

int run_critval(const CritvalArgs& args) {
  std::vector<Horizon> horizons;
  bool any_monitoring = false;
  for (const auto& h : args.horizons) {
    horizons.push_back(parse_horizon(h));
    any_monitoring = any_monitoring || !horizons.back().is_retro();
  }
  SimConfig cfg;
  cfg.seed = resolve_seed(args.seed);
  cfg.n_reps = args.reps.value_or(args.paper_scale ? kPaperReps : kDeskReps);
  cfg.n_grid = args.grid.value_or(
      args.paper_scale ? kPaperGrid
                       : (any_monitoring ? kMonitorGrid : kDeskGrid));
  cfg.workers = args.workers;
  const CriticalValueTable table = make_critical_value_table(
      {detector_kind_from_string(args.kind)}, args.nus, horizons, args.alphas,
      cfg);
  write_output(args.format == "csv" ? critval_table_csv(table)
                                    : critval_table_json(table),
               args.output);
  return 0;
}

// ----------------------------------------------------------- replicate

struct ReplicateArgs {
  int table = 0;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool paper_scale = false;
  std::string nus = "1,2";
  std::string output;
  std::string format = "json";
};

int run_replicate(const ReplicateArgs& args) {
  const std::uint64_t seed = resolve_seed(args.seed);
  const std::size_t reps =
      args.reps.value_or(args.paper_scale ? kPaperReps : kDeskReps);
  const unsigned workers = args.workers;

  if (args.table == 1 || args.table == 2) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_reps = reps;
    cfg.workers = workers;
    std::vector<std::size_t> nus;
    for (const double nu : parse_double_list(args.nus))
      nus.push_back(static_cast<std::size_t>(nu));
    CriticalValueTable table;
    if (args.table == 1) {
      cfg.n_grid = args.paper_scale ? kPaperGrid : kDeskGrid;
      table = make_critical_value_table(
          {DetectorKind::forward, DetectorKind::stacked}, nus,
          {Horizon::retro()}, {0.20, 0.10, 0.05, 0.025, 0.01}, cfg);
    } else {
      cfg.n_grid = kMonitorGrid;
      std::vector<Horizon> horizons;
      for (const double m :
           {1.2, 1.4, 1.6, 1.8, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0})
        horizons.push_back(Horizon::fixed(m));
      horizons.push_back(Horizon::infinite());
      table = make_critical_value_table({DetectorKind::stacked}, nus,
                                        horizons, {0.10, 0.05, 0.01}, cfg);
    }
    write_output(args.format == "csv" ? critval_table_csv(table)
                                      : critval_table_json(table),
                 args.output);
    return 0;
  }

  HarnessConfig cfg;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.workers = workers;
  ExperimentReport report;
  switch (args.table) {
    case 3:
      report = run_size_table({1, 2, 3, 4}, {100, 200, 500}, cfg);
      break;
    case 4:
      report = run_power_table({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                               100, cfg);
      break;
    case 5:
      report = run_monitor_size_table({1, 2}, {100, 200, 500},
                                      {1.5, 2, 4, 6, 8, 10}, cfg);
      break;
    case 6:
      report = run_delay_table({1.5, 2, 2.5, 3, 5, 10}, 100, 20.0, cfg);
      break;
    case 7:
      report = run_break_table({0.5, 0.65, 0.8, 0.85, 0.9, 0.95, 0.97, 0.99},
                               {100, 200}, 0.8, cfg);
      break;
    default:
      throw std::runtime_error("replicate: --table must be 1..7");
  }
  write_output(args.format == "csv" ? experiment_report_csv(report)
                                    : experiment_report_json(report),
               args.output);
  return 0;
}

// ------------------------------------------------------ estimate-break

struct EstimateArgs {
  std::string input;
  std::string method = "both";
  std::optional<std::size_t> t_hist;
  std::string output;
};

int run_estimate_break(const EstimateArgs& args) {
  const Dataset data = load_dataset(args.input);
  const BreakContext ctx =
      args.t_hist ? BreakContext::monitor(*args.t_hist, data.T())
                  : BreakContext::retrospective();
  std::string out;
  if (args.method == "ml" || args.method == "both")
    out += break_estimate_json(estimate_break_ml(data, ctx), {});
  if (args.method == "bq" || args.method == "both") {
    if (!out.empty()) out += "\n";
    out += break_estimate_json(estimate_break_bq(fit_history(data), ctx), {});
  }
  if (out.empty())
    throw std::runtime_error("estimate-break: --method must be ml, bq, both");
  write_output(out, args.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CUSUM-based structural change tests, monitoring, and "
               "breakpoint estimation for linear regressions"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand(
      "test", "Retrospective structural change test on a CSV sample");
  test->add_option("-i,--input", test_args.input,
                   "CSV file with header y,x1,... ('-' = stdin)")
      ->required();
  test->add_option("-d,--detector", test_args.detector,
                   "Detector kind: q, bq, or sbq");
  test->add_option("-a,--alpha", test_args.alpha, "Significance level");
  double lambda_opt = 0.0;
  auto* lam =
      test->add_option("--lambda", lambda_opt, "Explicit critical value");
  test->add_option("--projection", test_args.projection,
                   "CSV matrix of orthonormal columns (partial break test)");
  test->add_flag("--trace", test_args.trace, "Include the detector trace");
  test->add_option("-o,--output", test_args.output, "Output path");
  test->add_option("--format", test_args.format, "json or csv");

  MonitorArgs mon_args;
  auto* mon = app.add_subcommand(
      "monitor", "Online monitoring over an observation stream");
  mon->add_option("--history", mon_args.history,
                  "CSV of the break-free historical sample");
  mon->add_option("--stream", mon_args.stream,
                  "CSV of incoming observations ('-' = stdin)");
  mon->add_option("--state-in", mon_args.state_in,
                  "Resume from a serialized state file");
  mon->add_option("--state-out", mon_args.state_out,
                  "Write serialized state on exit");
  mon->add_option("-d,--detector", mon_args.detector, "q or sbq");
  mon->add_option("--boundary", mon_args.boundary, "linear or radical");
  mon->add_option("-a,--alpha", mon_args.alpha, "Significance level");
  double mon_lambda = 0.0;
  auto* mon_lam =
      mon->add_option("--lambda", mon_lambda, "Explicit critical value");
  mon->add_option("-m", mon_args.m, "Horizon endpoint (number or 'inf')");
  mon->add_flag("--stop-on-detect", mon_args.stop_on_detect,
                "Stop consuming at the first crossing");

  CritvalArgs cv_args;
  auto* cv = app.add_subcommand(
      "critval", "Simulate critical values of the limiting statistics");
  cv->add_option("--kind", cv_args.kind, "q, bq, or sbq");
  cv->add_option("--nu", cv_args.nus, "Dimension(s)");
  cv->add_option("--alpha", cv_args.alphas, "Significance level(s)");
  cv->add_option("--horizon", cv_args.horizons,
                 "'ret', 'inf', or m value(s)");
  std::size_t cv_grid = 0, cv_reps = 0;
  std::uint64_t cv_seed = 0;
  auto* cv_grid_opt = cv->add_option("--grid", cv_grid, "Grid points");
  auto* cv_reps_opt = cv->add_option("--reps", cv_reps, "Replications");
  auto* cv_seed_opt = cv->add_option("--seed", cv_seed, "RNG seed");
  cv->add_option("--workers", cv_args.workers, "Worker threads");
  cv->add_flag("--paper-scale", cv_args.paper_scale,
               "Full-scale settings (10^4 grid, 10^5 reps)");
  cv->add_option("-o,--output", cv_args.output, "Output path");
  cv->add_option("--format", cv_args.format, "json or csv");

  ReplicateArgs rep_args;
  auto* rep = app.add_subcommand("replicate",
                                 "Reproduce a Monte Carlo study table");
  rep->add_option("--table", rep_args.table, "Table number 1..7")->required();
  std::size_t rep_reps = 0;
  std::uint64_t rep_seed = 0;
  auto* rep_reps_opt = rep->add_option("--reps", rep_reps, "Replications");
  auto* rep_seed_opt = rep->add_option("--seed", rep_seed, "RNG seed");
  rep->add_option("--workers", rep_args.workers, "Worker threads");
  rep->add_flag("--paper-scale", rep_args.paper_scale,
                "Full-scale settings (10^5 reps)");
  rep->add_option("--nus", rep_args.nus,
                  "Dimensions for tables 1-2 (comma list)");
  rep->add_option("-o,--output", rep_args.output, "Output path");
  rep->add_option("--format", rep_args.format, "json or csv");

  EstimateArgs est_args;
  auto* est = app.add_subcommand("estimate-break",
                                 "Estimate the breakpoint location");
  est->add_option("-i,--input", est_args.input, "CSV sample ('-' = stdin)")
      ->required();
  est->add_option("--method", est_args.method, "ml, bq, or both");
  std::size_t est_t_hist = 0;
  auto* est_hist = est->add_option(
      "--t-hist", est_t_hist,
      "Historical sample length (monitoring context; data spans 1..T_d)");
  est->add_option("-o,--output", est_args.output, "Output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) {
      if (*lam) test_args.lambda = lambda_opt;
      return run_test(test_args);
    }
    if (*mon) {
      if (*mon_lam) mon_args.lambda = mon_lambda;
      return run_monitor(mon_args);
    }
    if (*cv) {
      if (*cv_grid_opt) cv_args.grid = cv_grid;
      if (*cv_reps_opt) cv_args.reps = cv_reps;
      if (*cv_seed_opt) cv_args.seed = cv_seed;
      return run_critval(cv_args);
    }
    if (*rep) {
      if (*rep_reps_opt) rep_args.reps = rep_reps;
      if (*rep_seed_opt) rep_args.seed = rep_seed;
      return run_replicate(rep_args);
    }
    if (*est) {
      if (*est_hist) est_args.t_hist = est_t_hist;
      return run_estimate_break(est_args);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
