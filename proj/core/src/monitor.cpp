#include "bcusum/monitor.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace bcusum {

namespace {

constexpr int kSchemaVersion = 1;

double boundary_shape(const MonitorConfig& cfg, double r) {
  if (cfg.boundary == BoundaryKind::linear) return 1.0 + 2.0 * r;
  return std::sqrt((r + 1.0) * std::log((r + 1.0) / (cfg.alpha * cfg.alpha)));
}

double resolve_lambda(const MonitorConfig& cfg, std::size_t nu) {
  if (cfg.lambda) return *cfg.lambda;
  if (cfg.boundary == BoundaryKind::radical_chu) return 1.0;  // self-calibrated
  const Horizon hz = std::isinf(cfg.m) ? Horizon::infinite()
                                       : Horizon::fixed(cfg.m);
  const auto looked = lookup_critical_value(cfg.kind, nu, cfg.alpha, hz);
  if (!looked)
    throw std::runtime_error(
        "no tabulated monitoring critical value for this "
        "(detector, nu, alpha, m); pass an explicit lambda");
  return *looked;
}

}  // namespace

MonitorState MonitorState::init(const Dataset& historical,
                                const MonitorConfig& cfg) {
  if (cfg.kind == DetectorKind::backward)
    throw std::invalid_argument(
        "the backward detector cannot be monitored; use forward or stacked");
  const HistoryFit fit = fit_history(historical);
  if (cfg.boundary == BoundaryKind::radical_chu) {
    if (cfg.kind != DetectorKind::forward || fit.k != 1)
      throw std::invalid_argument(
          "the radical boundary applies to univariate forward monitoring only");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
      throw std::invalid_argument("radical boundary requires alpha in (0,1)");
  }
  if (!(cfg.m > 1.0))
    throw std::invalid_argument("monitor: horizon endpoint m must exceed 1");

  MonitorState st;
  st.cfg_ = cfg;
  st.sigma_hat_ = fit.sigma_hat;
  st.c_inv_sqrt_ = fit.C_inv_sqrt;
  st.T_ = fit.T;
  st.k_ = fit.k;
  st.lambda_ = resolve_lambda(cfg, fit.k);
  st.rls_ = fit.final_state;
  st.rls_.refactor();
  const double scale = 1.0 / (fit.sigma_hat * std::sqrt(double(fit.T)));
  Eigen::VectorXd q_T = Eigen::VectorXd::Zero(fit.k);
  for (std::size_t t = 0; t < fit.T; ++t)
    q_T += scale * (fit.C_inv_sqrt * fit.xw.row(t).transpose());
  st.qcum_.push_back(q_T);
  st.t_now_ = fit.T;
  return st;
}

MonitorStatus MonitorState::step(const Eigen::VectorXd& x, double y) {
  const std::size_t t = t_now_ + 1;
  if (std::isfinite(cfg_.m) &&
      t > static_cast<std::size_t>(cfg_.m * static_cast<double>(T_)))
    throw std::runtime_error("monitor: consumed past the fixed endpoint m*T");
  if (cfg_.max_retained && qcum_.size() >= *cfg_.max_retained)
    throw std::runtime_error("monitor: retained-state cap exceeded");

  const double w = recursive_residual_step(rls_, x, y);
  const double scale = 1.0 / (sigma_hat_ * std::sqrt(double(T_)));
  const Eigen::VectorXd q_new =
      qcum_.back() + scale * (c_inv_sqrt_ * (x * w));
  qcum_.push_back(q_new);
  t_now_ = t;

  const double Td = static_cast<double>(T_);
  double value = 0.0;
  if (cfg_.kind == DetectorKind::forward) {
    const double r = static_cast<double>(t - T_) / Td;
    value = (q_new - qcum_.front()).cwiseAbs().maxCoeff() /
            boundary_shape(cfg_, r);
  } else {
    // stacked: scan window starts s = T+1..t; qcum_[j] holds q_{T+j}
    for (std::size_t s = T_ + 1; s <= t; ++s) {
      const double d = boundary_shape(
          cfg_, static_cast<double>(t - s + 1) / Td);
      const double nrm =
          (q_new - qcum_[s - 1 - T_]).cwiseAbs().maxCoeff();
      value = std::max(value, nrm / d);
    }
  }

  if (value > running_max_) running_max_ = value;
  if (!stopped_at_ && value >= lambda_) stopped_at_ = t;

  MonitorStatus status;
  status.t = t;
  status.value = value;
  status.boundary_at_t = lambda_;
  status.crossed = stopped_at_.has_value() && *stopped_at_ <= t;
  status.stopping_time = stopped_at_;
  return status;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

std::string MonitorState::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = to_string(cfg_.kind);
  j["boundary"] = to_string(cfg_.boundary);
  j["alpha"] = cfg_.alpha;
  j["m"] = std::isfinite(cfg_.m) ? nlohmann::json(cfg_.m)
                                 : nlohmann::json("inf");
  if (cfg_.max_retained) j["max_retained"] = *cfg_.max_retained;
  j["sigma_hat"] = sigma_hat_;
  j["c_inv_sqrt"] = matrix_to_json(c_inv_sqrt_);
  j["T"] = T_;
  j["k"] = k_;
  j["lambda"] = lambda_;
  // M_inv and the refactorization counter are serialized so a resumed
  // state continues bit-for-bit identically to the uninterrupted run
  j["rls"] = {{"t", rls_.t},
              {"M", matrix_to_json(rls_.M)},
              {"M_inv", matrix_to_json(rls_.M_inv)},
              {"v", vector_to_json(rls_.v)},
              {"steps_since_refactor", rls_.steps_since_refactor}};
  nlohmann::json qcum = nlohmann::json::array();
  for (const auto& q : qcum_) qcum.push_back(vector_to_json(q));
  j["qcum"] = qcum;
  j["t_now"] = t_now_;
  j["running_max"] = running_max_;
  if (stopped_at_) j["stopped_at"] = *stopped_at_;
  return j.dump();
}

MonitorState MonitorState::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::runtime_error("monitor state: unsupported schema version");

  MonitorState st;
  st.cfg_.kind = detector_kind_from_string(j.at("kind").get<std::string>());
  st.cfg_.boundary =
      boundary_kind_from_string(j.at("boundary").get<std::string>());
  st.cfg_.alpha = j.at("alpha").get<double>();
  if (j.at("m").is_string())
    st.cfg_.m = std::numeric_limits<double>::infinity();
  else
    st.cfg_.m = j.at("m").get<double>();
  if (j.contains("max_retained"))
    st.cfg_.max_retained = j["max_retained"].get<std::size_t>();
  st.sigma_hat_ = j.at("sigma_hat").get<double>();
  st.c_inv_sqrt_ = matrix_from_json(j.at("c_inv_sqrt"));
  st.T_ = j.at("T").get<std::size_t>();
  st.k_ = j.at("k").get<std::size_t>();
  st.lambda_ = j.at("lambda").get<double>();
  st.cfg_.lambda = st.lambda_;
  st.rls_ = RlsState(st.k_);
  st.rls_.t = j.at("rls").at("t").get<std::size_t>();
  st.rls_.M = matrix_from_json(j.at("rls").at("M"));
  st.rls_.M_inv = matrix_from_json(j.at("rls").at("M_inv"));
  st.rls_.v = vector_from_json(j.at("rls").at("v"));
  st.rls_.steps_since_refactor =
      j.at("rls").at("steps_since_refactor").get<std::size_t>();
  st.rls_.rank_ok = true;
  for (const auto& q : j.at("qcum")) st.qcum_.push_back(vector_from_json(q));
  st.t_now_ = j.at("t_now").get<std::size_t>();
  st.running_max_ = j.at("running_max").get<double>();
  if (j.contains("stopped_at"))
    st.stopped_at_ = j["stopped_at"].get<std::size_t>();
  return st;
}

MonitorReport monitor_run(
    MonitorState& state,
    const std::vector<std::pair<Eigen::VectorXd, double>>& stream,
    std::optional<std::size_t> true_break) {
  MonitorReport report;
  const double m = state.config().m;
  for (const auto& [x, y] : stream) {
    if (std::isfinite(m) &&
        state.t_now() + 1 >
            static_cast<std::size_t>(m * static_cast<double>(state.T())))
      break;
    report.trace.push_back(state.step(x, y));
  }
  report.stopping_time = state.stopped_at();
  report.running_max = state.running_max();
  if (report.stopping_time && true_break)
    report.delay = static_cast<long>(*report.stopping_time) -
                   static_cast<long>(*true_break);
  return report;
}

}  // namespace bcusum
