#pragma once

// Config-driven orchestration behind the `sens2` command line tool: model
// selection, method dispatch, oracle comparison, moment propagation, and
// the JSON/CSV report format.

#include "sens2/benchmarks.hpp"
#include "sens2/engine.hpp"
#include "sens2/errors.hpp"
#include "sens2/ledger.hpp"
#include "sens2/verification.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sens2 {

enum class Method { adjoint2, forward2, fd, all };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::adjoint2: return "adjoint2";
    case Method::forward2: return "forward2";
    case Method::fd: return "fd";
    case Method::all: return "all";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "adjoint2") return Method::adjoint2;
  if (s == "forward2") return Method::forward2;
  if (s == "fd") return Method::fd;
  if (s == "all") return Method::all;
  throw ConfigError("unknown method '" + s + "' (expected adjoint2|forward2|fd|all)", "method");
}

/// Step factor used by the fd method for its paired forward gradient/Hessian.
inline constexpr double kCountingStep = 1e-5;

/// Pairwise tolerances asserted by method=all.
struct OracleTolerances {
  double forward_route = 1e-10;
  double fd_adjoint_gradient = 1e-5;
  double fd_hessian = 1e-4;
  double fd_gradient = 1e-6;
  double symmetry = 1e-9;
};

struct ModelConfig {
  std::string name;
  Index n_cells = 50;
  Index n_zones = 1;
  std::vector<std::string> active;  ///< empty: all parameters
};

struct RunConfig {
  ModelConfig model;
  std::map<std::string, double> param_overrides;
  std::optional<Vector> params;  ///< full parameter vector, overrides nominal
  Method method = Method::adjoint2;
  std::optional<FdScheme> fd_scheme;
  NewtonOptions newton;
  std::string out_path;
  std::string csv_path;
  std::optional<Matrix> covariance;
  unsigned threads = 1;
};

struct Moments {
  double mean_shift = 0.0;
  double variance = 0.0;
};

struct OracleComparison {
  std::string quantity;
  std::string reference;
  std::string candidate;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct SensitivityReport {
  std::string model;
  std::string method;
  std::vector<std::string> parameter_names;
  Vector parameters;
  double response = 0.0;
  Vector gradient;
  Matrix hessian_raw;
  Matrix hessian_symmetrized;
  double symmetry_residual = 0.0;
  std::map<std::string, LedgerSnapshot> ledgers;  ///< keyed by path
  std::vector<OracleComparison> comparisons;
  std::optional<Moments> moments;
  std::vector<std::string> warnings;

  bool comparisons_passed() const {
    for (const auto& c : comparisons) {
      if (!c.passed) return false;
    }
    return true;
  }
};

/// A solver failure tagged with the run phase it happened in.
class SolverFailure : public Error {
 public:
  SolverFailure(std::string phase, const std::string& what)
      : Error("[" + phase + "] " + what), phase_(std::move(phase)) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

/// Internal oracle agreement failed (method=all) or a count check failed.
class VerificationFailure : public Error {
 public:
  VerificationFailure(const std::string& what, SensitivityReport report)
      : Error(what), report_(std::move(report)) {}
  const SensitivityReport& report() const noexcept { return report_; }

 private:
  SensitivityReport report_;
};

// ---------------------------------------------------------------------------
// Moment propagation
// ---------------------------------------------------------------------------

/// Throws ConfigError unless `cov` is square, symmetric, and PSD.
inline void require_covariance(const Matrix& cov, Index n) {
  if (cov.rows() != n || cov.cols() != n) {
    std::ostringstream os;
    os << "covariance must be " << n << "x" << n;
    throw ConfigError(os.str(), "covariance");
  }
  if (n == 0) return;
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("covariance is not symmetric", "covariance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw ConfigError("covariance is not positive semi-definite", "covariance");
  }
}

/// Second-order Taylor moments of R for Gaussian parameters N(alpha0, cov):
/// mean shift 1/2 tr(H cov), variance S^T cov S + 1/2 tr((H cov)^2).
inline Moments propagate_moments(const Vector& s, const Matrix& h_sym, const Matrix& cov) {
  require_covariance(cov, s.size());
  const Matrix hc = h_sym * cov;
  return {0.5 * hc.trace(), s.dot(cov * s) + 0.5 * (hc * hc).trace()};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json vec_to_json(const Vector& v) {
  auto a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline nlohmann::json mat_to_json(const Matrix& m) {
  auto a = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

inline Vector vec_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers", field);
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number", field + "[" + std::to_string(i) + "]");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Matrix mat_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("expected an array of rows", field);
  const auto rows = static_cast<Index>(j.size());
  Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    const Vector row = vec_from_json(j[static_cast<std::size_t>(r)], rf);
    if (row.size() != cols) throw ConfigError("ragged matrix row", rf);
    m.row(r) = row.transpose();
  }
  return m;
}

inline nlohmann::json ledger_to_json(const LedgerSnapshot& s) {
  nlohmann::json j;
  for (Purpose p : kAllPurposes) {
    nlohmann::json pj;
    for (Counter c : kAllCounters) pj[std::string(to_string(c))] = s.count(p, c);
    j["by_purpose"][std::string(to_string(p))] = std::move(pj);
  }
  for (Counter c : kAllCounters) j["totals"][std::string(to_string(c))] = s.count(c);
  return j;
}

inline LedgerSnapshot ledger_from_json(const nlohmann::json& j) {
  LedgerSnapshot s;
  for (Purpose p : kAllPurposes) {
    for (Counter c : kAllCounters) {
      s.by_purpose[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)] =
          j.at("by_purpose").at(std::string(to_string(p))).at(std::string(to_string(c))).get<std::uint64_t>();
    }
  }
  for (Counter c : kAllCounters) {
    s.totals[static_cast<std::size_t>(c)] = j.at("totals").at(std::string(to_string(c))).get<std::uint64_t>();
  }
  return s;
}

/// 1-based line number of a byte offset in `text`.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

template <class T>
T get_field(const nlohmann::json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("wrong type for field", path + "." + key);
  }
}

}  // namespace detail

inline nlohmann::json to_json(const SensitivityReport& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["method"] = r.method;
  j["parameter_names"] = r.parameter_names;
  j["parameters"] = detail::vec_to_json(r.parameters);
  j["response"] = r.response;
  j["gradient"] = detail::vec_to_json(r.gradient);
  j["hessian_raw"] = detail::mat_to_json(r.hessian_raw);
  j["hessian_symmetrized"] = detail::mat_to_json(r.hessian_symmetrized);
  j["symmetry_residual"] = r.symmetry_residual;
  j["ledgers"] = nlohmann::json::object();
  for (const auto& [path, snap] : r.ledgers) j["ledgers"][path] = detail::ledger_to_json(snap);
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : r.comparisons) {
    j["comparisons"].push_back({{"quantity", c.quantity},
                                {"reference", c.reference},
                                {"candidate", c.candidate},
                                {"error", c.error},
                                {"tolerance", c.tolerance},
                                {"passed", c.passed}});
  }
  if (r.moments) {
    j["moments"] = {{"mean_shift", r.moments->mean_shift}, {"variance", r.moments->variance}};
  }
  j["warnings"] = r.warnings;
  return j;
}

inline SensitivityReport report_from_json(const nlohmann::json& j) {
  SensitivityReport r;
  r.model = j.at("model").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
  r.parameters = detail::vec_from_json(j.at("parameters"), "parameters");
  r.response = j.at("response").get<double>();
  r.gradient = detail::vec_from_json(j.at("gradient"), "gradient");
  r.hessian_raw = detail::mat_from_json(j.at("hessian_raw"), "hessian_raw");
  r.hessian_symmetrized = detail::mat_from_json(j.at("hessian_symmetrized"), "hessian_symmetrized");
  if (r.hessian_raw.rows() == 0) r.hessian_raw.resize(0, 0);
  if (r.hessian_symmetrized.rows() == 0) r.hessian_symmetrized.resize(0, 0);
  r.symmetry_residual = j.at("symmetry_residual").get<double>();
  for (const auto& [path, lj] : j.at("ledgers").items()) r.ledgers[path] = detail::ledger_from_json(lj);
  for (const auto& c : j.at("comparisons")) {
    r.comparisons.push_back({c.at("quantity").get<std::string>(), c.at("reference").get<std::string>(),
                             c.at("candidate").get<std::string>(), c.at("error").get<double>(),
                             c.at("tolerance").get<double>(), c.at("passed").get<bool>()});
  }
  if (j.contains("moments")) {
    r.moments = Moments{j["moments"].at("mean_shift").get<double>(),
                        j["moments"].at("variance").get<double>()};
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

inline std::string hessian_csv(const Matrix& h) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Index r = 0; r < h.rows(); ++r) {
    for (Index c = 0; c < h.cols(); ++c) os << (c ? "," : "") << h(r, c);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::ostringstream os;
    os << "config parse error at line " << detail::line_of(text, e.byte) << ": " << e.what();
    throw ConfigError(os.str());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg;
  if (!j.contains("model")) throw ConfigError("missing required field", "model");
  const auto& m = j["model"];
  if (m.is_string()) {
    cfg.model.name = m.get<std::string>();
  } else if (m.is_object()) {
    if (!m.contains("name") || !m["name"].is_string()) throw ConfigError("missing model name", "model.name");
    cfg.model.name = m["name"].get<std::string>();
    cfg.model.n_cells = detail::get_field<Index>(m, "n_cells", "model", cfg.model.n_cells);
    cfg.model.n_zones = detail::get_field<Index>(m, "n_zones", "model", cfg.model.n_zones);
    cfg.model.active =
        detail::get_field<std::vector<std::string>>(m, "active_parameters", "model", {});
  } else {
    throw ConfigError("expected a model name or object", "model");
  }
  const auto& names = benchmark_names();
  if (std::find(names.begin(), names.end(), cfg.model.name) == names.end()) {
    throw ConfigError("unknown model '" + cfg.model.name + "'", "model.name");
  }
  if (cfg.model.n_cells < 1) throw ConfigError("must be >= 1", "model.n_cells");
  if (cfg.model.n_zones < 1) throw ConfigError("must be >= 1", "model.n_zones");

  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    if (p.is_array()) {
      cfg.params = detail::vec_from_json(p, "parameters");
    } else if (p.is_object()) {
      for (const auto& [k, v] : p.items()) {
        if (!v.is_number()) throw ConfigError("expected a number", "parameters." + k);
        cfg.param_overrides[k] = v.get<double>();
      }
    } else {
      throw ConfigError("expected an array or object", "parameters");
    }
  }

  if (j.contains("method")) {
    if (!j["method"].is_string()) throw ConfigError("expected a string", "method");
    cfg.method = parse_method(j["method"].get<std::string>());
  }

  if (j.contains("fd")) {
    const auto& f = j["fd"];
    if (!f.is_object()) throw ConfigError("expected an object", "fd");
    const std::string scheme = detail::get_field<std::string>(f, "scheme", "fd", "central");
    FdScheme s;
    if (scheme == "central") {
      s = FdScheme::central();
    } else if (scheme == "forward") {
      s = FdScheme::forward(kCountingStep);
    } else {
      throw ConfigError("expected 'forward' or 'central'", "fd.scheme");
    }
    s.c = detail::get_field<double>(f, "step", "fd", s.c);
    if (!(s.c > 0.0)) throw ConfigError("must be > 0", "fd.step");
    cfg.fd_scheme = s;
  }

  if (j.contains("newton")) {
    const auto& n = j["newton"];
    if (!n.is_object()) throw ConfigError("expected an object", "newton");
    cfg.newton.abs_tol = detail::get_field<double>(n, "abs_tol", "newton", cfg.newton.abs_tol);
    cfg.newton.max_iter = detail::get_field<int>(n, "max_iter", "newton", cfg.newton.max_iter);
    cfg.newton.damping = detail::get_field<double>(n, "damping", "newton", cfg.newton.damping);
    cfg.newton.max_backtracks =
        detail::get_field<int>(n, "max_backtracks", "newton", cfg.newton.max_backtracks);
    try {
      cfg.newton.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "newton");
    }
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) throw ConfigError("expected an object", "output");
    cfg.out_path = detail::get_field<std::string>(o, "report", "output", "");
    cfg.csv_path = detail::get_field<std::string>(o, "csv", "output", "");
  }

  if (j.contains("covariance")) cfg.covariance = detail::mat_from_json(j["covariance"], "covariance");
  cfg.threads = detail::get_field<unsigned>(j, "threads", "config", 1u);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Model construction and run orchestration
// ---------------------------------------------------------------------------

struct ResolvedModel {
  std::shared_ptr<const Model> model;
  Vector params;
};

inline ResolvedModel resolve_model(const RunConfig& cfg) {
  std::shared_ptr<const Model> model;
  try {
    model = make_benchmark(cfg.model.name, {cfg.model.n_cells, cfg.model.n_zones});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "model");
  }

  Vector full = model->nominal_params();
  if (cfg.params && cfg.model.active.empty()) {
    if (cfg.params->size() != full.size()) {
      throw ConfigError("parameter vector has wrong length", "parameters");
    }
    full = *cfg.params;
  }
  const auto& names = model->param_names();
  for (const auto& [k, v] : cfg.param_overrides) {
    auto it = std::find(names.begin(), names.end(), k);
    if (it == names.end()) throw ConfigError("unknown parameter '" + k + "'", "parameters." + k);
    full[std::distance(names.begin(), it)] = v;
  }
  if (!model->admissible_box().contains(full)) {
    throw ConfigError("parameters outside the admissible box", "parameters");
  }

  if (cfg.model.active.empty()) return {model, full};

  std::vector<Index> idx;
  for (const auto& a : cfg.model.active) {
    auto it = std::find(names.begin(), names.end(), a);
    if (it == names.end()) {
      throw ConfigError("unknown parameter '" + a + "'", "model.active_parameters");
    }
    idx.push_back(std::distance(names.begin(), it));
  }
  auto sub = std::make_shared<ParameterSubset>(model, idx, full);
  Vector sub_params = sub->nominal_params();
  if (cfg.params) {
    if (cfg.params->size() != sub_params.size()) {
      throw ConfigError("parameter vector has wrong length", "parameters");
    }
    sub_params = *cfg.params;
  }
  return {sub, sub_params};
}

namespace detail {

template <class F>
auto in_phase(const std::string& phase, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const VerificationFailure&) {
    throw;
  } catch (const Error& e) {
    throw SolverFailure(phase, e.what());
  }
}

inline void add_count_checks(SensitivityReport& report, const LedgerSnapshot& snap, Index n,
                             LedgerPath path, const std::string& label) {
  for (const auto& item : assert_ledger_counts(snap, n, path).items) {
    report.comparisons.push_back({"ledger." + item.quantity, "expected count", label, item.error,
                                  item.tolerance, item.passed()});
  }
}

inline void compare(SensitivityReport& report, std::string quantity, std::string reference,
                    std::string candidate, const Matrix& ref, const Matrix& cand, double tol) {
  const double err = max_rel_error(cand, ref);
  report.comparisons.push_back(
      {std::move(quantity), std::move(reference), std::move(candidate), err, tol, err <= tol});
}

}  // namespace detail

/// Runs the configured method and returns the report. Writes the report
/// (and optional CSV) when paths are configured. method=all throws
/// VerificationFailure when any oracle disagrees beyond its tolerance.
inline SensitivityReport run(const RunConfig& cfg, const OracleTolerances& tol = {}) {
  const ResolvedModel rm = resolve_model(cfg);
  const Model& model = *rm.model;
  const Vector& alpha = rm.params;
  const Index n = model.n_param();
  if (cfg.covariance) require_covariance(*cfg.covariance, n);

  SensitivityReport report;
  report.model = model.name();
  report.method = to_string(cfg.method);
  report.parameter_names = model.param_names();
  report.parameters = alpha;

  auto set_primary = [&](double r, const Vector& s, const HessianMatrix& h) {
    report.response = r;
    report.gradient = s;
    report.hessian_raw = h.raw;
    report.hessian_symmetrized = h.symmetrized();
    report.symmetry_residual = h.symmetry_residual;
  };

  std::optional<SensitivityResult> adjoint;
  if (cfg.method == Method::adjoint2 || cfg.method == Method::all) {
    SolveLedger ledger;
    adjoint = detail::in_phase("adjoint2", [&] {
      return adjoint_sensitivities(model, alpha, cfg.newton, ledger, {cfg.threads});
    });
    const LedgerSnapshot snap = ledger.snapshot();
    report.ledgers["adjoint2"] = snap;
    set_primary(adjoint->state.response, adjoint->gradient, adjoint->hessian);
    detail::add_count_checks(report, snap, n, LedgerPath::adjoint, "adjoint2");
  }

  if (cfg.method == Method::forward2 || cfg.method == Method::all) {
    SolveLedger ledger;
    const SensitivityResult fwd = detail::in_phase(
        "forward2", [&] { return forward_sensitivities(model, alpha, cfg.newton, ledger); });
    report.ledgers["forward2"] = ledger.snapshot();
    if (adjoint) {
      detail::compare(report, "gradient", "adjoint2", "forward2", adjoint->gradient, fwd.gradient,
                      tol.forward_route);
      detail::compare(report, "hessian", "adjoint2", "forward2", adjoint->hessian.raw,
                      fwd.hessian.raw, tol.forward_route);
    } else {
      set_primary(fwd.state.response, fwd.gradient, fwd.hessian);
    }
  }

  if (cfg.method == Method::fd) {
    const FdScheme scheme = cfg.fd_scheme.value_or(FdScheme::forward(kCountingStep));
    SolveLedger ledger;
    const auto [grad, hess] = detail::in_phase("fd", [&] {
      FdGradient g = fd_gradient(model, alpha, scheme, cfg.newton, ledger);
      FdHessian h = fd_hessian(model, g, cfg.newton, ledger);
      return std::pair{std::move(g), std::move(h)};
    });
    const LedgerSnapshot snap = ledger.snapshot();
    report.ledgers["fd"] = snap;
    set_primary(grad.nominal_response, grad.gradient, hess.hessian);
    report.warnings.insert(report.warnings.end(), hess.warnings.begin(), hess.warnings.end());
    if (scheme.kind == FdKind::forward) {
      detail::add_count_checks(report, snap, n, LedgerPath::fd_counting, "fd");
    }
  }

  if (cfg.method == Method::all) {
    const FdScheme scheme = cfg.fd_scheme.value_or(FdScheme::central());
    SolveLedger fd_ledger;
    const auto [grad, hess] = detail::in_phase("fd", [&] {
      FdGradient g = fd_gradient(model, alpha, scheme, cfg.newton, fd_ledger);
      FdHessian h = fd_hessian(model, g, cfg.newton, fd_ledger);
      return std::pair{std::move(g), std::move(h)};
    });
    report.ledgers["fd"] = fd_ledger.snapshot();
    report.warnings.insert(report.warnings.end(), hess.warnings.begin(), hess.warnings.end());

    SolveLedger fdag_ledger;
    const HessianMatrix fdag = detail::in_phase("fd_adjoint_gradient", [&] {
      return fd_gradient_of_adjoint_gradient(model, alpha, FdScheme::central(), cfg.newton,
                                             fdag_ledger);
    });
    report.ledgers["fd_adjoint_gradient"] = fdag_ledger.snapshot();

    detail::compare(report, "gradient", "adjoint2", "fd", adjoint->gradient, grad.gradient,
                    tol.fd_gradient);
    detail::compare(report, "hessian", "adjoint2", "fd_adjoint_gradient", adjoint->hessian.raw,
                    fdag.raw, tol.fd_adjoint_gradient);
    detail::compare(report, "hessian", "adjoint2", "fd_hessian", adjoint->hessian.raw,
                    hess.hessian.raw, tol.fd_hessian);
    report.comparisons.push_back({"symmetry_residual", "0", "adjoint2",
                                  adjoint->hessian.symmetry_residual, tol.symmetry,
                                  adjoint->hessian.symmetry_residual <= tol.symmetry});
  }

  if (cfg.covariance) {
    report.moments = propagate_moments(report.gradient, report.hessian_symmetrized, *cfg.covariance);
  }

  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) throw ConfigError("cannot write report to '" + cfg.out_path + "'", "output.report");
    out << to_json(report).dump(2) << "\n";
  }
  if (!cfg.csv_path.empty()) {
    std::ofstream out(cfg.csv_path);
    if (!out) throw ConfigError("cannot write CSV to '" + cfg.csv_path + "'", "output.csv");
    out << hessian_csv(report.hessian_raw);
  }

  if (!report.comparisons_passed()) {
    std::string failed;
    for (const auto& c : report.comparisons) {
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.quantity + " (" + c.candidate + ")";
    }
    throw VerificationFailure("oracle/count verification failed: " + failed, report);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Operation-count benchmark
// ---------------------------------------------------------------------------

struct BenchRow {
  Index n_cells = 0;
  Index n_state = 0;
  Index n_param = 0;
  LedgerSnapshot adjoint;
  LedgerSnapshot fd;
  double adjoint_ms = 0.0;
  double fd_ms = 0.0;
};

/// Times the adjoint path and the forward-scheme FD path on one model.
inline BenchRow bench_model(const Model& model, const Vector& alpha, const NewtonOptions& opts,
                            Index n_cells) {
  using clock = std::chrono::steady_clock;
  BenchRow row;
  row.n_cells = n_cells;
  row.n_state = model.n_state();
  row.n_param = model.n_param();

  SolveLedger adj;
  auto t0 = clock::now();
  adjoint_sensitivities(model, alpha, opts, adj);
  auto t1 = clock::now();
  SolveLedger fd;
  const FdGradient g = fd_gradient(model, alpha, FdScheme::forward(kCountingStep), opts, fd);
  fd_hessian(model, g, opts, fd);
  auto t2 = clock::now();

  row.adjoint = adj.snapshot();
  row.fd = fd.snapshot();
  row.adjoint_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  row.fd_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return row;
}

}  // namespace sens2
