#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

using namespace sens2;
using namespace sens2::testing;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "sens2_driver_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(Config, ParsesFullConfig) {
  const RunConfig cfg = parse_config(R"({
    "model": {"name": "heat", "n_cells": 20, "n_zones": 2, "active_parameters": ["k0", "q2"]},
    "parameters": {"k0": 2.0},
    "method": "forward2",
    "fd": {"scheme": "forward", "step": 1e-6},
    "newton": {"abs_tol": 1e-11, "max_iter": 20},
    "output": {"report": "r.json", "csv": "h.csv"},
    "covariance": [[1, 0], [0, 2]],
    "threads": 2
  })");
  EXPECT_EQ(cfg.model.name, "heat");
  EXPECT_EQ(cfg.model.n_cells, 20);
  EXPECT_EQ(cfg.model.active, (std::vector<std::string>{"k0", "q2"}));
  EXPECT_EQ(cfg.param_overrides.at("k0"), 2.0);
  EXPECT_EQ(cfg.method, Method::forward2);
  ASSERT_TRUE(cfg.fd_scheme.has_value());
  EXPECT_EQ(cfg.fd_scheme->kind, FdKind::forward);
  EXPECT_EQ(cfg.fd_scheme->c, 1e-6);
  EXPECT_EQ(cfg.newton.max_iter, 20);
  EXPECT_EQ(cfg.out_path, "r.json");
  EXPECT_EQ(cfg.covariance->rows(), 2);
  EXPECT_EQ(cfg.threads, 2u);

  const ResolvedModel rm = resolve_model(cfg);
  EXPECT_EQ(rm.model->n_param(), 2);
  EXPECT_EQ(rm.params[0], 2.0);
}

TEST(Config, SyntaxErrorReportsLine) {
  try {
    parse_config("{\n  \"model\": \"cubic\",\n  \"method\": adjoint2\n}");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, FieldErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      resolve_model(parse_config(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(field_of(R"({"method": "all"})"), "model");
  EXPECT_EQ(field_of(R"({"model": "nope"})"), "model.name");
  EXPECT_EQ(field_of(R"({"model": "cubic", "method": "magic"})"), "method");
  EXPECT_EQ(field_of(R"({"model": "cubic", "parameters": {"zz": 1}})"), "parameters.zz");
  EXPECT_EQ(field_of(R"({"model": "cubic", "parameters": [1, 2, 3]})"), "parameters");
  EXPECT_EQ(field_of(R"({"model": "cubic", "parameters": {"a1": -4}})"), "parameters");
  EXPECT_EQ(field_of(R"({"model": "cubic", "fd": {"scheme": "sideways"}})"), "fd.scheme");
  EXPECT_EQ(field_of(R"({"model": "cubic", "newton": {"damping": 2}})"), "newton");
  EXPECT_EQ(field_of(R"({"model": {"name": "heat", "n_cells": "ten"}})"), "model.n_cells");
  EXPECT_EQ(field_of(R"({"model": "cubic", "covariance": [[1, 2], [3]]})"), "covariance[1]");
}

TEST(Run, CubicAdjoint) {
  RunConfig cfg;
  cfg.model.name = "cubic";
  const SensitivityReport r = run(cfg);
  EXPECT_LE(rel_err(r.gradient, Vector{{-0.25, 0.25}}), 1e-12);
  EXPECT_LE(rel_err(r.hessian_raw, Matrix{{1.0 / 32, 1.0 / 32}, {1.0 / 32, -3.0 / 32}}), 1e-12);
  EXPECT_LE(r.symmetry_residual, 1e-12);
  EXPECT_EQ(r.ledgers.count("adjoint2"), 1u);
  EXPECT_TRUE(r.comparisons_passed());
}

TEST(Run, LinearStateAllPopulatesComparisons) {
  RunConfig cfg = parse_config(R"({"model": "linear_state", "parameters": [1, 1, 1], "method": "all"})");
  const SensitivityReport r = run(cfg);
  int hessian_rows = 0;
  for (const auto& c : r.comparisons) {
    EXPECT_TRUE(c.passed) << c.quantity << " " << c.candidate;
    if (c.quantity == "hessian") ++hessian_rows;
  }
  EXPECT_EQ(hessian_rows, 3);
  EXPECT_EQ(r.ledgers.size(), 4u);
}

TEST(Run, FiniteDifferenceOnHeatCountsFourteenExtraSolves) {
  RunConfig cfg;
  cfg.model.name = "heat";
  cfg.model.n_cells = 50;
  cfg.method = Method::fd;
  const SensitivityReport r = run(cfg);
  const LedgerSnapshot& s = r.ledgers.at("fd");
  EXPECT_EQ(s.count(Purpose::fd_oracle, Counter::nonlinear_solves), 14u);
  EXPECT_EQ(s.count(Counter::nonlinear_solves), 15u);
}

TEST(Run, FailsLoudlyWhenOraclesDisagree) {
  RunConfig cfg;
  cfg.model.name = "cubic";
  cfg.method = Method::all;
  OracleTolerances strict;
  strict.fd_hessian = 1e-14;
  try {
    run(cfg, strict);
    FAIL() << "expected VerificationFailure";
  } catch (const VerificationFailure& e) {
    EXPECT_FALSE(e.report().comparisons_passed());
    EXPECT_NE(std::string(e.what()).find("fd_hessian"), std::string::npos);
  }
}

TEST(Run, SolverFailureCarriesPhase) {
  RunConfig cfg;
  cfg.model.name = "bratu";
  cfg.newton.max_iter = 1;
  try {
    run(cfg);
    FAIL() << "expected SolverFailure";
  } catch (const SolverFailure& e) {
    EXPECT_EQ(e.phase(), "adjoint2");
  }
}

TEST(Report, JsonRoundTripAndDeterminism) {
  const fs::path dir = scratch_dir();
  RunConfig cfg = parse_config(R"({
    "model": {"name": "heat", "n_cells": 20},
    "method": "all",
    "covariance": [[0.01, 0, 0, 0], [0, 0.0001, 0, 0], [0, 0, 0.25, 0], [0, 0, 0, 0.0025]]
  })");
  cfg.out_path = (dir / "a.json").string();
  cfg.csv_path = (dir / "a.csv").string();
  const SensitivityReport r = run(cfg);
  cfg.out_path = (dir / "b.json").string();
  run(cfg);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));

  const SensitivityReport back = report_from_json(nlohmann::json::parse(slurp(dir / "a.json")));
  EXPECT_EQ(to_json(back), to_json(r));
  EXPECT_EQ(back.hessian_raw, r.hessian_raw);
  EXPECT_EQ(back.gradient, r.gradient);
  EXPECT_EQ(back.ledgers.at("adjoint2"), r.ledgers.at("adjoint2"));
  ASSERT_TRUE(back.moments.has_value());

  const std::string csv = slurp(dir / "a.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Moments, TrivialCases) {
  const Vector s{{1.0, -2.0}};
  const Matrix h{{0.5, 0.1}, {0.1, -0.3}};
  const Moments zero = propagate_moments(s, h, Matrix::Zero(2, 2));
  EXPECT_EQ(zero.mean_shift, 0.0);
  EXPECT_EQ(zero.variance, 0.0);
  const Matrix cov{{0.2, 0.05}, {0.05, 0.1}};
  const Moments lin = propagate_moments(s, Matrix::Zero(2, 2), cov);
  EXPECT_EQ(lin.mean_shift, 0.0);
  EXPECT_DOUBLE_EQ(lin.variance, s.dot(cov * s));
}

TEST(Moments, RejectsBadCovariance) {
  const Vector s = Vector::Ones(2);
  const Matrix h = Matrix::Zero(2, 2);
  EXPECT_THROW(propagate_moments(s, h, Matrix{{1.0, 0.5}, {0.0, 1.0}}), ConfigError);
  EXPECT_THROW(propagate_moments(s, h, Matrix{{1.0, 2.0}, {2.0, 1.0}}), ConfigError);
  EXPECT_THROW(propagate_moments(s, h, Matrix::Identity(3, 3)), ConfigError);
}

TEST(Moments, CubicAgainstSmallMonteCarlo) {
  // 2e5 samples here; the acceptance suite runs the full 1e6.
  const Vector a0{{1.0, 2.0}};
  const CubicClosedForm cf(a0);
  const double sigma2 = 1e-4;
  const Moments m = propagate_moments(cf.s, cf.h, sigma2 * Matrix::Identity(2, 2));

  std::mt19937_64 rng(424242);
  std::normal_distribution<double> nd(0.0, std::sqrt(sigma2));
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = cubic_root(a0[0] + nd(rng), a0[1] + nd(rng)) - cf.u;
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_LE(std::abs(mean - m.mean_shift), 3.0 * std::sqrt(var / n));
  EXPECT_LE(std::abs(var - m.variance), 3.0 * var * std::sqrt(2.0 / n));
}

#ifdef SENS2_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SENS2_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir();
  write_file(dir / "ok.json", R"({"model": "cubic", "method": "all"})");
  write_file(dir / "bad.json", R"({"model": "cubic", "method": )");
  write_file(dir / "unsolvable.json", R"({"model": "bratu", "newton": {"max_iter": 1}})");
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.json").string()), 0);
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.json").string() + " --method nope"), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "unsolvable.json").string()), 3);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("check --model cubic"), 0);
  EXPECT_EQ(run_cli("check --model nope"), 2);
  EXPECT_EQ(run_cli("bench --model heat --sizes 10,20"), 0);
}

TEST(Cli, WritesReportAndCsv) {
  const fs::path dir = scratch_dir();
  write_file(dir / "lin.json", R"({"model": "linear_state", "parameters": [1, 1, 1]})");
  const fs::path out = dir / "lin_report.json", csv = dir / "lin.csv";
  fs::remove(out);
  fs::remove(csv);
  EXPECT_EQ(run_cli("run --config " + (dir / "lin.json").string() + " --method all --out " +
                    out.string() + " --csv " + csv.string()),
            0);
  const SensitivityReport r = report_from_json(nlohmann::json::parse(slurp(out)));
  EXPECT_EQ(r.method, "all");
  EXPECT_LE(rel_err(r.hessian_raw, LinearStateClosedForm(Vector::Ones(3)).h), 1e-10);
  EXPECT_TRUE(fs::exists(csv));
}
#endif
