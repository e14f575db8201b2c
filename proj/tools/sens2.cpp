// sens2: command line front end.
//
//   sens2 run   --config cfg.json [--method M] [--out report.json] [--csv h.csv]
//   sens2 check --model NAME [--points K] [--tol T]
//   sens2 bench --model NAME --sizes 25,50,100 [--zones M]
//
// Exit codes: 0 ok, 2 config error, 3 solver error, 4 verification failure.

#include "sens2/sens2.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

void print_vector(const char* label, const sens2::Vector& v) {
  std::printf("%s", label);
  for (sens2::Index i = 0; i < v.size(); ++i) std::printf(" % .12e", v[i]);
  std::printf("\n");
}

void print_summary(const sens2::SensitivityReport& r) {
  std::printf("model    %s\nmethod   %s\n", r.model.c_str(), r.method.c_str());
  std::printf("params  ");
  for (std::size_t i = 0; i < r.parameter_names.size(); ++i) {
    std::printf(" %s=%g", r.parameter_names[i].c_str(), r.parameters[static_cast<sens2::Index>(i)]);
  }
  std::printf("\nresponse % .15e\n", r.response);
  print_vector("gradient", r.gradient);
  std::printf("hessian (raw, symmetry residual %.3e)\n", r.symmetry_residual);
  for (sens2::Index i = 0; i < r.hessian_raw.rows(); ++i) print_vector("  ", r.hessian_raw.row(i).transpose());
  for (const auto& [path, snap] : r.ledgers) {
    using sens2::Counter;
    std::printf("ledger %-20s nonlinear=%llu factorizations=%llu J=%llu JT=%llu\n", path.c_str(),
                static_cast<unsigned long long>(snap.count(Counter::nonlinear_solves)),
                static_cast<unsigned long long>(snap.count(Counter::jacobian_factorizations)),
                static_cast<unsigned long long>(snap.count(Counter::linear_solves_J)),
                static_cast<unsigned long long>(snap.count(Counter::linear_solves_JT)));
  }
  for (const auto& c : r.comparisons) {
    std::printf("%s %-28s %-20s vs %-20s err=%.3e tol=%.1e\n", c.passed ? "PASS" : "FAIL",
                c.quantity.c_str(), c.reference.c_str(), c.candidate.c_str(), c.error, c.tolerance);
  }
  if (r.moments) {
    std::printf("moments  mean_shift=% .12e variance=% .12e\n", r.moments->mean_shift,
                r.moments->variance);
  }
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
}

int cmd_run(const std::string& config, const std::string& method, const std::string& out,
            const std::string& csv) {
  sens2::RunConfig cfg = sens2::load_config(config);
  if (!method.empty()) cfg.method = sens2::parse_method(method);
  if (!out.empty()) cfg.out_path = out;
  if (!csv.empty()) cfg.csv_path = csv;
  try {
    print_summary(sens2::run(cfg));
  } catch (const sens2::VerificationFailure& e) {
    print_summary(e.report());
    throw;
  }
  return kExitOk;
}

int cmd_check(const std::string& name, int points, double tol, sens2::Index n_cells) {
  const sens2::BenchmarkOptions bopts{n_cells, 1};
  const auto model = sens2::make_benchmark(name, bopts);
  const sens2::BenchmarkSpec spec = sens2::benchmark_spec(name, bopts);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ud(spec.state_lo, spec.state_hi);

  std::map<std::string, double> worst;
  bool ok = true;
  for (int k = 0; k < points; ++k) {
    const sens2::Vector alpha = sens2::sample_uniform(spec.sample_box, rng);
    sens2::Vector u(model->n_state());
    for (sens2::Index i = 0; i < u.size(); ++i) u[i] = ud(rng);
    sens2::DerivativeCheckOptions dopts;
    dopts.seed = rng();
    const sens2::CheckReport rep = sens2::check_model_derivatives(*model, u, alpha, tol, dopts);
    for (const auto& item : rep.items) {
      worst[item.quantity] = std::max(worst[item.quantity], item.error);
      if (!item.passed()) {
        ok = false;
        std::printf("FAIL %-28s point %d err=%.3e tol=%.1e %s\n", item.quantity.c_str(), k,
                    item.error, item.tolerance, item.detail.c_str());
      }
    }
  }
  for (const auto& [q, e] : worst) std::printf("%-28s max err %.3e\n", q.c_str(), e);
  std::printf("%s: %d points, %s\n", name.c_str(), points, ok ? "all checks passed" : "FAILED");
  return ok ? kExitOk : kExitVerify;
}

int cmd_bench(const std::string& name, const std::vector<sens2::Index>& sizes, sens2::Index zones) {
  using sens2::Counter;
  std::printf("%8s %8s %6s | %9s %7s %5s %5s %10s | %9s %9s %10s\n", "n_cells", "n_state",
              "N", "adj_nl", "adj_fac", "adjJ", "adjJT", "adj_ms", "fd_nl", "(N^2+3N)/2",
              "fd_ms");
  for (sens2::Index n : sizes) {
    const auto model = sens2::make_benchmark(name, {n, zones});
    const sens2::BenchRow row =
        sens2::bench_model(*model, model->nominal_params(), sens2::NewtonOptions{}, n);
    std::printf("%8lld %8lld %6lld | %9llu %7llu %5llu %5llu %10.3f | %9llu %9llu %10.3f\n",
                static_cast<long long>(row.n_cells), static_cast<long long>(row.n_state),
                static_cast<long long>(row.n_param),
                static_cast<unsigned long long>(row.adjoint.count(Counter::nonlinear_solves)),
                static_cast<unsigned long long>(row.adjoint.count(Counter::jacobian_factorizations)),
                static_cast<unsigned long long>(row.adjoint.count(Counter::linear_solves_J)),
                static_cast<unsigned long long>(row.adjoint.count(Counter::linear_solves_JT)),
                row.adjoint_ms,
                static_cast<unsigned long long>(row.fd.count(Counter::nonlinear_solves) - 1),
                static_cast<unsigned long long>(sens2::forward_method_solve_count(row.n_param)),
                row.fd_ms);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order adjoint sensitivity analysis"};
  app.require_subcommand(1);

  std::string config, method, out, csv;
  auto* run = app.add_subcommand("run", "Compute gradient and Hessian from a config file");
  run->add_option("--config", config, "JSON run config")->required();
  run->add_option("--method", method, "adjoint2 | forward2 | fd | all");
  run->add_option("--out", out, "JSON report path");
  run->add_option("--csv", csv, "Hessian CSV path");

  std::string model;
  int points = 10;
  double tol = 1e-5;
  sens2::Index n_cells = 20;
  auto* check = app.add_subcommand("check", "Finite-difference check of model derivatives");
  check->add_option("--model", model, "Benchmark model name")->required();
  check->add_option("--points", points, "Random points to check")->check(CLI::PositiveNumber);
  check->add_option("--tol", tol, "Relative tolerance");
  check->add_option("--n-cells", n_cells, "Grid cells for heat/bratu")->check(CLI::PositiveNumber);

  std::vector<sens2::Index> sizes{25, 50, 100};
  sens2::Index zones = 1;
  auto* bench = app.add_subcommand("bench", "Solve counts and timings, adjoint vs FD");
  bench->add_option("--model", model, "Benchmark model name")->required();
  bench->add_option("--sizes", sizes, "Grid sizes")->delimiter(',');
  bench->add_option("--zones", zones, "Heat source zones")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, method, out, csv);
    if (*check) return cmd_check(model, points, tol, n_cells);
    if (*bench) return cmd_bench(model, sizes, zones);
  } catch (const sens2::ConfigError& e) {
    std::cerr << "config error: " << e.what();
    if (!e.field().empty()) std::cerr << " (field: " << e.field() << ")";
    std::cerr << "\n";
    return kExitConfig;
  } catch (const sens2::VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sens2::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
