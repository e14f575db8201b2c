#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

using namespace sens2;
using namespace sens2::testing;

namespace {

SparseMatrix random_well_conditioned(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) m(r, c) = d(rng);
  }
  m += static_cast<double>(n) * Matrix::Identity(n, n);
  return m.sparseView();
}

}  // namespace

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

TEST(Factorization, IdentityReturnsRhs) {
  SolveLedger ledger;
  const Factorization f = factorize(sparse_diagonal(Vector::Ones(6)), ledger);
  const Vector b = Vector::LinSpaced(6, -2.0, 3.0);
  EXPECT_EQ(solve_linear(f, b, false, ledger, Purpose::forward), b);
  EXPECT_EQ(solve_linear(f, b, true, ledger, Purpose::forward), b);
  EXPECT_EQ(ledger.count(Counter::jacobian_factorizations), 1u);
  EXPECT_EQ(ledger.count(Counter::linear_solves_J), 1u);
  EXPECT_EQ(ledger.count(Counter::linear_solves_JT), 1u);
}

TEST(Factorization, ScalarCubicJacobian) {
  SolveLedger ledger;
  const Factorization f = factorize(sparse_diagonal(Vector::Constant(1, 4.0)), ledger);
  EXPECT_DOUBLE_EQ(f.solve(Vector::Ones(1), false)[0], 0.25);
  EXPECT_DOUBLE_EQ(f.solve(Vector::Ones(1), true)[0], 0.25);
}

TEST(Factorization, RandomRoundTripBothBackends) {
  const SparseMatrix j = random_well_conditioned(5, 11);
  const Matrix jd(j);
  const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
  for (LuBackend be : {LuBackend::dense, LuBackend::sparse}) {
    const Factorization f = Factorization::build(j, be);
    EXPECT_EQ(f.is_dense(), be == LuBackend::dense);
    EXPECT_LE((jd * f.solve(b, false) - b).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE((jd.transpose() * f.solve(b, true) - b).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Factorization, SymmetricTransposeAgrees) {
  const SparseMatrix j = random_well_conditioned(7, 3);
  const SparseMatrix s = SparseMatrix(j + SparseMatrix(j.transpose()));
  const Factorization f = Factorization::build(s);
  const Vector b = Vector::LinSpaced(7, -1.0, 1.0);
  EXPECT_LE((f.solve(b, false) - f.solve(b, true)).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_TRUE(f.solve(Vector::Zero(7), false).isZero(0.0));
}

TEST(Factorization, SparseMatchesDenseOnHeatJacobian) {
  const auto m = make_heat_conduction(60);
  const Vector a = m->nominal_params();
  const Vector u = Vector::LinSpaced(60, 0.0, 1.0);
  const SparseMatrix j = m->jacobian_state(u, a);
  const Factorization d = Factorization::build(j, LuBackend::dense);
  const Factorization s = Factorization::build(j, LuBackend::sparse);
  const Vector b = Vector::LinSpaced(60, 1.0, -1.0);
  for (bool t : {false, true}) {
    EXPECT_LE(max_rel_error(s.solve(b, t), d.solve(b, t)), 1e-12);
  }
}

TEST(Factorization, AutomaticSwitchesAboveDenseLimit) {
  EXPECT_TRUE(Factorization::build(sparse_diagonal(Vector::Ones(kDenseLuLimit))).is_dense());
  EXPECT_FALSE(Factorization::build(sparse_diagonal(Vector::Ones(kDenseLuLimit + 1))).is_dense());
}

TEST(Factorization, SingularJacobianThrows) {
  SparseMatrix j = Matrix{{1.0, 2.0}, {2.0, 4.0}}.sparseView();
  EXPECT_THROW(Factorization::build(j, LuBackend::dense), SingularJacobian);
  EXPECT_THROW(Factorization::build(SparseMatrix(3, 3), LuBackend::sparse), SingularJacobian);
  EXPECT_THROW(Factorization::build(SparseMatrix(2, 3)), std::invalid_argument);
}

TEST(Factorization, WrongRhsLength) {
  const Factorization f = Factorization::build(sparse_diagonal(Vector::Ones(3)));
  EXPECT_THROW(f.solve(Vector::Ones(2), false), std::invalid_argument);
}

TEST(Factorization, FingerprintMatching) {
  SolveLedger ledger;
  const auto m = make_cubic_model();
  const Vector u = Vector::Ones(1), a = m->nominal_params();
  const Factorization f = factorize_at(*m, u, a, ledger);
  EXPECT_TRUE(f.matches(u, a));
  EXPECT_FALSE(f.matches(Vector::Constant(1, 1.5), a));
  EXPECT_THROW(solve_first_lass(*m, Vector::Constant(1, 1.5), a, f, ledger),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Newton
// ---------------------------------------------------------------------------

TEST(Newton, CubicRoot) {
  SolveLedger ledger;
  const auto m = make_cubic_model();
  const NewtonResult r = solve_forward(*m, m->nominal_params(), Vector::Zero(1), {}, ledger);
  EXPECT_NEAR(r.state[0], 1.0, 1e-12);
  EXPECT_LE(r.residual_norm, NewtonOptions{}.abs_tol);
  EXPECT_EQ(ledger.count(Counter::nonlinear_solves), 1u);
  EXPECT_EQ(ledger.count(Counter::newton_factorizations),
            static_cast<std::uint64_t>(r.iterations));
  EXPECT_EQ(ledger.count(Counter::jacobian_factorizations), 0u);
}

TEST(Newton, LinearStateOneStep) {
  SolveLedger ledger;
  const auto m = make_linear_state_model();
  for (double guess : {-30.0, 0.0, 7.5}) {
    const NewtonResult r =
        solve_forward(*m, Vector::Ones(3), Vector::Constant(1, guess), {}, ledger);
    EXPECT_EQ(r.state[0], 1.0);
    EXPECT_EQ(r.iterations, 1);
  }
}

TEST(Newton, HeatWithoutNonlinearityMatchesDirectSolve) {
  const Index n = 40;
  const auto m = make_heat_conduction(n);
  Vector a = m->nominal_params();
  a[0] = 1.7;
  a[1] = 0.0;
  a[2] = -4.0;
  a[3] = 0.3;
  SolveLedger ledger;
  const NewtonResult r = solve_forward(*m, a, m->initial_guess(a), {}, ledger);
  const Vector direct = heat_linear_solution(n, a[0], Vector::Constant(n, a[2]), a[3]);
  EXPECT_LE((r.state - direct).lpNorm<Eigen::Infinity>(), 1e-10);
}

class NewtonAllBenchmarks : public ::testing::TestWithParam<std::string> {};

TEST_P(NewtonAllBenchmarks, ResidualBoundHoldsAtRandomPoints) {
  const auto m = make_benchmark(GetParam(), {30, 2});
  const BenchmarkSpec spec = benchmark_spec(GetParam(), {30, 2});
  std::mt19937_64 rng(17);
  for (int k = 0; k < 5; ++k) {
    const Vector a = sample_uniform(spec.sample_box, rng);
    SolveLedger ledger;
    NewtonOptions opts;
    opts.abs_tol = 1e-11;
    const NewtonResult r = solve_forward(*m, a, m->initial_guess(a), opts, ledger);
    EXPECT_LE(m->residual(r.state, a).lpNorm<Eigen::Infinity>(), opts.abs_tol);
    EXPECT_TRUE(ledger.snapshot().conserved());
  }
}

TEST_P(NewtonAllBenchmarks, Deterministic) {
  const auto m = make_benchmark(GetParam(), {30, 2});
  const Vector a = m->nominal_params();
  SolveLedger l1, l2;
  const NewtonResult r1 = solve_forward(*m, a, m->initial_guess(a), {}, l1);
  const NewtonResult r2 = solve_forward(*m, a, m->initial_guess(a), {}, l2);
  ASSERT_EQ(r1.state.size(), r2.state.size());
  for (Index i = 0; i < r1.state.size(); ++i) EXPECT_EQ(r1.state[i], r2.state[i]);
  EXPECT_EQ(l1.snapshot(), l2.snapshot());
}

INSTANTIATE_TEST_SUITE_P(Benchmarks, NewtonAllBenchmarks,
                         ::testing::Values("linear_state", "cubic", "heat", "bratu"));

TEST(Newton, BudgetExhaustionReportsBestIterate) {
  SolveLedger ledger;
  const auto m = make_bratu(20);
  NewtonOptions opts;
  opts.max_iter = 1;
  try {
    solve_forward(*m, m->nominal_params(), m->initial_guess(m->nominal_params()), opts, ledger);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.iterations(), 1);
    EXPECT_EQ(e.best_iterate().size(), 20);
    EXPECT_GT(e.residual_norm(), opts.abs_tol);
  }
}

TEST(Newton, OptionValidation) {
  SolveLedger ledger;
  const auto m = make_cubic_model();
  NewtonOptions bad;
  bad.abs_tol = 0.0;
  EXPECT_THROW(solve_forward(*m, m->nominal_params(), Vector::Zero(1), bad, ledger),
               std::invalid_argument);
  bad = {};
  bad.damping = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.polish_steps = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Newton, SingularJacobianCarriesIterate) {
  class Degenerate : public ForwardingModel {
   public:
    Degenerate() : ForwardingModel(make_cubic_model(), "degenerate") {}

   protected:
    SparseMatrix eval_jacobian_state(const Vector&, const Vector&) const override {
      return SparseMatrix(1, 1);
    }
  };
  const Degenerate m;
  SolveLedger ledger;
  try {
    solve_forward(m, m.nominal_params(), Vector::Constant(1, 0.5), {}, ledger);
    FAIL() << "expected SingularJacobian";
  } catch (const SingularJacobian& e) {
    ASSERT_EQ(e.iterate().size(), 1);
    EXPECT_EQ(e.iterate()[0], 0.5);
  }
}

TEST(Newton, PolishKeepsResidualWithinTolerance) {
  const auto m = make_heat_conduction(30);
  const Vector a = m->nominal_params();
  NewtonOptions opts;
  opts.polish_steps = 2;
  SolveLedger plain, polished;
  const NewtonResult r0 = solve_forward(*m, a, m->initial_guess(a), {}, plain);
  const NewtonResult r1 = solve_forward(*m, a, m->initial_guess(a), opts, polished);
  EXPECT_LE(r1.residual_norm, opts.abs_tol);
  EXPECT_EQ(r1.iterations, r0.iterations + 2);
  EXPECT_EQ(polished.count(Counter::nonlinear_solves), 1u);
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

TEST(Ledger, PurposeTotalsConserved) {
  SolveLedger ledger;
  ledger.record(Purpose::forward, Counter::linear_solves_J, 3);
  ledger.record(Purpose::second_lass, Counter::linear_solves_J, 2);
  ledger.record(Purpose::fd_oracle, Counter::nonlinear_solves);
  const LedgerSnapshot s = ledger.snapshot();
  EXPECT_TRUE(s.conserved());
  EXPECT_EQ(s.count(Counter::linear_solves_J), 5u);
  EXPECT_EQ(s.count(Purpose::second_lass, Counter::linear_solves_J), 2u);
}

TEST(Ledger, DifferenceAndMerge) {
  SolveLedger a;
  a.record(Purpose::forward, Counter::residual_evals, 4);
  const LedgerSnapshot before = a.snapshot();
  a.record(Purpose::first_lass, Counter::linear_solves_JT);
  const LedgerSnapshot delta = a.snapshot() - before;
  EXPECT_EQ(delta.count(Counter::linear_solves_JT), 1u);
  EXPECT_EQ(delta.count(Counter::residual_evals), 0u);

  SolveLedger b;
  b.merge(a.snapshot());
  EXPECT_EQ(b.snapshot(), a.snapshot());
  SolveLedger c;
  c.merge_as(a.snapshot(), Purpose::fd_oracle);
  EXPECT_EQ(c.count(Purpose::fd_oracle, Counter::residual_evals), 4u);
  EXPECT_EQ(c.count(Purpose::forward, Counter::residual_evals), 0u);
  EXPECT_TRUE(c.snapshot().conserved());
}

TEST(Ledger, ConcurrentRecording) {
  SolveLedger ledger;
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      for (int k = 0; k < 10000; ++k) ledger.record(Purpose::second_lass, Counter::linear_solves_J);
    });
  }
  for (auto& t : pool) t.join();
  EXPECT_EQ(ledger.count(Counter::linear_solves_J), 40000u);
  EXPECT_TRUE(ledger.snapshot().conserved());
}

TEST(Ledger, NamesAreDistinct) {
  std::set<std::string> names;
  for (Purpose p : kAllPurposes) names.insert(std::string(to_string(p)));
  for (Counter c : kAllCounters) names.insert(std::string(to_string(c)));
  EXPECT_EQ(names.size(), kPurposeCount + kCounterCount);
}
