#pragma once

#include "sens2/errors.hpp"
#include "sens2/ledger.hpp"
#include "sens2/linear_solver.hpp"
#include "sens2/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sens2 {

struct NewtonOptions {
  double abs_tol = 1e-12;  ///< max-norm residual threshold
  int max_iter = 50;
  double damping = 0.5;    ///< backtracking factor
  int max_backtracks = 30;
  /// Full Newton steps taken after convergence; kept only while the residual
  /// stays within abs_tol. Used by FD oracles, where a warm-started solve
  /// that stops after one step leaves an O(h^2) state error.
  int polish_steps = 0;

  void validate() const {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("newton: abs_tol must be > 0");
    if (!(damping > 0.0 && damping < 1.0)) {
      throw std::invalid_argument("newton: damping must lie in (0, 1)");
    }
    if (max_iter < 0 || max_backtracks < 0 || polish_steps < 0) {
      throw std::invalid_argument("newton: iteration budgets must be nonnegative");
    }
  }
};

struct NewtonResult {
  Vector state;
  int iterations = 0;
  double residual_norm = 0.0;  ///< max-norm of F at `state`
};

/// Damped Newton on F(u, alpha) = 0 with backtracking on ||F||_2.
///
/// A step t*du is accepted when ||F(u + t du)||_2 <= (1 - 1e-4 t) ||F(u)||_2;
/// trial points outside the model's domain count as rejections. Convergence
/// is declared only on the a posteriori test ||F||_inf <= abs_tol.
inline NewtonResult solve_forward(const Model& model, const Vector& alpha, const Vector& u_guess,
                                  const NewtonOptions& opts, SolveLedger& ledger,
                                  Purpose purpose = Purpose::forward) {
  opts.validate();
  if (!u_guess.allFinite()) throw DomainError(model.name() + ": non-finite initial guess");
  ledger.record(purpose, Counter::nonlinear_solves);

  constexpr double kArmijo = 1e-4;
  Vector u = u_guess;
  Vector f = model.residual(u, alpha);
  ledger.record(purpose, Counter::residual_evals);
  double norm2 = f.norm();

  auto newton_step = [&](const Vector& at, const Vector& f_at) {
    ledger.record(purpose, Counter::newton_iterations);
    Factorization fact = [&] {
      try {
        return Factorization::build(model.jacobian_state(at, alpha));
      } catch (const SingularJacobian& e) {
        throw SingularJacobian(model.name() + ": " + e.what(), at);
      }
    }();
    ledger.record(purpose, Counter::newton_factorizations);
    Vector du = fact.solve(-f_at, false);
    ledger.record(purpose, Counter::newton_linear_solves);
    return du;
  };

  for (int iter = 0;; ++iter) {
    const double norm_inf = f.lpNorm<Eigen::Infinity>();
    if (norm_inf <= opts.abs_tol) {
      for (int p = 0; p < opts.polish_steps; ++p) {
        ++iter;
        const Vector trial = u + newton_step(u, f);
        Vector f_trial;
        try {
          f_trial = model.residual(trial, alpha);
        } catch (const DomainError&) {
          break;
        }
        ledger.record(purpose, Counter::residual_evals);
        if (!(f_trial.lpNorm<Eigen::Infinity>() <= opts.abs_tol)) break;
        u = trial;
        f = std::move(f_trial);
      }
      return {u, iter, f.lpNorm<Eigen::Infinity>()};
    }
    if (iter >= opts.max_iter) {
      std::ostringstream os;
      os << model.name() << ": Newton did not converge in " << opts.max_iter
         << " iterations (||F||_inf = " << norm_inf << ")";
      throw NonConvergence(os.str(), u, norm_inf, iter);
    }

    const Vector du = newton_step(u, f);

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, t *= opts.damping) {
      const Vector trial = u + t * du;
      Vector f_trial;
      try {
        f_trial = model.residual(trial, alpha);
      } catch (const DomainError&) {
        continue;
      }
      ledger.record(purpose, Counter::residual_evals);
      const double trial_norm = f_trial.norm();
      if (std::isfinite(trial_norm) && trial_norm <= (1.0 - kArmijo * t) * norm2) {
        u = trial;
        f = std::move(f_trial);
        norm2 = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << model.name() << ": line search failed after " << opts.max_backtracks
         << " backtracks (||F||_inf = " << norm_inf << ")";
      throw NonConvergence(os.str(), u, norm_inf, iter + 1);
    }
  }
}

}  // namespace sens2
