#pragma once

#include "sens2/first_order.hpp"
#include "sens2/ledger.hpp"
#include "sens2/linear_solver.hpp"
#include "sens2/model.hpp"
#include "sens2/newton.hpp"
#include "sens2/second_order.hpp"

#include <optional>

namespace sens2 {

/// Converged state, first-level adjoint, and the cached factorization of
/// J(u*, alpha) that every later solve reuses.
struct SensitivityState {
  Vector params;
  Vector state;
  Vector psi;
  Factorization fact;
  double response = 0.0;
  int newton_iterations = 0;
};

/// Nominal solve, one post-convergence factorization, one first-level
/// adjoint solve.
inline SensitivityState prepare_sensitivity_state(const Model& model, const Vector& alpha,
                                                  const NewtonOptions& opts, SolveLedger& ledger,
                                                  std::optional<Vector> u_guess = std::nullopt,
                                                  LuBackend backend = LuBackend::automatic) {
  const Vector guess = u_guess ? *u_guess : model.initial_guess(alpha);
  NewtonResult nr = solve_forward(model, alpha, guess, opts, ledger);
  Factorization fact = factorize_at(model, nr.state, alpha, ledger, Purpose::forward, backend);
  Vector psi = solve_first_lass(model, nr.state, alpha, fact, ledger);
  const double r = model.response(nr.state, alpha);
  return SensitivityState{alpha, std::move(nr.state), std::move(psi), std::move(fact), r,
                          nr.iterations};
}

struct SensitivityResult {
  SensitivityState state;
  Vector gradient;
  HessianMatrix hessian;
};

/// Adjoint path: gradient from the first-level adjoint, Hessian from
/// N_alpha second-level adjoint systems.
inline SensitivityResult adjoint_sensitivities(const Model& model, const Vector& alpha,
                                               const NewtonOptions& opts, SolveLedger& ledger,
                                               HessianOptions hopts = {}) {
  SensitivityState st = prepare_sensitivity_state(model, alpha, opts, ledger);
  Vector s = gradient_adjoint(model, st.state, alpha, st.psi);
  HessianMatrix h = hessian_full(model, st.state, alpha, st.psi, st.fact, ledger, hopts);
  return {std::move(st), std::move(s), std::move(h)};
}

/// Forward path: gradient from N_alpha first-level forward systems, Hessian
/// from N_alpha second-level forward systems (needs psi for their sources).
inline SensitivityResult forward_sensitivities(const Model& model, const Vector& alpha,
                                               const NewtonOptions& opts, SolveLedger& ledger) {
  SensitivityState st = prepare_sensitivity_state(model, alpha, opts, ledger);
  Vector s = gradient_forward(model, st.state, alpha, st.fact, ledger);
  HessianMatrix h = hessian_forward(model, st.state, alpha, st.psi, st.fact, ledger);
  return {std::move(st), std::move(s), std::move(h)};
}

}  // namespace sens2
