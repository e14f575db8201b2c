#pragma once

#include "sens2/ledger.hpp"
#include "sens2/linear_solver.hpp"
#include "sens2/model.hpp"

#include <stdexcept>

namespace sens2 {

namespace detail {

inline void require_matching(const Factorization& fact, const Vector& u, const Vector& alpha) {
  if (!fact.matches(u, alpha)) {
    throw std::invalid_argument("factorization was built at a different (u, alpha)");
  }
}

}  // namespace detail

/// First-level adjoint: J^T psi = dR/du at the converged state.
inline Vector solve_first_lass(const Model& model, const Vector& u, const Vector& alpha,
                               const Factorization& fact, SolveLedger& ledger) {
  detail::require_matching(fact, u, alpha);
  return solve_linear(fact, model.response_grad_state(u, alpha), true, ledger,
                      Purpose::first_lass);
}

/// S_i = dR/dalpha_i - psi^T (dF/dalpha) e_i. No linear solves.
inline Vector gradient_adjoint(const Model& model, const Vector& u, const Vector& alpha,
                               const Vector& psi) {
  return model.response_grad_param(u, alpha) -
         model.jacobian_param(u, alpha).transpose() * psi;
}

/// Forward sensitivity: J h_u = -(dF/dalpha) h_alpha.
inline Vector solve_first_lfss(const Model& model, const Vector& u, const Vector& alpha,
                               const Vector& h_alpha, const Factorization& fact,
                               SolveLedger& ledger) {
  detail::require_matching(fact, u, alpha);
  if (h_alpha.size() != model.n_param()) {
    throw std::invalid_argument("solve_first_lfss: h_alpha has wrong length");
  }
  const Vector rhs = -(model.jacobian_param(u, alpha) * h_alpha);
  return solve_linear(fact, rhs, false, ledger, Purpose::first_lfss);
}

/// Gradient from N_alpha forward sensitivity solves along the basis
/// directions: S_i = dR/dalpha_i + (dR/du)^T h_u(e_i).
inline Vector gradient_forward(const Model& model, const Vector& u, const Vector& alpha,
                               const Factorization& fact, SolveLedger& ledger) {
  detail::require_matching(fact, u, alpha);
  const Matrix dfda = model.jacobian_param(u, alpha);
  const Vector r_u = model.response_grad_state(u, alpha);
  Vector s = model.response_grad_param(u, alpha);
  for (Index i = 0; i < model.n_param(); ++i) {
    const Vector h_u = solve_linear(fact, -dfda.col(i), false, ledger, Purpose::first_lfss);
    s[i] += r_u.dot(h_u);
  }
  return s;
}

}  // namespace sens2
