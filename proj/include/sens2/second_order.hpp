#pragma once

#include "sens2/errors.hpp"
#include "sens2/first_order.hpp"
#include "sens2/ledger.hpp"
#include "sens2/linear_solver.hpp"
#include "sens2/model.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace sens2 {

/// Right-hand sides of the i-th second-level adjoint system.
struct SecondLevelSources {
  Vector grad_u;    ///< dS_i/du   = H_ua e_i - C_ua(psi) e_i
  Vector grad_psi;  ///< dS_i/dpsi = -(dF/dalpha) e_i
};

/// Solution pair of the i-th second-level adjoint system.
struct SecondLevelAdjoint {
  Index index = 0;
  Vector psi1;  ///< J^T psi1 = grad_u - A12 psi2
  Vector psi2;  ///< J psi2 = grad_psi
};

/// Second-level forward sensitivities for one parameter direction.
struct SecondLevelForward {
  Vector h_u;
  Vector h_psi;
};

/// ||H - H^T||_inf / max(||H||_inf, tiny), induced infinity norms.
inline double symmetry_residual(const Matrix& h) {
  if (h.size() == 0) return 0.0;
  const double asym = (h - h.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
  const double norm = h.cwiseAbs().rowwise().sum().maxCoeff();
  return asym / std::max(norm, std::numeric_limits<double>::min());
}

/// Hessian of R(u*(alpha), alpha) as assembled, never symmetrized in place.
struct HessianMatrix {
  Matrix raw;
  double symmetry_residual = 0.0;

  static HessianMatrix from_raw(Matrix h) {
    HessianMatrix m;
    m.symmetry_residual = sens2::symmetry_residual(h);
    m.raw = std::move(h);
    return m;
  }

  Matrix symmetrized() const { return 0.5 * (raw + raw.transpose()); }
};

/// Raised when a Hessian row fails; carries the rows that did complete.
class HessianFailure : public Error {
 public:
  HessianFailure(const std::string& what, Matrix partial, std::vector<bool> rows_done)
      : Error(what), partial_(std::move(partial)), rows_done_(std::move(rows_done)) {}

  const Matrix& partial() const noexcept { return partial_; }
  const std::vector<bool>& rows_done() const noexcept { return rows_done_; }

 private:
  Matrix partial_;
  std::vector<bool> rows_done_;
};

/// Nominal-point quantities shared by every second-level system. Evaluated
/// once per (u*, alpha, psi).
struct SecondOrderTerms {
  Matrix dfda;       ///< dF/dalpha
  SparseMatrix a12;  ///< C_uu(psi) - H_uu, symmetric
  Matrix mixed;      ///< H_ua - C_ua(psi)
  Matrix direct;     ///< H_aa - C_aa(psi), the direct-effect matrix

  static SecondOrderTerms evaluate(const Model& model, const Vector& u, const Vector& alpha,
                                   const Vector& psi) {
    const ResponseHessian rh = model.response_hess_blocks(u, alpha);
    SecondOrderTerms t;
    t.dfda = model.jacobian_param(u, alpha);
    t.a12 = model.residual_hess_contract_uu(u, alpha, psi) - rh.uu;
    t.mixed = rh.ua - model.residual_hess_contract_ua(u, alpha, psi);
    t.direct = rh.aa - model.residual_hess_contract_aa(u, alpha, psi);
    return t;
  }

  SecondLevelSources sources(Index i) const {
    return {mixed.col(i), -dfda.col(i)};
  }

  SecondLevelAdjoint solve_adjoint(Index i, const Factorization& fact,
                                   SolveLedger& ledger) const {
    const SecondLevelSources src = sources(i);
    SecondLevelAdjoint sla;
    sla.index = i;
    sla.psi2 = solve_linear(fact, src.grad_psi, false, ledger, Purpose::second_lass);
    const Vector rhs = src.grad_u - a12 * sla.psi2;
    sla.psi1 = solve_linear(fact, rhs, true, ledger, Purpose::second_lass);
    return sla;
  }

  Vector row(const SecondLevelAdjoint& sla) const {
    return direct.row(sla.index).transpose() - dfda.transpose() * sla.psi1 +
           mixed.transpose() * sla.psi2;
  }

  SecondLevelForward solve_forward(const Vector& h_alpha, const Factorization& fact,
                                   SolveLedger& ledger) const {
    SecondLevelForward out;
    out.h_u = solve_linear(fact, -(dfda * h_alpha), false, ledger, Purpose::second_lfss);
    const Vector rhs = -(a12 * out.h_u) + mixed * h_alpha;
    out.h_psi = solve_linear(fact, rhs, true, ledger, Purpose::second_lfss);
    return out;
  }

  double indirect(Index i, const Vector& h_u, const Vector& h_psi) const {
    const SecondLevelSources src = sources(i);
    return src.grad_u.dot(h_u) + src.grad_psi.dot(h_psi);
  }
};

namespace detail {

inline void require_index(const Model& model, Index i) {
  if (i < 0 || i >= model.n_param()) {
    throw std::out_of_range("parameter index out of range");
  }
}

}  // namespace detail

inline SecondLevelSources second_level_sources(const Model& model, const Vector& u,
                                               const Vector& alpha, const Vector& psi,
                                               Index i) {
  detail::require_index(model, i);
  return SecondOrderTerms::evaluate(model, u, alpha, psi).sources(i);
}

inline SecondLevelAdjoint solve_second_lass(const Model& model, const Vector& u,
                                            const Vector& alpha, const Vector& psi, Index i,
                                            const Factorization& fact, SolveLedger& ledger) {
  detail::require_index(model, i);
  detail::require_matching(fact, u, alpha);
  return SecondOrderTerms::evaluate(model, u, alpha, psi).solve_adjoint(i, fact, ledger);
}

/// Block operator of the second-level adjoint system acting on (psi1, psi2):
///   [ J^T  A12 ] [psi1]   [dS_i/du  ]
///   [ 0    J   ] [psi2] = [dS_i/dpsi]
/// Exposed for inspection only; solves go through the cached factorization
/// of J and never assemble it.
struct SecondLassOperator {
  SparseMatrix a11;
  SparseMatrix a12;
  SparseMatrix a22;

  SparseMatrix assemble() const {
    const Index n = a22.rows();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a11.nonZeros() + a12.nonZeros() + a22.nonZeros()));
    auto put = [&](const SparseMatrix& m, Index r0, Index c0) {
      for (Index k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
          t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        }
      }
    };
    put(a11, 0, 0);
    put(a12, 0, n);
    put(a22, n, n);
    SparseMatrix out(2 * n, 2 * n);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }
};

inline SecondLassOperator second_lass_operator(const Model& model, const Vector& u,
                                               const Vector& alpha, const Vector& psi) {
  const SparseMatrix j = model.jacobian_state(u, alpha);
  return {SparseMatrix(j.transpose()),
          SparseMatrix(model.residual_hess_contract_uu(u, alpha, psi) -
                       model.response_hess_blocks(u, alpha).uu),
          j};
}

/// Row i of the Hessian from a solved second-level adjoint pair:
/// H_ij = [H_aa - C_aa(psi)]_ij - psi1^T (dF/dalpha) e_j + psi2^T (H_ua - C_ua(psi)) e_j.
inline Vector hessian_row(const Model& model, const Vector& u, const Vector& alpha,
                          const Vector& psi, const SecondLevelAdjoint& sla) {
  detail::require_index(model, sla.index);
  return SecondOrderTerms::evaluate(model, u, alpha, psi).row(sla);
}

/// [H_aa - C_aa(psi)]: the part of the Hessian needing no solves.
inline Matrix direct_effect(const Model& model, const Vector& u, const Vector& alpha,
                            const Vector& psi) {
  return model.response_hess_blocks(u, alpha).aa -
         model.residual_hess_contract_aa(u, alpha, psi);
}

struct HessianOptions {
  unsigned threads = 1;
};

/// Full Hessian, one second-level adjoint system per row. Performs exactly
/// N_alpha J solves and N_alpha J^T solves against `fact`; factors nothing.
inline HessianMatrix hessian_full(const Model& model, const Vector& u, const Vector& alpha,
                                  const Vector& psi, const Factorization& fact,
                                  SolveLedger& ledger, HessianOptions opts = {}) {
  detail::require_matching(fact, u, alpha);
  const Index n = model.n_param();
  Matrix h = Matrix::Zero(n, n);
  if (n == 0) return HessianMatrix::from_raw(std::move(h));

  const SecondOrderTerms terms = SecondOrderTerms::evaluate(model, u, alpha, psi);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n)));

  std::vector<bool> done(static_cast<std::size_t>(n), false);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<SolveLedger> shards(workers);
  std::vector<char> row_done(static_cast<std::size_t>(n), 0);

  auto work = [&](unsigned w) {
    try {
      for (Index i = w; i < n; i += workers) {
        const SecondLevelAdjoint sla = terms.solve_adjoint(i, fact, shards[w]);
        h.row(i) = terms.row(sla).transpose();
        row_done[static_cast<std::size_t>(i)] = 1;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& shard : shards) ledger.merge(shard.snapshot());

  for (const auto& err : errors) {
    if (!err) continue;
    for (std::size_t i = 0; i < done.size(); ++i) done[i] = row_done[i] != 0;
    std::string msg = "hessian_full: row failed";
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      msg += std::string(": ") + e.what();
    }
    throw HessianFailure(msg, h, done);
  }
  return HessianMatrix::from_raw(std::move(h));
}

inline SecondLevelForward solve_second_lfss(const Model& model, const Vector& u,
                                            const Vector& alpha, const Vector& psi,
                                            const Vector& h_alpha, const Factorization& fact,
                                            SolveLedger& ledger) {
  detail::require_matching(fact, u, alpha);
  if (h_alpha.size() != model.n_param()) {
    throw std::invalid_argument("solve_second_lfss: h_alpha has wrong length");
  }
  return SecondOrderTerms::evaluate(model, u, alpha, psi).solve_forward(h_alpha, fact, ledger);
}

/// Indirect-effect term dS_i/du . h_u + dS_i/dpsi . h_psi.
inline double dsi_indirect_forward(const Model& model, const Vector& u, const Vector& alpha,
                                   const Vector& psi, Index i, const Vector& h_u,
                                   const Vector& h_psi) {
  detail::require_index(model, i);
  return SecondOrderTerms::evaluate(model, u, alpha, psi).indirect(i, h_u, h_psi);
}

/// Hessian by the forward route: one second-level forward system per
/// column j, H_ij = direct_ij + indirect_i(h_u(e_j), h_psi(e_j)).
/// Costs 2 N_alpha solves tagged second_lfss.
inline HessianMatrix hessian_forward(const Model& model, const Vector& u, const Vector& alpha,
                                     const Vector& psi, const Factorization& fact,
                                     SolveLedger& ledger) {
  detail::require_matching(fact, u, alpha);
  const Index n = model.n_param();
  Matrix h = Matrix::Zero(n, n);
  if (n == 0) return HessianMatrix::from_raw(std::move(h));
  const SecondOrderTerms terms = SecondOrderTerms::evaluate(model, u, alpha, psi);
  for (Index j = 0; j < n; ++j) {
    const SecondLevelForward fwd = terms.solve_forward(Vector::Unit(n, j), fact, ledger);
    for (Index i = 0; i < n; ++i) {
      h(i, j) = terms.direct(i, j) + terms.indirect(i, fwd.h_u, fwd.h_psi);
    }
  }
  return HessianMatrix::from_raw(std::move(h));
}

}  // namespace sens2
