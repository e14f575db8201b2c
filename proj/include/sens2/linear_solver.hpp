#pragma once

#include "sens2/errors.hpp"
#include "sens2/ledger.hpp"
#include "sens2/model.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <memory>
#include <optional>
#include <sstream>
#include <variant>

namespace sens2 {

/// Systems up to this size are factored densely.
inline constexpr Index kDenseLuLimit = 512;

/// Pivots below kSingularPivotRatio * ||J||_inf are treated as singular.
inline constexpr double kSingularPivotRatio = 1e-14;

enum class LuBackend { automatic, dense, sparse };

/// The (u, alpha) point a Jacobian was evaluated at.
struct Fingerprint {
  Vector state;
  Vector params;
};

/// Immutable LU decomposition of a square Jacobian, usable for J x = b and
/// J^T x = b. Copies share the underlying decomposition; concurrent solves
/// are safe.
class Factorization {
 public:
  Index size() const noexcept { return n_; }
  bool is_dense() const noexcept { return std::holds_alternative<DenseLu>(lu_); }
  const std::optional<Fingerprint>& fingerprint() const noexcept { return fingerprint_; }

  /// True when built from a Jacobian at exactly (u, alpha), or when no
  /// fingerprint was recorded.
  bool matches(const Vector& u, const Vector& alpha) const {
    if (!fingerprint_) return true;
    return fingerprint_->state.size() == u.size() && fingerprint_->params.size() == alpha.size() &&
           fingerprint_->state == u && fingerprint_->params == alpha;
  }

  Vector solve(const Vector& rhs, bool transpose) const {
    if (rhs.size() != n_) throw std::invalid_argument("factorization: rhs has wrong length");
    if (const auto* d = std::get_if<DenseLu>(&lu_)) {
      return transpose ? Vector((*d)->transpose().solve(rhs)) : Vector((*d)->solve(rhs));
    }
    const auto& s = std::get<SparseLu>(lu_);
    return transpose ? Vector(s->transpose().solve(rhs)) : Vector(s->solve(rhs));
  }

  static Factorization build(const SparseMatrix& jac, LuBackend backend = LuBackend::automatic,
                             std::optional<Fingerprint> fingerprint = std::nullopt) {
    if (jac.rows() != jac.cols()) {
      throw std::invalid_argument("factorization: Jacobian is not square");
    }
    Factorization f;
    f.n_ = jac.rows();
    f.fingerprint_ = std::move(fingerprint);
    const bool dense = backend == LuBackend::dense ||
                       (backend == LuBackend::automatic && f.n_ <= kDenseLuLimit);
    if (dense) {
      Matrix full(jac);
      const double norm = full.cwiseAbs().rowwise().sum().maxCoeff();
      auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(full);
      const double min_pivot = lu->matrixLU().diagonal().cwiseAbs().minCoeff();
      if (!(norm > 0.0) || !(min_pivot >= kSingularPivotRatio * norm)) {
        std::ostringstream os;
        os << "singular Jacobian: min pivot " << min_pivot << ", ||J||_inf " << norm;
        throw SingularJacobian(os.str());
      }
      f.lu_ = std::move(lu);
    } else {
      auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
      SparseMatrix compressed = jac;
      compressed.makeCompressed();
      lu->compute(compressed);
      if (lu->info() != Eigen::Success) {
        throw SingularJacobian("singular Jacobian (sparse LU): " + lu->lastErrorMessage());
      }
      f.lu_ = std::move(lu);
    }
    return f;
  }

 private:
  using DenseLu = std::shared_ptr<const Eigen::PartialPivLU<Matrix>>;
  using SparseLu = std::shared_ptr<Eigen::SparseLU<SparseMatrix>>;

  Factorization() = default;

  Index n_ = 0;
  std::variant<DenseLu, SparseLu> lu_;
  std::optional<Fingerprint> fingerprint_;
};

/// Factors J and records one jacobian_factorization under `purpose`.
inline Factorization factorize(const SparseMatrix& jac, SolveLedger& ledger,
                               Purpose purpose = Purpose::forward,
                               std::optional<Fingerprint> fingerprint = std::nullopt,
                               LuBackend backend = LuBackend::automatic) {
  Factorization f = Factorization::build(jac, backend, std::move(fingerprint));
  ledger.record(purpose, Counter::jacobian_factorizations);
  return f;
}

/// Evaluates J(u, alpha), factors it, and stamps the fingerprint.
inline Factorization factorize_at(const Model& model, const Vector& u, const Vector& alpha,
                                  SolveLedger& ledger, Purpose purpose = Purpose::forward,
                                  LuBackend backend = LuBackend::automatic) {
  return factorize(model.jacobian_state(u, alpha), ledger, purpose, Fingerprint{u, alpha},
                   backend);
}

/// Solves J x = rhs (or J^T x = rhs) and records the solve.
inline Vector solve_linear(const Factorization& fact, const Vector& rhs, bool transpose,
                           SolveLedger& ledger, Purpose purpose) {
  Vector x = fact.solve(rhs, transpose);
  ledger.record(purpose, transpose ? Counter::linear_solves_JT : Counter::linear_solves_J);
  return x;
}

}  // namespace sens2
