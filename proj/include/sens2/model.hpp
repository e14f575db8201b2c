#pragma once

#include "sens2/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sens2 {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Closed box [lower, upper] of admissible parameter values.
struct ParameterBox {
  Vector lower;
  Vector upper;

  static ParameterBox unbounded(Index n) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
  }

  Index size() const { return lower.size(); }

  bool contains(const Vector& alpha) const {
    if (alpha.size() != lower.size()) return false;
    for (Index i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] >= lower[i] && alpha[i] <= upper[i])) return false;
    }
    return true;
  }
};

/// Second partial derivatives of the response R(u, alpha).
struct ResponseHessian {
  SparseMatrix uu;  ///< n_state x n_state, symmetric
  Matrix ua;        ///< n_state x n_param
  Matrix aa;        ///< n_param x n_param, symmetric
};

/// A discrete nonlinear model F(u, alpha) = 0 with a scalar response
/// R(u, alpha) and exact first and second derivative callbacks.
///
/// Second derivatives of F are only ever exposed contracted against a
/// state-sized weight vector w:
///   C_uu(w)_jk = sum_m w_m d2F_m/du_j du_k
///   C_ua(w)_jk = sum_m w_m d2F_m/du_j dalpha_k
///   C_aa(w)_jk = sum_m w_m d2F_m/dalpha_j dalpha_k
///
/// Public entry points validate dimensions, finiteness and the admissible
/// parameter box, then dispatch to the protected `eval_*` hooks.
/// Implementations must be safe for concurrent const invocation.
class Model {
 public:
  virtual ~Model() = default;

  const std::string& name() const noexcept { return name_; }
  Index n_state() const noexcept { return n_state_; }
  Index n_param() const noexcept { return nominal_params_.size(); }
  const Vector& nominal_params() const noexcept { return nominal_params_; }
  const ParameterBox& admissible_box() const noexcept { return box_; }
  const std::vector<std::string>& param_names() const noexcept { return param_names_; }

  /// Starting point for the nominal Newton solve.
  virtual Vector initial_guess(const Vector& alpha) const {
    (void)alpha;
    return Vector::Zero(n_state_);
  }

  Vector residual(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    Vector f = eval_residual(u, alpha);
    if (f.size() != n_state_) {
      throw std::logic_error(name_ + ": residual returned wrong length");
    }
    return f;
  }

  SparseMatrix jacobian_state(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_jacobian_state(u, alpha);
  }

  /// dF/dalpha (n_state x n_param).
  Matrix jacobian_param(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_jacobian_param(u, alpha);
  }

  double response(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_response(u, alpha);
  }

  Vector response_grad_state(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_response_grad_state(u, alpha);
  }

  Vector response_grad_param(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_response_grad_param(u, alpha);
  }

  ResponseHessian response_hess_blocks(const Vector& u, const Vector& alpha) const {
    validate(u, alpha);
    return eval_response_hess_blocks(u, alpha);
  }

  SparseMatrix residual_hess_contract_uu(const Vector& u, const Vector& alpha,
                                         const Vector& w) const {
    validate(u, alpha);
    validate_weight(w);
    return eval_residual_hess_contract_uu(u, alpha, w);
  }

  Matrix residual_hess_contract_ua(const Vector& u, const Vector& alpha,
                                   const Vector& w) const {
    validate(u, alpha);
    validate_weight(w);
    return eval_residual_hess_contract_ua(u, alpha, w);
  }

  Matrix residual_hess_contract_aa(const Vector& u, const Vector& alpha,
                                   const Vector& w) const {
    validate(u, alpha);
    validate_weight(w);
    return eval_residual_hess_contract_aa(u, alpha, w);
  }

  /// Throws DomainError unless (u, alpha) is a valid evaluation point.
  void validate(const Vector& u, const Vector& alpha) const {
    if (u.size() != n_state_ || alpha.size() != n_param()) {
      std::ostringstream os;
      os << name_ << ": dimension mismatch (u has " << u.size() << ", expected "
         << n_state_ << "; alpha has " << alpha.size() << ", expected " << n_param()
         << ")";
      throw std::invalid_argument(os.str());
    }
    if (!u.allFinite()) throw DomainError(name_ + ": non-finite state entry");
    if (!alpha.allFinite()) throw DomainError(name_ + ": non-finite parameter entry");
    if (!box_.contains(alpha)) {
      std::ostringstream os;
      os << name_ << ": parameters outside admissible box: [" << alpha.transpose() << "]";
      throw DomainError(os.str());
    }
  }

 protected:
  Model(std::string name, Index n_state, Vector nominal_params, ParameterBox box,
        std::vector<std::string> param_names)
      : name_(std::move(name)),
        n_state_(n_state),
        nominal_params_(std::move(nominal_params)),
        box_(std::move(box)),
        param_names_(std::move(param_names)) {
    if (n_state_ <= 0) throw std::invalid_argument("model needs a positive state dimension");
    if (box_.size() != nominal_params_.size() ||
        static_cast<Index>(param_names_.size()) != nominal_params_.size()) {
      throw std::invalid_argument(name_ + ": parameter box/names do not match n_param");
    }
  }

  virtual Vector eval_residual(const Vector& u, const Vector& alpha) const = 0;
  virtual SparseMatrix eval_jacobian_state(const Vector& u, const Vector& alpha) const = 0;
  virtual Matrix eval_jacobian_param(const Vector& u, const Vector& alpha) const = 0;
  virtual double eval_response(const Vector& u, const Vector& alpha) const = 0;
  virtual Vector eval_response_grad_state(const Vector& u, const Vector& alpha) const = 0;
  virtual Vector eval_response_grad_param(const Vector& u, const Vector& alpha) const = 0;
  virtual ResponseHessian eval_response_hess_blocks(const Vector& u,
                                                    const Vector& alpha) const = 0;
  virtual SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector& alpha,
                                                      const Vector& w) const = 0;
  virtual Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& alpha,
                                                const Vector& w) const = 0;
  virtual Matrix eval_residual_hess_contract_aa(const Vector& u, const Vector& alpha,
                                                const Vector& w) const = 0;

 private:
  void validate_weight(const Vector& w) const {
    if (w.size() != n_state_) {
      throw std::invalid_argument(name_ + ": contraction weight has wrong length");
    }
  }

  std::string name_;
  Index n_state_;
  Vector nominal_params_;
  ParameterBox box_;
  std::vector<std::string> param_names_;
};

/// Builds an n x n diagonal sparse matrix.
inline SparseMatrix sparse_diagonal(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

}  // namespace sens2
