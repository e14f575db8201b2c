#pragma once

// Shared fixtures for the unit and acceptance suites: small hand-written
// models and oracles that do not go through the library's solvers.

#include "sens2/sens2.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace sens2::testing {

/// Forwards every callback to `base`; subclasses override one to corrupt it.
class ForwardingModel : public Model {
 public:
  explicit ForwardingModel(std::shared_ptr<const Model> base, std::string name)
      : Model(std::move(name), base->n_state(), base->nominal_params(), base->admissible_box(),
              base->param_names()),
        base_(std::move(base)) {}

  Vector initial_guess(const Vector& a) const override { return base_->initial_guess(a); }

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    return base_->residual(u, a);
  }
  SparseMatrix eval_jacobian_state(const Vector& u, const Vector& a) const override {
    return base_->jacobian_state(u, a);
  }
  Matrix eval_jacobian_param(const Vector& u, const Vector& a) const override {
    return base_->jacobian_param(u, a);
  }
  double eval_response(const Vector& u, const Vector& a) const override {
    return base_->response(u, a);
  }
  Vector eval_response_grad_state(const Vector& u, const Vector& a) const override {
    return base_->response_grad_state(u, a);
  }
  Vector eval_response_grad_param(const Vector& u, const Vector& a) const override {
    return base_->response_grad_param(u, a);
  }
  ResponseHessian eval_response_hess_blocks(const Vector& u, const Vector& a) const override {
    return base_->response_hess_blocks(u, a);
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector& a,
                                              const Vector& w) const override {
    return base_->residual_hess_contract_uu(u, a, w);
  }
  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    return base_->residual_hess_contract_ua(u, a, w);
  }
  Matrix eval_residual_hess_contract_aa(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    return base_->residual_hess_contract_aa(u, a, w);
  }

  std::shared_ptr<const Model> base_;
};

/// Negative control: C_ua(w) returned with the wrong sign.
class FlippedMixedModel : public ForwardingModel {
 public:
  explicit FlippedMixedModel(std::shared_ptr<const Model> base)
      : ForwardingModel(std::move(base), "flipped_mixed") {}

 protected:
  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    return -base_->residual_hess_contract_ua(u, a, w);
  }
};

/// Negative control: the (0, 1) cross term of C_aa(w) carries an extra
/// w-linear term that its (1, 0) mirror lacks.
class OneSidedCrossTermModel : public ForwardingModel {
 public:
  explicit OneSidedCrossTermModel(std::shared_ptr<const Model> base)
      : ForwardingModel(std::move(base), "one_sided_cross_term") {}

 protected:
  Matrix eval_residual_hess_contract_aa(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    Matrix c = base_->residual_hess_contract_aa(u, a, w);
    c(0, 1) += w.sum();
    return c;
  }
};

/// F = u, R = 0, one parameter that nothing depends on.
class ZeroModel : public Model {
 public:
  explicit ZeroModel(Index n = 3)
      : Model("zero", n, Vector::Zero(1), ParameterBox::unbounded(1), {"a"}) {}

 protected:
  Vector eval_residual(const Vector& u, const Vector&) const override { return u; }
  SparseMatrix eval_jacobian_state(const Vector& u, const Vector&) const override {
    return sparse_diagonal(Vector::Ones(u.size()));
  }
  Matrix eval_jacobian_param(const Vector& u, const Vector& a) const override {
    return Matrix::Zero(u.size(), a.size());
  }
  double eval_response(const Vector&, const Vector&) const override { return 0.0; }
  Vector eval_response_grad_state(const Vector& u, const Vector&) const override {
    return Vector::Zero(u.size());
  }
  Vector eval_response_grad_param(const Vector&, const Vector& a) const override {
    return Vector::Zero(a.size());
  }
  ResponseHessian eval_response_hess_blocks(const Vector& u, const Vector& a) const override {
    return {SparseMatrix(u.size(), u.size()), Matrix::Zero(u.size(), a.size()),
            Matrix::Zero(a.size(), a.size())};
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector&,
                                              const Vector&) const override {
    return SparseMatrix(u.size(), u.size());
  }
  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& a,
                                        const Vector&) const override {
    return Matrix::Zero(u.size(), a.size());
  }
  Matrix eval_residual_hess_contract_aa(const Vector&, const Vector& a,
                                        const Vector&) const override {
    return Matrix::Zero(a.size(), a.size());
  }
};

/// F = A u - B alpha, R = c.u + d.alpha: nothing second order anywhere.
class QuadraticFreeModel : public Model {
 public:
  QuadraticFreeModel()
      : Model("quadratic_free", 3, Vector{{1.0, -0.5}}, ParameterBox::unbounded(2), {"p", "q"}) {
    a_ = Matrix{{4.0, -1.0, 0.0}, {-1.0, 4.0, -1.0}, {0.0, -1.0, 4.0}};
    b_ = Matrix{{1.0, 0.0}, {0.5, 2.0}, {0.0, 1.0}};
    c_ = Vector{{1.0, -2.0, 0.5}};
    d_ = Vector{{0.3, 0.7}};
  }

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override { return a_ * u - b_ * a; }
  SparseMatrix eval_jacobian_state(const Vector&, const Vector&) const override {
    return a_.sparseView();
  }
  Matrix eval_jacobian_param(const Vector&, const Vector&) const override { return -b_; }
  double eval_response(const Vector& u, const Vector& a) const override {
    return c_.dot(u) + d_.dot(a);
  }
  Vector eval_response_grad_state(const Vector&, const Vector&) const override { return c_; }
  Vector eval_response_grad_param(const Vector&, const Vector&) const override { return d_; }
  ResponseHessian eval_response_hess_blocks(const Vector&, const Vector&) const override {
    return {SparseMatrix(3, 3), Matrix::Zero(3, 2), Matrix::Zero(2, 2)};
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector&, const Vector&,
                                              const Vector&) const override {
    return SparseMatrix(3, 3);
  }
  Matrix eval_residual_hess_contract_ua(const Vector&, const Vector&,
                                        const Vector&) const override {
    return Matrix::Zero(3, 2);
  }
  Matrix eval_residual_hess_contract_aa(const Vector&, const Vector&,
                                        const Vector&) const override {
    return Matrix::Zero(2, 2);
  }

 private:
  Matrix a_, b_;
  Vector c_, d_;
};

// ---------------------------------------------------------------------------
// Closed-form oracles
// ---------------------------------------------------------------------------

/// R(a) = a3 (a2 / a1)^2, differentiated by hand.
struct LinearStateClosedForm {
  double r;
  Vector s;
  Matrix h;

  explicit LinearStateClosedForm(const Vector& a) : s(3), h(3, 3) {
    const double a1 = a[0], a2 = a[1], a3 = a[2];
    r = a3 * a2 * a2 / (a1 * a1);
    s << -2.0 * a3 * a2 * a2 / (a1 * a1 * a1), 2.0 * a3 * a2 / (a1 * a1), a2 * a2 / (a1 * a1);
    h << 6.0 * a3 * a2 * a2 / std::pow(a1, 4), -4.0 * a3 * a2 / std::pow(a1, 3),
        -2.0 * a2 * a2 / std::pow(a1, 3),  //
        -4.0 * a3 * a2 / std::pow(a1, 3), 2.0 * a3 / (a1 * a1), 2.0 * a2 / (a1 * a1),  //
        -2.0 * a2 * a2 / std::pow(a1, 3), 2.0 * a2 / (a1 * a1), 0.0;
  }
};

/// Real root of u^3 + a1 u = a2 by scalar Newton (a1 > 0: monotone cubic).
inline double cubic_root(double a1, double a2) {
  double u = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double step = (u * u * u + a1 * u - a2) / (3.0 * u * u + a1);
    u -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(u))) break;
  }
  return u;
}

/// Implicit first and second derivatives of the cubic root; R = u.
struct CubicClosedForm {
  double u;
  Vector s;
  Matrix h;

  explicit CubicClosedForm(const Vector& a) : s(2), h(2, 2) {
    u = cubic_root(a[0], a[1]);
    const double g = 3.0 * u * u + a[0];
    s << -u / g, 1.0 / g;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double cross = (j == 0 ? s[i] : 0.0) + (i == 0 ? s[j] : 0.0);
        h(i, j) = -(6.0 * u * s[i] * s[j] + cross) / g;
      }
    }
  }
};

/// Linear conduction (beta = 0) solved directly: k0 (2T_i - T_{i-1} - T_{i+1})
/// = dx^2 q_i, T_0 = T_{n+1} = T_b. Thomas algorithm.
inline Vector heat_linear_solution(Index n, double k0, const Vector& q_per_cell, double tb) {
  const double dx = 1.0 / static_cast<double>(n + 1);
  Vector rhs(n), c(n), d(n), x(n);
  for (Index i = 0; i < n; ++i) rhs[i] = dx * dx * q_per_cell[i] / k0;
  rhs[0] += tb;
  rhs[n - 1] += tb;
  c[0] = -1.0 / 2.0;
  d[0] = rhs[0] / 2.0;
  for (Index i = 1; i < n; ++i) {
    const double m = 2.0 + c[i - 1];
    c[i] = -1.0 / m;
    d[i] = (rhs[i] + d[i - 1]) / m;
  }
  x[n - 1] = d[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

inline double rel_err(const Matrix& a, const Matrix& b) { return max_rel_error(a, b); }

}  // namespace sens2::testing
