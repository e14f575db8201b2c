#pragma once

#include "sens2/errors.hpp"
#include "sens2/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sens2 {

/// F = a1 u - a2, R = a3 u^2. Linear in the state; R(alpha) = a3 a2^2 / a1^2.
class LinearStateModel : public Model {
 public:
  LinearStateModel()
      : Model("linear_state", 1, Vector::Ones(3),
              ParameterBox{Vector{{0.1, -10.0, -10.0}}, Vector{{10.0, 10.0, 10.0}}},
              {"a1", "a2", "a3"}) {}

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    return Vector::Constant(1, a[0] * u[0] - a[1]);
  }
  SparseMatrix eval_jacobian_state(const Vector&, const Vector& a) const override {
    return sparse_diagonal(Vector::Constant(1, a[0]));
  }
  Matrix eval_jacobian_param(const Vector& u, const Vector&) const override {
    return Matrix{{u[0], -1.0, 0.0}};
  }
  double eval_response(const Vector& u, const Vector& a) const override {
    return a[2] * u[0] * u[0];
  }
  Vector eval_response_grad_state(const Vector& u, const Vector& a) const override {
    return Vector::Constant(1, 2.0 * a[2] * u[0]);
  }
  Vector eval_response_grad_param(const Vector& u, const Vector&) const override {
    return Vector{{0.0, 0.0, u[0] * u[0]}};
  }
  ResponseHessian eval_response_hess_blocks(const Vector& u, const Vector& a) const override {
    return {sparse_diagonal(Vector::Constant(1, 2.0 * a[2])), Matrix{{0.0, 0.0, 2.0 * u[0]}},
            Matrix::Zero(3, 3)};
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector&, const Vector&,
                                              const Vector&) const override {
    return SparseMatrix(1, 1);
  }
  Matrix eval_residual_hess_contract_ua(const Vector&, const Vector&,
                                        const Vector& w) const override {
    return Matrix{{w[0], 0.0, 0.0}};
  }
  Matrix eval_residual_hess_contract_aa(const Vector&, const Vector&,
                                        const Vector&) const override {
    return Matrix::Zero(3, 3);
  }
};

/// F = u^3 + a1 u - a2, R = u. Nominal a = (1, 2) has root u = 1.
class CubicModel : public Model {
 public:
  CubicModel()
      : Model("cubic", 1, Vector{{1.0, 2.0}},
              ParameterBox{Vector{{0.1, -10.0}}, Vector{{10.0, 10.0}}}, {"a1", "a2"}) {}

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    const double x = u[0];
    return Vector::Constant(1, x * x * x + a[0] * x - a[1]);
  }
  SparseMatrix eval_jacobian_state(const Vector& u, const Vector& a) const override {
    return sparse_diagonal(Vector::Constant(1, 3.0 * u[0] * u[0] + a[0]));
  }
  Matrix eval_jacobian_param(const Vector& u, const Vector&) const override {
    return Matrix{{u[0], -1.0}};
  }
  double eval_response(const Vector& u, const Vector&) const override { return u[0]; }
  Vector eval_response_grad_state(const Vector&, const Vector&) const override {
    return Vector::Ones(1);
  }
  Vector eval_response_grad_param(const Vector&, const Vector&) const override {
    return Vector::Zero(2);
  }
  ResponseHessian eval_response_hess_blocks(const Vector&, const Vector&) const override {
    return {SparseMatrix(1, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 2)};
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector&,
                                              const Vector& w) const override {
    return sparse_diagonal(Vector::Constant(1, 6.0 * u[0] * w[0]));
  }
  Matrix eval_residual_hess_contract_ua(const Vector&, const Vector&,
                                        const Vector& w) const override {
    return Matrix{{w[0], 0.0}};
  }
  Matrix eval_residual_hess_contract_aa(const Vector&, const Vector&,
                                        const Vector&) const override {
    return Matrix::Zero(2, 2);
  }
};

namespace detail {

/// Tridiagonal (2, -1) stencil with eliminated Dirichlet nodes, applied to v.
inline Vector apply_stencil(const Vector& v) {
  const Index n = v.size();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = 2.0 * v[i] - (i > 0 ? v[i - 1] : 0.0) - (i + 1 < n ? v[i + 1] : 0.0);
  }
  return out;
}

/// Number of eliminated boundary neighbours of node i (0, 1, or 2 when n == 1).
inline double boundary_count(Index i, Index n) {
  return (i == 0 ? 1.0 : 0.0) + (i == n - 1 ? 1.0 : 0.0);
}

}  // namespace detail

/// Steady 1-D conduction -(k(T) T')' = q(x) on [0, 1], k(T) = k0 (1 + b T),
/// T(0) = T(1) = T_b, on n_cells interior nodes.
///
/// Face conductivities are the arithmetic mean of the nodal values, which
/// for linear k gives the Kirchhoff form k0 [G(T_{i+1}) - G(T_i)],
/// G(T) = T + b T^2 / 2. Rows are scaled by dx^2:
///   F_i = k0 (2 G_i - G_{i-1} - G_{i+1}) - dx^2 q_{zone(i)},  G_0 = G_{n+1} = G(T_b).
/// The source is piecewise constant over `n_zones` equal sub-intervals.
/// Parameters: (k0, b, q_1..q_m, T_b). R is the trapezoid-rule spatial mean
/// of T over [0, 1], boundary nodes included.
class HeatConductionModel : public Model {
 public:
  explicit HeatConductionModel(Index n_cells = 50, Index n_zones = 1)
      : Model("heat", check_cells(n_cells), nominal(n_zones), box(n_zones), names(n_zones)),
        zones_(n_zones),
        dx_(1.0 / static_cast<double>(n_cells + 1)),
        zone_of_(static_cast<std::size_t>(n_cells)) {
    for (Index i = 0; i < n_cells; ++i) {
      const double x = static_cast<double>(i + 1) * dx_;
      zone_of_[static_cast<std::size_t>(i)] =
          std::min<Index>(n_zones - 1, static_cast<Index>(std::floor(x * n_zones)));
    }
  }

  Index n_zones() const noexcept { return zones_; }
  double dx() const noexcept { return dx_; }
  Index k0_index() const noexcept { return 0; }
  Index beta_index() const noexcept { return 1; }
  Index q_index(Index zone) const noexcept { return 2 + zone; }
  Index tb_index() const noexcept { return 2 + zones_; }

  Vector initial_guess(const Vector& a) const override {
    return Vector::Constant(n_state(), a[tb_index()]);
  }

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    check_conductivity(u, a);
    const Vector g = kirchhoff(u, a[1]);
    const double gb = a[tb()] + 0.5 * a[1] * a[tb()] * a[tb()];
    Vector f = a[0] * stencil_with_boundary(g, gb);
    for (Index i = 0; i < n_state(); ++i) f[i] -= dx_ * dx_ * a[q_index(zone(i))];
    return f;
  }

  SparseMatrix eval_jacobian_state(const Vector& u, const Vector& a) const override {
    check_conductivity(u, a);
    const Index n = n_state();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i) {
      if (i > 0) t.emplace_back(i, i - 1, -a[0] * dg(u[i - 1], a[1]));
      t.emplace_back(i, i, 2.0 * a[0] * dg(u[i], a[1]));
      if (i + 1 < n) t.emplace_back(i, i + 1, -a[0] * dg(u[i + 1], a[1]));
    }
    SparseMatrix j(n, n);
    j.setFromTriplets(t.begin(), t.end());
    return j;
  }

  Matrix eval_jacobian_param(const Vector& u, const Vector& a) const override {
    check_conductivity(u, a);
    const Index n = n_state();
    const double tb_val = a[tb()];
    Matrix m = Matrix::Zero(n, n_param());
    const double gb = tb_val + 0.5 * a[1] * tb_val * tb_val;
    m.col(0) = stencil_with_boundary(kirchhoff(u, a[1]), gb);
    const Vector half_sq = 0.5 * u.array().square();
    m.col(1) = a[0] * stencil_with_boundary(half_sq, 0.5 * tb_val * tb_val);
    for (Index i = 0; i < n; ++i) {
      m(i, q_index(zone(i))) = -dx_ * dx_;
      m(i, tb()) = -a[0] * dg(tb_val, a[1]) * detail::boundary_count(i, n);
    }
    return m;
  }

  double eval_response(const Vector& u, const Vector& a) const override {
    return dx_ * (u.sum() + a[tb()]);
  }
  Vector eval_response_grad_state(const Vector&, const Vector&) const override {
    return Vector::Constant(n_state(), dx_);
  }
  Vector eval_response_grad_param(const Vector&, const Vector&) const override {
    Vector g = Vector::Zero(n_param());
    g[tb()] = dx_;
    return g;
  }
  ResponseHessian eval_response_hess_blocks(const Vector&, const Vector&) const override {
    return {SparseMatrix(n_state(), n_state()), Matrix::Zero(n_state(), n_param()),
            Matrix::Zero(n_param(), n_param())};
  }

  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector& a,
                                              const Vector& w) const override {
    check_conductivity(u, a);
    return sparse_diagonal(a[0] * a[1] * detail::apply_stencil(w));
  }

  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    check_conductivity(u, a);
    const Vector lw = detail::apply_stencil(w);
    Matrix m = Matrix::Zero(n_state(), n_param());
    for (Index j = 0; j < n_state(); ++j) {
      m(j, 0) = lw[j] * dg(u[j], a[1]);
      m(j, 1) = a[0] * lw[j] * u[j];
    }
    return m;
  }

  Matrix eval_residual_hess_contract_aa(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    check_conductivity(u, a);
    const Index n = n_state();
    const double tb_val = a[tb()];
    double w_boundary = 0.0;
    for (Index i = 0; i < n; ++i) w_boundary += w[i] * detail::boundary_count(i, n);
    const Vector half_sq = 0.5 * u.array().square();
    const double k0_beta = w.dot(stencil_with_boundary(half_sq, 0.5 * tb_val * tb_val));
    const double k0_tb = -dg(tb_val, a[1]) * w_boundary;
    const double beta_tb = -a[0] * tb_val * w_boundary;
    const double tb_tb = -a[0] * a[1] * w_boundary;

    Matrix m = Matrix::Zero(n_param(), n_param());
    m(0, 1) = m(1, 0) = k0_beta;
    m(0, tb()) = m(tb(), 0) = k0_tb;
    m(1, tb()) = m(tb(), 1) = beta_tb;
    m(tb(), tb()) = tb_tb;
    return m;
  }

 private:
  static Index check_cells(Index n_cells) {
    if (n_cells < 1) throw std::invalid_argument("heat: n_cells must be >= 1");
    return n_cells;
  }
  static Vector nominal(Index zones) {
    if (zones < 1) throw std::invalid_argument("heat: n_zones must be >= 1");
    Vector a(3 + zones);
    a[0] = 1.0;
    a[1] = 0.1;
    a.segment(2, zones).setConstant(10.0);
    a[2 + zones] = 0.0;
    return a;
  }
  static ParameterBox box(Index zones) {
    if (zones < 1) throw std::invalid_argument("heat: n_zones must be >= 1");
    Vector lo(3 + zones), hi(3 + zones);
    lo[0] = 0.05;
    hi[0] = 20.0;
    lo[1] = -0.5;
    hi[1] = 0.5;
    lo.segment(2, zones).setConstant(-50.0);
    hi.segment(2, zones).setConstant(50.0);
    lo[2 + zones] = -1.0;
    hi[2 + zones] = 1.0;
    return {lo, hi};
  }
  static std::vector<std::string> names(Index zones) {
    std::vector<std::string> n{"k0", "beta"};
    if (zones == 1) {
      n.emplace_back("q");
    } else {
      for (Index z = 0; z < zones; ++z) n.push_back("q" + std::to_string(z + 1));
    }
    n.emplace_back("T_b");
    return n;
  }

  Index tb() const noexcept { return 2 + zones_; }
  Index zone(Index i) const { return zone_of_[static_cast<std::size_t>(i)]; }

  static double dg(double t, double beta) { return 1.0 + beta * t; }

  static Vector kirchhoff(const Vector& u, double beta) {
    return u + 0.5 * beta * u.cwiseProduct(u);
  }

  /// 2 v_i - v_{i-1} - v_{i+1} with the boundary value vb at both ends.
  static Vector stencil_with_boundary(const Vector& v, double vb) {
    Vector out = detail::apply_stencil(v);
    const Index n = v.size();
    out[0] -= vb;
    out[n - 1] -= vb;
    return out;
  }

  void check_conductivity(const Vector& u, const Vector& a) const {
    const double beta = a[1];
    bool ok = a[0] > 0.0 && dg(a[tb()], beta) > 0.0;
    for (Index i = 0; ok && i < u.size(); ++i) ok = dg(u[i], beta) > 0.0;
    if (!ok) throw DomainError("heat: conductivity k(T) <= 0");
  }

  Index zones_;
  double dx_;
  std::vector<Index> zone_of_;
};

/// Bratu problem u'' + a1 exp(u) = 0, u(0) = u(1) = 0, on n_cells interior
/// nodes, rows scaled by dx^2: F_i = 2u_i - u_{i-1} - u_{i+1} - dx^2 a1 e^{u_i}.
/// R = log(sum_k exp(a2 u_k)) / a2, a smooth maximum with sharpness a2.
class BratuModel : public Model {
 public:
  explicit BratuModel(Index n_cells = 50)
      : Model("bratu", check_cells(n_cells), Vector{{1.0, 20.0}},
              ParameterBox{Vector{{0.0, 1.0}}, Vector{{3.4, 200.0}}}, {"lambda", "sharpness"}),
        dx_(1.0 / static_cast<double>(n_cells + 1)) {}

  double dx() const noexcept { return dx_; }

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    return detail::apply_stencil(u) - dx_ * dx_ * a[0] * u.array().exp().matrix();
  }

  SparseMatrix eval_jacobian_state(const Vector& u, const Vector& a) const override {
    const Index n = n_state();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i) {
      if (i > 0) t.emplace_back(i, i - 1, -1.0);
      t.emplace_back(i, i, 2.0 - dx_ * dx_ * a[0] * std::exp(u[i]));
      if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    SparseMatrix j(n, n);
    j.setFromTriplets(t.begin(), t.end());
    return j;
  }

  Matrix eval_jacobian_param(const Vector& u, const Vector&) const override {
    Matrix m = Matrix::Zero(n_state(), 2);
    m.col(0) = -dx_ * dx_ * u.array().exp().matrix();
    return m;
  }

  double eval_response(const Vector& u, const Vector& a) const override {
    return softmax(u, a[1]).value;
  }
  Vector eval_response_grad_state(const Vector& u, const Vector& a) const override {
    return softmax(u, a[1]).weights;
  }
  Vector eval_response_grad_param(const Vector& u, const Vector& a) const override {
    const SmoothMax sm = softmax(u, a[1]);
    return Vector{{0.0, (sm.weights.dot(u) - sm.value) / a[1]}};
  }

  ResponseHessian eval_response_hess_blocks(const Vector& u, const Vector& a) const override {
    const double s = a[1];
    const SmoothMax sm = softmax(u, s);
    const Vector& p = sm.weights;
    const Index n = n_state();
    const double mean = p.dot(u);

    Matrix huu = -s * (p * p.transpose()).eval();
    huu.diagonal() += s * p;
    ResponseHessian out;
    out.uu = huu.sparseView(0.0, 0.0);
    out.ua = Matrix::Zero(n, 2);
    out.ua.col(1) = p.cwiseProduct((u.array() - mean).matrix());
    const double var = p.dot((u.array() - mean).square().matrix());
    out.aa = Matrix::Zero(2, 2);
    out.aa(1, 1) = var / s - 2.0 * (mean - sm.value) / (s * s);
    return out;
  }

  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector& a,
                                              const Vector& w) const override {
    return sparse_diagonal(-dx_ * dx_ * a[0] * w.cwiseProduct(u.array().exp().matrix()));
  }
  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector&,
                                        const Vector& w) const override {
    Matrix m = Matrix::Zero(n_state(), 2);
    m.col(0) = -dx_ * dx_ * w.cwiseProduct(u.array().exp().matrix());
    return m;
  }
  Matrix eval_residual_hess_contract_aa(const Vector&, const Vector&,
                                        const Vector&) const override {
    return Matrix::Zero(2, 2);
  }

 private:
  struct SmoothMax {
    double value;
    Vector weights;
  };

  static Index check_cells(Index n_cells) {
    if (n_cells < 1) throw std::invalid_argument("bratu: n_cells must be >= 1");
    return n_cells;
  }

  static SmoothMax softmax(const Vector& u, double s) {
    const double m = u.maxCoeff();
    const Vector e = (s * (u.array() - m)).exp().matrix();
    const double sum = e.sum();
    return {m + std::log(sum) / s, e / sum};
  }

  double dx_;
};

/// Exposes a subset of another model's parameters; the rest stay frozen at
/// the values given on construction.
class ParameterSubset : public Model {
 public:
  ParameterSubset(std::shared_ptr<const Model> base, std::vector<Index> active,
                  Vector frozen_params)
      : Model(base->name(), base->n_state(), select(frozen_params, active),
              ParameterBox{select(base->admissible_box().lower, active),
                           select(base->admissible_box().upper, active)},
              select_names(base->param_names(), active)),
        base_(std::move(base)),
        active_(std::move(active)),
        frozen_(std::move(frozen_params)) {}

  ParameterSubset(std::shared_ptr<const Model> base, std::vector<Index> active)
      : ParameterSubset(base, std::move(active), base->nominal_params()) {}

  const std::vector<Index>& active() const noexcept { return active_; }

  Vector embed(const Vector& sub) const {
    Vector full = frozen_;
    for (std::size_t k = 0; k < active_.size(); ++k) full[active_[k]] = sub[static_cast<Index>(k)];
    return full;
  }

  Vector initial_guess(const Vector& a) const override { return base_->initial_guess(embed(a)); }

 protected:
  Vector eval_residual(const Vector& u, const Vector& a) const override {
    return base_->residual(u, embed(a));
  }
  SparseMatrix eval_jacobian_state(const Vector& u, const Vector& a) const override {
    return base_->jacobian_state(u, embed(a));
  }
  Matrix eval_jacobian_param(const Vector& u, const Vector& a) const override {
    return columns(base_->jacobian_param(u, embed(a)));
  }
  double eval_response(const Vector& u, const Vector& a) const override {
    return base_->response(u, embed(a));
  }
  Vector eval_response_grad_state(const Vector& u, const Vector& a) const override {
    return base_->response_grad_state(u, embed(a));
  }
  Vector eval_response_grad_param(const Vector& u, const Vector& a) const override {
    return select(base_->response_grad_param(u, embed(a)), active_);
  }
  ResponseHessian eval_response_hess_blocks(const Vector& u, const Vector& a) const override {
    ResponseHessian h = base_->response_hess_blocks(u, embed(a));
    return {std::move(h.uu), columns(h.ua), block(h.aa)};
  }
  SparseMatrix eval_residual_hess_contract_uu(const Vector& u, const Vector& a,
                                              const Vector& w) const override {
    return base_->residual_hess_contract_uu(u, embed(a), w);
  }
  Matrix eval_residual_hess_contract_ua(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    return columns(base_->residual_hess_contract_ua(u, embed(a), w));
  }
  Matrix eval_residual_hess_contract_aa(const Vector& u, const Vector& a,
                                        const Vector& w) const override {
    return block(base_->residual_hess_contract_aa(u, embed(a), w));
  }

 private:
  static Vector select(const Vector& v, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= v.size()) {
        throw std::out_of_range("parameter subset: index out of range");
      }
      out[static_cast<Index>(k)] = v[idx[k]];
    }
    return out;
  }
  static std::vector<std::string> select_names(const std::vector<std::string>& names,
                                               const std::vector<Index>& idx) {
    std::vector<std::string> out;
    for (Index i : idx) out.push_back(names.at(static_cast<std::size_t>(i)));
    return out;
  }
  Matrix columns(const Matrix& m) const {
    Matrix out(m.rows(), static_cast<Index>(active_.size()));
    for (std::size_t k = 0; k < active_.size(); ++k) out.col(static_cast<Index>(k)) = m.col(active_[k]);
    return out;
  }
  Matrix block(const Matrix& m) const {
    const auto n = static_cast<Index>(active_.size());
    Matrix out(n, n);
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) {
        out(r, c) = m(active_[static_cast<std::size_t>(r)], active_[static_cast<std::size_t>(c)]);
      }
    }
    return out;
  }

  std::shared_ptr<const Model> base_;
  std::vector<Index> active_;
  Vector frozen_;
};

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct BenchmarkOptions {
  Index n_cells = 50;
  Index n_zones = 1;
};

struct BenchmarkSpec {
  std::string name;
  Index n_state = 0;
  Index n_param = 0;
  Vector nominal_params;
  ParameterBox admissible_box;
  bool closed_form_available = false;
  std::string description;
  /// Sub-box of parameters (and state range) used for random derivative checks.
  ParameterBox sample_box;
  double state_lo = -1.0;
  double state_hi = 1.0;
};

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"linear_state", "cubic", "heat", "bratu"};
  return names;
}

inline std::shared_ptr<const Model> make_linear_state_model() {
  return std::make_shared<LinearStateModel>();
}
inline std::shared_ptr<const Model> make_cubic_model() { return std::make_shared<CubicModel>(); }
inline std::shared_ptr<const Model> make_heat_conduction(Index n_cells, Index n_zones = 1) {
  return std::make_shared<HeatConductionModel>(n_cells, n_zones);
}
inline std::shared_ptr<const Model> make_bratu(Index n_cells) {
  return std::make_shared<BratuModel>(n_cells);
}

inline std::shared_ptr<const Model> make_benchmark(const std::string& name,
                                                   const BenchmarkOptions& opts = {}) {
  if (name == "linear_state") return make_linear_state_model();
  if (name == "cubic") return make_cubic_model();
  if (name == "heat") return make_heat_conduction(opts.n_cells, opts.n_zones);
  if (name == "bratu") return make_bratu(opts.n_cells);
  throw std::invalid_argument("unknown benchmark model '" + name + "'");
}

inline BenchmarkSpec benchmark_spec(const std::string& name, const BenchmarkOptions& opts = {}) {
  const auto model = make_benchmark(name, opts);
  BenchmarkSpec spec;
  spec.name = name;
  spec.n_state = model->n_state();
  spec.n_param = model->n_param();
  spec.nominal_params = model->nominal_params();
  spec.admissible_box = model->admissible_box();
  spec.sample_box = model->admissible_box();
  if (name == "linear_state") {
    spec.closed_form_available = true;
    spec.description = "F = a1 u - a2, R = a3 u^2; linear in the state";
    spec.sample_box = {Vector{{0.5, -3.0, -3.0}}, Vector{{3.0, 3.0, 3.0}}};
    spec.state_lo = -2.0;
    spec.state_hi = 2.0;
  } else if (name == "cubic") {
    spec.closed_form_available = true;
    spec.description = "F = u^3 + a1 u - a2, R = u; scalar nonlinear";
    spec.sample_box = {Vector{{0.5, -3.0}}, Vector{{3.0, 3.0}}};
    spec.state_lo = -2.0;
    spec.state_hi = 2.0;
  } else if (name == "heat") {
    spec.closed_form_available = false;
    spec.description = "1-D steady conduction, k(T) = k0 (1 + b T), Dirichlet T_b, mean T";
    const Index m = opts.n_zones;
    Vector lo(3 + m), hi(3 + m);
    lo[0] = 0.5;
    hi[0] = 2.0;
    lo[1] = -0.2;
    hi[1] = 0.2;
    lo.segment(2, m).setConstant(-10.0);
    hi.segment(2, m).setConstant(10.0);
    lo[2 + m] = -0.5;
    hi[2 + m] = 0.5;
    spec.sample_box = {lo, hi};
    spec.state_lo = -1.0;
    spec.state_hi = 2.0;
  } else {
    spec.closed_form_available = false;
    spec.description = "Bratu u'' + a1 e^u = 0, smooth-max response";
    spec.sample_box = {Vector{{0.2, 5.0}}, Vector{{2.5, 40.0}}};
    spec.state_lo = 0.0;
    spec.state_hi = 0.5;
  }
  return spec;
}

/// Uniform random point inside `box` (both bounds finite).
template <class Rng>
Vector sample_uniform(const ParameterBox& box, Rng& rng) {
  Vector out(box.size());
  for (Index i = 0; i < box.size(); ++i) {
    std::uniform_real_distribution<double> d(box.lower[i], box.upper[i]);
    out[i] = d(rng);
  }
  return out;
}

}  // namespace sens2
