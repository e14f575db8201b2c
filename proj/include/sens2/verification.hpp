#pragma once

#include "sens2/engine.hpp"
#include "sens2/errors.hpp"
#include "sens2/ledger.hpp"
#include "sens2/model.hpp"
#include "sens2/newton.hpp"
#include "sens2/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sens2 {

enum class FdKind { forward, central };

/// Step rule h_i = c * (1 + |x_i|).
struct FdScheme {
  FdKind kind = FdKind::central;
  double c = 1e-4;

  static FdScheme central(double c = 1e-4) { return {FdKind::central, c}; }
  static FdScheme forward(double c = 1e-7) { return {FdKind::forward, c}; }

  double step(double x) const { return c * (1.0 + std::abs(x)); }

  void validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("fd scheme: step factor must be > 0");
  }
};

/// Max-norm-scaled difference: max|a - b| / max(max|b|, floor).
inline double max_rel_error(const Matrix& a, const Matrix& b, double floor = 1e-300) {
  if (a.size() == 0 && b.size() == 0) return 0.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

struct CheckItem {
  std::string quantity;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;

  bool passed() const { return error <= tolerance; }
};

struct CheckReport {
  std::vector<CheckItem> items;

  bool passed() const {
    return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.passed(); });
  }

  const CheckItem* find(const std::string& quantity) const {
    for (const auto& i : items) {
      if (i.quantity == quantity) return &i;
    }
    return nullptr;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& i : items) {
      if (!i.passed()) out.push_back(i.quantity);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Finite-difference oracles for R(u*(alpha), alpha)
// ---------------------------------------------------------------------------

/// Response evaluations collected by fd_gradient, reusable by fd_hessian.
struct FdGradient {
  FdScheme scheme;
  Vector params;
  Vector nominal_state;
  double nominal_response = 0.0;
  Vector steps;
  Vector plus;   ///< R(alpha + h_i e_i)
  Vector minus;  ///< R(alpha - h_i e_i), central scheme only
  Vector gradient;
};

struct FdHessian {
  HessianMatrix hessian;
  Vector steps;
  double estimated_error = 0.0;  ///< truncation + roundoff, relative to max|H|
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string format_params(const Vector& alpha) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Index i = 0; i < alpha.size(); ++i) os << (i ? ", " : "") << alpha[i];
  os << "]";
  return os.str();
}

/// Newton options for oracle solves: at least one polishing step.
inline NewtonOptions oracle_options(NewtonOptions opts) {
  opts.polish_steps = std::max(opts.polish_steps, 1);
  return opts;
}

/// R(u*(alpha), alpha) at an FD probe, warm-started from `guess`.
inline double probe_response(const Model& model, const Vector& alpha, const Vector& guess,
                             const NewtonOptions& opts, SolveLedger& ledger) {
  try {
    const NewtonResult nr = solve_forward(model, alpha, guess, opts, ledger, Purpose::fd_oracle);
    return model.response(nr.state, alpha);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string(e.what()) + " at FD probe alpha = " + format_params(alpha),
                         e.best_iterate(), e.residual_norm(), e.iterations());
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " at FD probe alpha = " + format_params(alpha));
  }
}

}  // namespace detail

/// FD gradient of alpha -> R(u*(alpha), alpha). Performs the nominal solve
/// (purpose forward) plus N_alpha (forward scheme) or 2 N_alpha (central)
/// probe solves (purpose fd_oracle), each warm-started from u*.
inline FdGradient fd_gradient(const Model& model, const Vector& alpha, const FdScheme& scheme,
                              const NewtonOptions& opts_in, SolveLedger& ledger) {
  const NewtonOptions opts = detail::oracle_options(opts_in);
  scheme.validate();
  const Index n = model.n_param();
  FdGradient out;
  out.scheme = scheme;
  out.params = alpha;
  const NewtonResult nominal = solve_forward(model, alpha, model.initial_guess(alpha), opts, ledger);
  out.nominal_state = nominal.state;
  out.nominal_response = model.response(nominal.state, alpha);
  out.steps.resize(n);
  out.plus.resize(n);
  out.gradient.resize(n);
  if (scheme.kind == FdKind::central) out.minus.resize(n);

  for (Index i = 0; i < n; ++i) {
    const double h = scheme.step(alpha[i]);
    out.steps[i] = h;
    Vector ap = alpha;
    ap[i] += h;
    out.plus[i] = detail::probe_response(model, ap, out.nominal_state, opts, ledger);
    if (scheme.kind == FdKind::central) {
      Vector am = alpha;
      am[i] -= h;
      out.minus[i] = detail::probe_response(model, am, out.nominal_state, opts, ledger);
      out.gradient[i] = (out.plus[i] - out.minus[i]) / (2.0 * h);
    } else {
      out.gradient[i] = (out.plus[i] - out.nominal_response) / h;
    }
  }
  return out;
}

/// FD Hessian of alpha -> R(u*(alpha), alpha) reusing the probes in `base`.
///
/// Forward scheme (the operation-count mode): one-sided second differences
/// over the upper triangle, N(N+1)/2 additional probe solves. Central scheme:
/// diagonal from `base`, four probes per off-diagonal pair.
inline FdHessian fd_hessian(const Model& model, const FdGradient& base, const NewtonOptions& opts_in,
                            SolveLedger& ledger) {
  const NewtonOptions opts = detail::oracle_options(opts_in);
  const Index n = base.params.size();
  const Vector& alpha = base.params;
  const Vector& h = base.steps;
  const double r0 = base.nominal_response;
  Matrix hess = Matrix::Zero(n, n);

  auto shifted = [&](Index i, double si, Index j, double sj) {
    Vector a = alpha;
    a[i] += si * h[i];
    a[j] += sj * h[j];
    return detail::probe_response(model, a, base.nominal_state, opts, ledger);
  };

  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      double v = 0.0;
      if (base.scheme.kind == FdKind::forward) {
        const double rij = shifted(i, 1.0, j, 1.0);  // alpha + 2h e_i when i == j
        v = (rij - base.plus[i] - base.plus[j] + r0) / (h[i] * h[j]);
      } else if (i == j) {
        v = (base.plus[i] - 2.0 * r0 + base.minus[i]) / (h[i] * h[i]);
      } else {
        const double pp = shifted(i, 1.0, j, 1.0);
        const double pm = shifted(i, 1.0, j, -1.0);
        const double mp = shifted(i, -1.0, j, 1.0);
        const double mm = shifted(i, -1.0, j, -1.0);
        v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
      }
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }

  FdHessian out;
  out.steps = h;
  if (n > 0) {
    double r_scale = std::abs(r0);
    for (Index i = 0; i < n; ++i) r_scale = std::max(r_scale, std::abs(base.plus[i]));
    const double eps_r = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(r_scale, std::numeric_limits<double>::min());
    const double h_min = h.minCoeff();
    const double hmax = std::max(hess.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double trunc = base.scheme.kind == FdKind::forward ? base.scheme.c
                                                             : base.scheme.c * base.scheme.c;
    out.estimated_error = trunc + 4.0 * eps_r / (h_min * h_min) / hmax;
    if (out.estimated_error > 1e-3) {
      std::ostringstream os;
      os << "fd_hessian: estimated truncation+roundoff error " << out.estimated_error
         << " exceeds 1e-3 relative";
      out.warnings.push_back(os.str());
    }
  }
  out.hessian = HessianMatrix::from_raw(std::move(hess));
  return out;
}

/// Standalone FD Hessian: runs fd_gradient for the single-shift probes first.
inline FdHessian fd_hessian(const Model& model, const Vector& alpha, const FdScheme& scheme,
                            const NewtonOptions& opts, SolveLedger& ledger) {
  const FdGradient base = fd_gradient(model, alpha, scheme, opts, ledger);
  return fd_hessian(model, base, opts, ledger);
}

/// Adjoint gradient at alpha, re-solving forward + first-level adjoint from
/// `guess`; all work tagged `purpose`.
inline Vector adjoint_gradient_at(const Model& model, const Vector& alpha, const Vector& guess,
                                  const NewtonOptions& opts, SolveLedger& ledger,
                                  Purpose purpose) {
  try {
    const NewtonResult nr = solve_forward(model, alpha, guess, opts, ledger, purpose);
    const Factorization fact = factorize_at(model, nr.state, alpha, ledger, purpose);
    const Vector psi =
        solve_linear(fact, model.response_grad_state(nr.state, alpha), true, ledger, purpose);
    return gradient_adjoint(model, nr.state, alpha, psi);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string(e.what()) + " at alpha = " + detail::format_params(alpha),
                         e.best_iterate(), e.residual_norm(), e.iterations());
  }
}

/// FD of the adjoint gradient: column j = dS/dalpha_j. Raw (unsymmetrized).
inline HessianMatrix fd_gradient_of_adjoint_gradient(const Model& model, const Vector& alpha,
                                                     const FdScheme& scheme,
                                                     const NewtonOptions& opts_in,
                                                     SolveLedger& ledger) {
  const NewtonOptions opts = detail::oracle_options(opts_in);
  scheme.validate();
  const Index n = model.n_param();
  const NewtonResult nominal = solve_forward(model, alpha, model.initial_guess(alpha), opts, ledger);
  Vector s0;
  if (scheme.kind == FdKind::forward) {
    s0 = adjoint_gradient_at(model, alpha, nominal.state, opts, ledger, Purpose::fd_oracle);
  }
  Matrix h(n, n);
  for (Index j = 0; j < n; ++j) {
    const double step = scheme.step(alpha[j]);
    Vector ap = alpha;
    ap[j] += step;
    const Vector sp = adjoint_gradient_at(model, ap, nominal.state, opts, ledger, Purpose::fd_oracle);
    if (scheme.kind == FdKind::central) {
      Vector am = alpha;
      am[j] -= step;
      const Vector sm =
          adjoint_gradient_at(model, am, nominal.state, opts, ledger, Purpose::fd_oracle);
      h.col(j) = (sp - sm) / (2.0 * step);
    } else {
      h.col(j) = (sp - s0) / step;
    }
  }
  return HessianMatrix::from_raw(std::move(h));
}

// ---------------------------------------------------------------------------
// Callback validation
// ---------------------------------------------------------------------------

struct DerivativeCheckOptions {
  double step_factor = 1e-5;  ///< h = step_factor * (1 + |x|)
  double floor = 1e-10;       ///< absolute scale floor for relative errors
  std::uint64_t seed = 20240611;
};

namespace detail {

/// Central-difference Jacobian of a vector function over `x`.
inline Matrix fd_columns(const std::function<Vector(const Vector&)>& f, const Vector& x,
                         double step_factor) {
  const Vector f0 = f(x);
  Matrix out(f0.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) {
    const double h = step_factor * (1.0 + std::abs(x[k]));
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return out;
}

inline double scaled_error(const Matrix& analytic, const Matrix& fd, double floor) {
  if (analytic.size() == 0) return 0.0;
  const double scale =
      std::max({analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff(), floor});
  return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

/// 0 when exactly symmetric, otherwise max|A - A^T| / max|A|.
inline double exact_asymmetry(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const double d = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (d == 0.0) return 0.0;
  return d / std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
}

}  // namespace detail

/// Compares every derivative callback with central differences of its
/// parent quantity; contractions are checked against FD of J^T w,
/// (dF/dalpha)^T w with a random weight w. Symmetric outputs must be exactly
/// symmetric.
inline CheckReport check_model_derivatives(const Model& model, const Vector& u, const Vector& alpha,
                                           double tol, DerivativeCheckOptions opts = {}) {
  model.validate(u, alpha);
  const double c = opts.step_factor;
  CheckReport report;
  std::ostringstream step_note;
  step_note << "central FD, h = " << c << "*(1+|x|)";
  auto add = [&](std::string name, const Matrix& analytic, const Matrix& fd) {
    report.items.push_back(
        {std::move(name), detail::scaled_error(analytic, fd, opts.floor), tol, step_note.str()});
  };
  auto add_sym = [&](std::string name, const Matrix& m) {
    report.items.push_back({std::move(name), detail::exact_asymmetry(m), 0.0, "exact symmetry"});
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(model.n_state());
  for (Index i = 0; i < w.size(); ++i) w[i] = normal(rng);

  auto in_u = [&](auto fn) {
    return [&, fn](const Vector& x) -> Vector { return fn(x, alpha); };
  };
  auto in_a = [&](auto fn) {
    return [&, fn](const Vector& x) -> Vector { return fn(u, x); };
  };

  auto residual = [&](const Vector& uu, const Vector& aa) { return model.residual(uu, aa); };
  auto jt_w = [&](const Vector& uu, const Vector& aa) -> Vector {
    return model.jacobian_state(uu, aa).transpose() * w;
  };
  auto fa_t_w = [&](const Vector& uu, const Vector& aa) -> Vector {
    return model.jacobian_param(uu, aa).transpose() * w;
  };
  auto r_scalar = [&](const Vector& uu, const Vector& aa) -> Vector {
    return Vector::Constant(1, model.response(uu, aa));
  };
  auto r_u = [&](const Vector& uu, const Vector& aa) { return model.response_grad_state(uu, aa); };
  auto r_a = [&](const Vector& uu, const Vector& aa) { return model.response_grad_param(uu, aa); };

  const Matrix jac = Matrix(model.jacobian_state(u, alpha));
  add("jacobian_state", jac, detail::fd_columns(in_u(residual), u, c));
  add("jacobian_param", model.jacobian_param(u, alpha), detail::fd_columns(in_a(residual), alpha, c));
  add("response_grad_state", model.response_grad_state(u, alpha).transpose(),
      detail::fd_columns(in_u(r_scalar), u, c));
  add("response_grad_param", model.response_grad_param(u, alpha).transpose(),
      detail::fd_columns(in_a(r_scalar), alpha, c));

  const ResponseHessian rh = model.response_hess_blocks(u, alpha);
  const Matrix huu(rh.uu);
  add("response_hess_uu", huu, detail::fd_columns(in_u(r_u), u, c));
  add("response_hess_ua", rh.ua, detail::fd_columns(in_a(r_u), alpha, c));
  add("response_hess_aa", rh.aa, detail::fd_columns(in_a(r_a), alpha, c));

  const Matrix cuu(model.residual_hess_contract_uu(u, alpha, w));
  const Matrix cua = model.residual_hess_contract_ua(u, alpha, w);
  const Matrix caa = model.residual_hess_contract_aa(u, alpha, w);
  add("contract_uu", cuu, detail::fd_columns(in_u(jt_w), u, c));
  add("contract_ua", cua, detail::fd_columns(in_a(jt_w), alpha, c));
  add("contract_aa", caa, detail::fd_columns(in_a(fa_t_w), alpha, c));

  add_sym("symmetry_contract_uu", cuu);
  add_sym("symmetry_contract_aa", caa);
  add_sym("symmetry_response_hess_uu", huu);
  add_sym("symmetry_response_hess_aa", rh.aa);
  return report;
}

// ---------------------------------------------------------------------------
// Operation-count assertions
// ---------------------------------------------------------------------------

enum class LedgerPath {
  adjoint,      ///< nominal solve + first-level adjoint + N second-level adjoints
  fd_counting,  ///< forward-scheme fd_gradient + reusing fd_hessian
};

/// (N^2 + 3N) / 2: forward-method solve count for all first and second
/// order sensitivities.
constexpr std::uint64_t forward_method_solve_count(std::uint64_t n_param) {
  return (n_param * n_param + 3 * n_param) / 2;
}

inline CheckReport assert_ledger_counts(const LedgerSnapshot& ledger, Index n_param,
                                        LedgerPath path) {
  const auto n = static_cast<std::uint64_t>(n_param);
  CheckReport report;
  auto expect = [&](std::string name, std::uint64_t actual, std::uint64_t expected) {
    std::ostringstream os;
    os << "actual " << actual << ", expected " << expected;
    const double diff = actual > expected ? double(actual - expected) : double(expected - actual);
    report.items.push_back({std::move(name), diff, 0.0, os.str()});
  };
  expect("conservation", ledger.conserved() ? 0 : 1, 0);
  if (path == LedgerPath::adjoint) {
    expect("nonlinear_solves", ledger.count(Counter::nonlinear_solves), 1);
    expect("post_convergence_factorizations", ledger.count(Counter::jacobian_factorizations), 1);
    expect("transpose_solves", ledger.count(Counter::linear_solves_JT), 1 + n);
    expect("non_transpose_solves", ledger.count(Counter::linear_solves_J), n);
    expect("second_lass_solves", ledger.count(Purpose::second_lass, Counter::linear_solves_J) +
                                     ledger.count(Purpose::second_lass, Counter::linear_solves_JT),
           2 * n);
  } else {
    expect("nonlinear_solves", ledger.count(Counter::nonlinear_solves),
           1 + forward_method_solve_count(n));
    expect("fd_extra_nonlinear_solves", ledger.count(Purpose::fd_oracle, Counter::nonlinear_solves),
           forward_method_solve_count(n));
    expect("post_convergence_factorizations", ledger.count(Counter::jacobian_factorizations), 0);
  }
  return report;
}

}  // namespace sens2
